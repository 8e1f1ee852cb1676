#ifndef IED_MODELS_HPP
#define IED_MODELS_HPP

#include <array>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "ied/checkpoint.hpp"
#include "ied/nn/graph.hpp"

namespace ied::models {

using nn::Tensor;

// Residual CNN: three convolutional batches whose outputs are summed after
// upsampling, then a dense classification head. Defaults reproduce the
// 30 x 7500 configuration; desk-scale runs shrink lengths, filters, and
// pool chains.
struct CnnConfig {
  int in_channels = 30;
  int input_len = 7500;
  int filters = 128;
  int kernel = 5;
  std::array<int, 2> batch1_pools{5, 5};
  std::array<int, 2> batch2_pools{5, 5};
  std::array<int, 3> batch3_pools{3, 2, 2};
  int head1 = 128;
  int head2 = 64;
  double dropout = 0.5;
};

// Conv front end, two sequence-to-sequence recurrent layers, dense head.
// variant "paper-text": bidirectional recurrent layers, head widths 128/64.
// variant "paper-count": single-direction layers, head widths 128/128 —
// the configuration whose parameter total matches the published 62,945.
struct BilstmConfig {
  int in_channels = 30;
  int input_len = 7500;
  int conv_filters = 32;
  int kernel = 5;
  int front_pool = 5;
  int units1 = 64;
  int units2 = 32;
  bool bidirectional = true;
  int head1 = 128;
  int head2 = 64;
  double dropout = 0.5;

  static BilstmConfig paper_text();
  static BilstmConfig paper_count();
  std::string variant_tag() const;
};

struct EnsembleConfig {
  int head1 = 32;
  int head2 = 32;
};

struct ParamCountReport {
  std::vector<std::pair<std::string, long>> per_layer;
  long total = 0;
  long trainable_total = 0;
};

class Model {
 public:
  virtual ~Model() = default;

  virtual const char* kind() const = 0;
  virtual std::string variant() const { return ""; }

  // Builds the forward graph from an input node to the output probability
  // (a 1-element tensor). Training mode requires a dropout stream.
  virtual nn::Ref forward(nn::Graph& g, nn::Ref input, nn::Mode mode,
                          Rng* dropout_rng) const = 0;

  virtual std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;

  // Infer-mode probability for one window (channels x samples tensor).
  double predict(const Tensor& window) const;

  // Counts by enumerating parameter array lengths, grouped by layer.
  ParamCountReport count_params() const;

  void freeze_all();
  void zero_grads();

 protected:
  nn::Parameter& add_param(const std::string& name, std::vector<int> shape);
  // deque keeps parameter addresses stable as layers are added
  std::deque<nn::Parameter> params_;
  friend void apply_checkpoint(Model&, const train::Checkpoint&);
};

class ResidualCnn : public Model {
 public:
  explicit ResidualCnn(const CnnConfig& config, std::uint64_t init_seed);
  const char* kind() const override { return "residual_cnn"; }
  nn::Ref forward(nn::Graph& g, nn::Ref input, nn::Mode mode,
                  Rng* dropout_rng) const override;
  const CnnConfig& config() const { return config_; }

 private:
  CnnConfig config_;
  std::vector<int> stage_lengths_;  // lengths after each pool stage
};

class BilstmModel : public Model {
 public:
  explicit BilstmModel(const BilstmConfig& config, std::uint64_t init_seed);
  const char* kind() const override { return "bilstm"; }
  std::string variant() const override { return config_.variant_tag(); }
  nn::Ref forward(nn::Graph& g, nn::Ref input, nn::Mode mode,
                  Rng* dropout_rng) const override;
  const BilstmConfig& config() const { return config_; }

 private:
  nn::Ref recurrent_block(nn::Graph& g, nn::Ref seq, const std::string& prefix,
                          nn::Mode mode, Rng* rng) const;
  BilstmConfig config_;
};

// Stacking ensemble: frozen sub-models, trainable dense head over the
// concatenated pair of sub-model probabilities.
class Ensemble : public Model {
 public:
  Ensemble(std::unique_ptr<Model> cnn, std::unique_ptr<Model> lstm,
           const EnsembleConfig& config, std::uint64_t init_seed);
  const char* kind() const override { return "ensemble"; }
  std::string variant() const override { return lstm_->variant(); }

  nn::Ref forward(nn::Graph& g, nn::Ref input, nn::Mode mode,
                  Rng* dropout_rng) const override;
  // Head only, from an already-concatenated 2-vector of sub-model outputs.
  nn::Ref head_forward(nn::Graph& g, nn::Ref pair) const;

  const Model& cnn() const { return *cnn_; }
  const Model& lstm() const { return *lstm_; }
  Model& cnn() { return *cnn_; }
  Model& lstm() { return *lstm_; }

  // frozen sub-model tensors plus the trainable head
  std::vector<nn::Parameter*> parameters() override;
  std::vector<nn::Parameter*> head_parameters() { return Model::parameters(); }

 private:
  std::unique_ptr<Model> cnn_;
  std::unique_ptr<Model> lstm_;
  EnsembleConfig config_;
};

std::unique_ptr<ResidualCnn> build_residual_cnn(const CnnConfig& config,
                                                std::uint64_t init_seed = 0);
std::unique_ptr<BilstmModel> build_bilstm_model(const BilstmConfig& config,
                                                std::uint64_t init_seed = 0);
std::unique_ptr<Ensemble> build_ensemble(std::unique_ptr<Model> cnn,
                                         std::unique_ptr<Model> lstm,
                                         const EnsembleConfig& config = {},
                                         std::uint64_t init_seed = 0);

// Two-phase assembly from trained sub-model checkpoints; throws NotTrained
// when either checkpoint is missing.
std::unique_ptr<Ensemble> build_ensemble_from_checkpoints(
    const CnnConfig& cnn_config, const BilstmConfig& lstm_config,
    const EnsembleConfig& config, const std::string& cnn_ckpt_path,
    const std::string& lstm_ckpt_path, std::uint64_t init_seed = 0);

// Copies checkpoint tensors into same-named model parameters, validating
// shapes and marking match by name.
void apply_checkpoint(Model& model, const train::Checkpoint& ckpt);

// FNV-1a over the raw bytes of every parameter tensor, in order; used by
// freeze-invariance checks.
std::uint64_t parameter_hash(const std::vector<const nn::Parameter*>& params);

}  // namespace ied::models

#endif  // IED_MODELS_HPP

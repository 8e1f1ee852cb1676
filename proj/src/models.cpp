#include "ied/models.hpp"

#include <cstring>
#include <filesystem>

#include "ied/nn/optimizer.hpp"

namespace ied::models {

using nn::Act;
using nn::Graph;
using nn::Mode;
using nn::Parameter;
using nn::Ref;

BilstmConfig BilstmConfig::paper_text() {
  BilstmConfig c;
  c.bidirectional = true;
  c.head1 = 128;
  c.head2 = 64;
  return c;
}

BilstmConfig BilstmConfig::paper_count() {
  BilstmConfig c;
  c.bidirectional = false;
  c.head1 = 128;
  c.head2 = 128;
  return c;
}

std::string BilstmConfig::variant_tag() const {
  return bidirectional ? "paper-text" : "paper-count";
}

Parameter& Model::add_param(const std::string& name, std::vector<int> shape) {
  for (const Parameter& p : params_)
    if (p.name == name)
      throw Error(ErrorCode::ShapeMismatch, "duplicate parameter name " + name);
  params_.push_back(Parameter{name, Tensor(std::move(shape)), true});
  return params_.back();
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (Parameter& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  std::vector<Parameter*> mut = const_cast<Model*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

double Model::predict(const Tensor& window) const {
  Graph g;
  const Ref in = g.input(window);
  const Ref out = forward(g, in, Mode::infer, nullptr);
  return g.value(out).values[0];
}

ParamCountReport Model::count_params() const {
  ParamCountReport report;
  for (const Parameter* p : parameters()) {
    const long n = p->tensor.numel();
    // group the .w/.b pair under the layer's name
    const std::size_t dot = p->name.rfind('.');
    const std::string layer = dot == std::string::npos ? p->name : p->name.substr(0, dot);
    if (report.per_layer.empty() || report.per_layer.back().first != layer)
      report.per_layer.emplace_back(layer, 0);
    report.per_layer.back().second += n;
    report.total += n;
    if (p->trainable) report.trainable_total += n;
  }
  return report;
}

void Model::freeze_all() {
  for (Parameter* p : parameters()) p->trainable = false;
}

void Model::zero_grads() {
  for (Parameter* p : parameters()) p->tensor.zero_grad();
}

// --- residual CNN ---------------------------------------------------------

ResidualCnn::ResidualCnn(const CnnConfig& config, std::uint64_t init_seed)
    : config_(config) {
  const CnnConfig& c = config_;
  std::vector<int> pools{c.batch1_pools[0], c.batch1_pools[1],
                         c.batch2_pools[0], c.batch2_pools[1],
                         c.batch3_pools[0], c.batch3_pools[1], c.batch3_pools[2]};
  int len = c.input_len;
  stage_lengths_.clear();
  for (int p : pools) {
    if (p < 1 || len % p != 0)
      throw Error(ErrorCode::ShapeMismatch,
                  "input length " + std::to_string(c.input_len) +
                      " does not divide by the pool chain (stuck at " +
                      std::to_string(len) + " / " + std::to_string(p) + ")");
    len /= p;
    stage_lengths_.push_back(len);
  }

  Rng rng(init_seed);
  auto conv = [&](const std::string& name, int cin, int cout) {
    Parameter& w = add_param(name + ".w", {cout, cin, c.kernel});
    nn::init_conv(w, rng);
    add_param(name + ".b", {cout});
  };
  auto fc = [&](const std::string& name, int fin, int fout) {
    Parameter& w = add_param(name + ".w", {fin, fout});
    nn::init_dense(w, rng);
    add_param(name + ".b", {fout});
  };

  conv("batch1.conv1", c.in_channels, c.filters);
  conv("batch1.conv2", c.filters, c.filters);
  conv("batch2.conv1", c.filters, c.filters);
  conv("batch2.conv2", c.filters, c.filters);
  conv("batch3.conv1", c.filters, c.filters);
  conv("batch3.conv2", c.filters, c.filters);
  conv("batch3.conv3", c.filters, c.filters);
  fc("head.fc1", c.filters, c.head1);
  fc("head.fc2", c.head1, c.head2);
  fc("head.out", c.head2, 1);
}

Ref ResidualCnn::forward(Graph& g, Ref input, Mode mode, Rng* rng) const {
  const CnnConfig& c = config_;
  auto P = [&](const std::string& name) -> Ref {
    for (const Parameter& p : params_)
      if (p.name == name) return g.param(const_cast<Parameter&>(p));
    throw Error(ErrorCode::ShapeMismatch, "missing parameter " + name);
  };
  auto conv_stage = [&](Ref x, const std::string& name, int pool, bool drop) {
    Ref h = g.activation(g.conv1d_same(x, P(name + ".w"), P(name + ".b")), Act::tanh);
    h = g.maxpool1d(h, pool);
    if (drop) h = g.dropout(h, c.dropout, mode, rng);
    return h;
  };

  Ref b1 = conv_stage(input, "batch1.conv1", c.batch1_pools[0], true);
  b1 = conv_stage(b1, "batch1.conv2", c.batch1_pools[1], true);

  Ref b2 = conv_stage(b1, "batch2.conv1", c.batch2_pools[0], true);
  b2 = conv_stage(b2, "batch2.conv2", c.batch2_pools[1], true);

  Ref b3 = conv_stage(b2, "batch3.conv1", c.batch3_pools[0], false);
  b3 = conv_stage(b3, "batch3.conv2", c.batch3_pools[1], false);
  b3 = conv_stage(b3, "batch3.conv3", c.batch3_pools[2], false);

  // align batches 2 and 3 to batch 1's length, then sum the three levels
  const int len1 = stage_lengths_[1], len2 = stage_lengths_[3], len3 = stage_lengths_[6];
  Ref merged = g.add(b1, g.upsample_repeat(b2, len1 / len2));
  merged = g.add(merged, g.upsample_repeat(b3, len1 / len3));

  Ref feat = g.global_avg_pool(merged);
  Ref h = g.activation(g.dense(feat, P("head.fc1.w"), P("head.fc1.b")), Act::tanh);
  h = g.dropout(h, c.dropout, mode, rng);
  h = g.activation(g.dense(h, P("head.fc2.w"), P("head.fc2.b")), Act::tanh);
  return g.activation(g.dense(h, P("head.out.w"), P("head.out.b")), Act::sigmoid);
}

// --- Bi-LSTM model ---------------------------------------------------------

BilstmModel::BilstmModel(const BilstmConfig& config, std::uint64_t init_seed)
    : config_(config) {
  const BilstmConfig& c = config_;
  Rng rng(init_seed);

  Parameter& cw = add_param("front.conv.w", {c.conv_filters, c.in_channels, c.kernel});
  nn::init_conv(cw, rng);
  add_param("front.conv.b", {c.conv_filters});

  auto lstm_dir = [&](const std::string& name, int fin, int units) {
    Parameter& wx = add_param(name + ".wx", {fin, 4 * units});
    nn::init_lstm_input(wx, rng);
    Parameter& wh = add_param(name + ".wh", {units, 4 * units});
    nn::init_lstm_recurrent(wh, rng);
    Parameter& b = add_param(name + ".b", {4 * units});
    nn::init_lstm_bias(b);
  };

  const int f1 = c.conv_filters;
  lstm_dir("rnn1.fwd", f1, c.units1);
  if (c.bidirectional) lstm_dir("rnn1.bwd", f1, c.units1);

  const int f2 = c.bidirectional ? 2 * c.units1 : c.units1;
  lstm_dir("rnn2.fwd", f2, c.units2);
  if (c.bidirectional) lstm_dir("rnn2.bwd", f2, c.units2);

  const int feat = c.bidirectional ? 2 * c.units2 : c.units2;
  auto fc = [&](const std::string& name, int fin, int fout) {
    Parameter& w = add_param(name + ".w", {fin, fout});
    nn::init_dense(w, rng);
    add_param(name + ".b", {fout});
  };
  fc("head.fc1", feat, c.head1);
  fc("head.fc2", c.head1, c.head2);
  fc("head.out", c.head2, 1);
}

Ref BilstmModel::recurrent_block(Graph& g, Ref seq, const std::string& prefix,
                                 Mode mode, Rng* rng) const {
  auto P = [&](const std::string& name) -> Ref {
    for (const Parameter& p : params_)
      if (p.name == name) return g.param(const_cast<Parameter&>(p));
    throw Error(ErrorCode::ShapeMismatch, "missing parameter " + name);
  };
  Ref h = g.lstm_seq(seq, P(prefix + ".fwd.wx"), P(prefix + ".fwd.wh"),
                     P(prefix + ".fwd.b"), false);
  if (config_.bidirectional) {
    Ref hb = g.lstm_seq(seq, P(prefix + ".bwd.wx"), P(prefix + ".bwd.wh"),
                        P(prefix + ".bwd.b"), true);
    h = g.concat_cols(h, hb);
  }
  h = g.activation(h, Act::relu);
  return g.dropout(h, config_.dropout, mode, rng);
}

Ref BilstmModel::forward(Graph& g, Ref input, Mode mode, Rng* rng) const {
  const BilstmConfig& c = config_;
  auto P = [&](const std::string& name) -> Ref {
    for (const Parameter& p : params_)
      if (p.name == name) return g.param(const_cast<Parameter&>(p));
    throw Error(ErrorCode::ShapeMismatch, "missing parameter " + name);
  };

  Ref h = g.activation(g.conv1d_same(input, P("front.conv.w"), P("front.conv.b")),
                       Act::relu);
  h = g.maxpool1d(h, c.front_pool);
  h = g.dropout(h, c.dropout, mode, rng);
  h = g.transpose(h);  // time-major for the recurrence

  h = recurrent_block(g, h, "rnn1", mode, rng);
  h = recurrent_block(g, h, "rnn2", mode, rng);

  Ref feat = g.global_avg_pool(g.transpose(h));
  Ref d = g.activation(g.dense(feat, P("head.fc1.w"), P("head.fc1.b")), Act::tanh);
  d = g.activation(g.dense(d, P("head.fc2.w"), P("head.fc2.b")), Act::tanh);
  return g.activation(g.dense(d, P("head.out.w"), P("head.out.b")), Act::sigmoid);
}

// --- ensemble ---------------------------------------------------------------

Ensemble::Ensemble(std::unique_ptr<Model> cnn, std::unique_ptr<Model> lstm,
                   const EnsembleConfig& config, std::uint64_t init_seed)
    : cnn_(std::move(cnn)), lstm_(std::move(lstm)), config_(config) {
  // imported sub-models contribute no trainable parameters
  cnn_->freeze_all();
  lstm_->freeze_all();
  for (Parameter* p : cnn_->parameters()) p->name = "cnn." + p->name;
  for (Parameter* p : lstm_->parameters()) p->name = "lstm." + p->name;

  Rng rng(init_seed);
  auto fc = [&](const std::string& name, int fin, int fout) {
    Parameter& w = add_param(name + ".w", {fin, fout});
    nn::init_dense(w, rng);
    add_param(name + ".b", {fout});
  };
  fc("head.fc1", 2, config_.head1);
  fc("head.fc2", config_.head1, config_.head2);
  fc("head.out", config_.head2, 1);
}

std::vector<Parameter*> Ensemble::parameters() {
  std::vector<Parameter*> out = cnn_->parameters();
  std::vector<Parameter*> l = lstm_->parameters();
  out.insert(out.end(), l.begin(), l.end());
  std::vector<Parameter*> h = Model::parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

Ref Ensemble::head_forward(Graph& g, Ref pair) const {
  auto P = [&](const std::string& name) -> Ref {
    for (const Parameter& p : params_)
      if (p.name == name) return g.param(const_cast<Parameter&>(p));
    throw Error(ErrorCode::ShapeMismatch, "missing parameter " + name);
  };
  Ref h = g.activation(g.dense(pair, P("head.fc1.w"), P("head.fc1.b")), Act::tanh);
  h = g.activation(g.dense(h, P("head.fc2.w"), P("head.fc2.b")), Act::tanh);
  return g.activation(g.dense(h, P("head.out.w"), P("head.out.b")), Act::sigmoid);
}

Ref Ensemble::forward(Graph& g, Ref input, Mode mode, Rng* rng) const {
  const Ref p_cnn = cnn_->forward(g, input, mode, rng);
  const Ref p_lstm = lstm_->forward(g, input, mode, rng);
  return head_forward(g, g.concat(p_cnn, p_lstm));
}

// --- builders ----------------------------------------------------------------

std::unique_ptr<ResidualCnn> build_residual_cnn(const CnnConfig& config,
                                                std::uint64_t init_seed) {
  return std::make_unique<ResidualCnn>(config, init_seed);
}

std::unique_ptr<BilstmModel> build_bilstm_model(const BilstmConfig& config,
                                                std::uint64_t init_seed) {
  return std::make_unique<BilstmModel>(config, init_seed);
}

std::unique_ptr<Ensemble> build_ensemble(std::unique_ptr<Model> cnn,
                                         std::unique_ptr<Model> lstm,
                                         const EnsembleConfig& config,
                                         std::uint64_t init_seed) {
  return std::make_unique<Ensemble>(std::move(cnn), std::move(lstm), config,
                                    init_seed);
}

std::unique_ptr<Ensemble> build_ensemble_from_checkpoints(
    const CnnConfig& cnn_config, const BilstmConfig& lstm_config,
    const EnsembleConfig& config, const std::string& cnn_ckpt_path,
    const std::string& lstm_ckpt_path, std::uint64_t init_seed) {
  for (const std::string& path : {cnn_ckpt_path, lstm_ckpt_path})
    if (!std::filesystem::exists(path))
      throw Error(ErrorCode::NotTrained,
                  "sub-model checkpoint missing: " + path +
                      " (train both sub-models before the ensemble)");
  auto cnn = build_residual_cnn(cnn_config, init_seed);
  apply_checkpoint(*cnn, train::load_checkpoint(cnn_ckpt_path));
  auto lstm = build_bilstm_model(lstm_config, init_seed);
  apply_checkpoint(*lstm, train::load_checkpoint(lstm_ckpt_path));
  return build_ensemble(std::move(cnn), std::move(lstm), config, init_seed);
}

void apply_checkpoint(Model& model, const train::Checkpoint& ckpt) {
  std::vector<Parameter*> params = model.parameters();
  if (params.size() != ckpt.params.size())
    throw Error(ErrorCode::VersionMismatch,
                "checkpoint has " + std::to_string(ckpt.params.size()) +
                    " parameters, model has " + std::to_string(params.size()));
  for (const Parameter& saved : ckpt.params) {
    Parameter* target = nullptr;
    for (Parameter* p : params)
      if (p->name == saved.name) {
        target = p;
        break;
      }
    if (!target)
      throw Error(ErrorCode::VersionMismatch,
                  "checkpoint parameter '" + saved.name + "' not in model");
    if (target->tensor.shape != saved.tensor.shape)
      throw Error(ErrorCode::ShapeMismatch,
                  "checkpoint shape mismatch for '" + saved.name + "'");
    target->tensor.values = saved.tensor.values;
    target->trainable = saved.trainable;
  }
}

std::uint64_t parameter_hash(const std::vector<const Parameter*>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Parameter* p : params) {
    for (double v : p->tensor.values) {
      std::uint64_t bits;
      static_assert(sizeof bits == sizeof v);
      std::memcpy(&bits, &v, sizeof bits);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

}  // namespace ied::models

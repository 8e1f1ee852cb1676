#ifndef IED_TRAINER_HPP
#define IED_TRAINER_HPP

#include <string>
#include <vector>

#include "ied/checkpoint.hpp"
#include "ied/datapipe.hpp"
#include "ied/models.hpp"

namespace ied::train {

enum class Precision { fp64, fp32 };

Precision precision_from_string(const std::string& s);
const char* precision_to_string(Precision p);

struct TrainConfig {
  int batch = 16;
  int max_epochs = 50;
  int patience = 3;
  double lr = 0.001;
  double rho = 0.9;
  double epsilon = 1e-7;
  std::uint64_t seed = 0;
  Precision precision = Precision::fp64;
  // Wall time is only persisted on request; by default the history file
  // stays bit-reproducible for a fixed seed.
  bool log_wall_time = false;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;  // wall time; persisted only with log_wall_time
};

struct Example {
  nn::Tensor input;  // channels x samples window
  double label = 0.0;
  std::string patient_id;
  std::string file_path;
};
using Dataset = std::vector<Example>;

struct TrainResult {
  std::vector<EpochRecord> history;
  Checkpoint best;
};

// Mini-batch RMSprop on BCE with validation-loss early stopping. Stops when
// the validation loss has not improved for `patience` epochs; the model is
// restored to, and the checkpoint taken from, the epoch with the lowest
// validation loss.
TrainResult train(models::Model& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& config);

// Second phase: sub-models are frozen, so their probabilities are
// precomputed once per example and only the head trains on the 2-vectors.
TrainResult train_ensemble(models::Ensemble& ensemble, const Dataset& train_set,
                           const Dataset& val_set, const TrainConfig& config);

// History file: `epoch,train_loss,val_loss,seconds` per epoch.
std::string format_history(const std::vector<EpochRecord>& history,
                           bool with_wall_time);
void save_history(const std::vector<EpochRecord>& history,
                  const std::string& path, bool with_wall_time);

// Reads EDF files named by the entries (relative paths resolved against
// base_dir), runs the preprocessing pipeline, and emits model-ready windows.
Dataset make_dataset(const std::vector<data::ManifestEntry>& entries,
                     const std::string& base_dir,
                     const prep::PreprocessConfig& pcfg, int threads = 1);

nn::Tensor window_tensor(const prep::PreparedRecording& prepared);

}  // namespace ied::train

#endif  // IED_TRAINER_HPP

#include "ied/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "ied/nn/optimizer.hpp"

namespace ied::train {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

void round_params_to_float(const std::vector<nn::Parameter*>& params) {
  for (nn::Parameter* p : params)
    for (double& v : p->tensor.values)
      v = static_cast<double>(static_cast<float>(v));
}

std::vector<nn::Parameter> snapshot_params(const std::vector<nn::Parameter*>& params) {
  std::vector<nn::Parameter> out;
  out.reserve(params.size());
  for (const nn::Parameter* p : params) {
    nn::Parameter copy;
    copy.name = p->name;
    copy.trainable = p->trainable;
    copy.tensor = nn::Tensor(p->tensor.shape, p->tensor.values);
    out.push_back(std::move(copy));
  }
  return out;
}

void restore_params(const std::vector<nn::Parameter*>& params,
                    const std::vector<nn::Parameter>& snapshot) {
  for (std::size_t i = 0; i < params.size(); ++i)
    params[i]->tensor.values = snapshot[i].tensor.values;
}

// One gradient-descent fit over an arbitrary forward builder; shared by the
// sub-model phase and the ensemble-head phase.
struct FitSpec {
  std::function<nn::Ref(nn::Graph&, nn::Ref, nn::Mode, Rng*)> forward;
  std::vector<nn::Parameter*> params;  // all; optimizer skips frozen ones
  const Dataset* train_set = nullptr;
  const Dataset* val_set = nullptr;
  std::string model_name;
  std::string variant;
};

TrainResult fit(const FitSpec& spec, const TrainConfig& cfg) {
  if (cfg.batch < 1 || cfg.max_epochs < 1 || cfg.patience < 1)
    throw Error(ErrorCode::ConfigInvalid,
                "batch, max_epochs, and patience must all be >= 1");
  if (spec.train_set->empty() || spec.val_set->empty())
    throw Error(ErrorCode::EmptyDataset, "training and validation sets must be non-empty");

  const bool single = cfg.precision == Precision::fp32;
  if (single) round_params_to_float(spec.params);

  nn::Rmsprop optimizer({cfg.lr, cfg.rho, cfg.epsilon});
  Rng rng(hash_combine(cfg.seed, hash_string("train-stream")));

  const Dataset& train_set = *spec.train_set;
  const Dataset& val_set = *spec.val_set;

  auto predict_one = [&](const Example& ex) {
    nn::Graph g(single);
    const nn::Ref in = g.input(ex.input);
    const nn::Ref out = spec.forward(g, in, nn::Mode::infer, nullptr);
    return g.value(out).values[0];
  };

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int stale = 0;
  std::vector<nn::Parameter> best_snapshot;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const Clock::time_point t0 = Clock::now();
    shuffle_indices(order, rng);

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      const double batch_n = static_cast<double>(end - start);

      for (nn::Parameter* p : spec.params) p->tensor.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const Example& ex = train_set[order[i]];
        nn::Graph g(single);
        const nn::Ref in = g.input(ex.input);
        const nn::Ref prob = spec.forward(g, in, nn::Mode::train, &rng);
        const nn::Ref loss = g.bce_loss(prob, {ex.label});
        batch_loss += g.value(loss).values[0] / batch_n;
        g.backward(loss, 1.0 / batch_n);
      }
      if (!std::isfinite(batch_loss))
        throw Error(ErrorCode::NonFiniteLoss,
                    "training diverged at epoch " + std::to_string(epoch) +
                        ", batch " + std::to_string(batches));
      optimizer.step(spec.params);
      if (single) round_params_to_float(spec.params);
      loss_sum += batch_loss;
      ++batches;
    }
    const double train_loss = loss_sum / batches;

    std::vector<double> probs, labels;
    probs.reserve(val_set.size());
    labels.reserve(val_set.size());
    for (const Example& ex : val_set) {
      probs.push_back(predict_one(ex));
      labels.push_back(ex.label);
    }
    const double val_loss = nn::bce_loss(probs, labels);
    if (!std::isfinite(val_loss))
      throw Error(ErrorCode::NonFiniteLoss,
                  "validation loss non-finite at epoch " + std::to_string(epoch));

    result.history.push_back({epoch, train_loss, val_loss, elapsed_s(t0)});

    if (val_loss < best_val) {
      best_val = val_loss;
      best_epoch = epoch;
      stale = 0;
      best_snapshot = snapshot_params(spec.params);
    } else if (++stale >= cfg.patience) {
      break;
    }
  }

  restore_params(spec.params, best_snapshot);
  result.best.model_name = spec.model_name;
  result.best.variant = spec.variant;
  result.best.seed = cfg.seed;
  result.best.epoch = static_cast<std::uint32_t>(best_epoch);
  result.best.params = std::move(best_snapshot);
  return result;
}

}  // namespace

Precision precision_from_string(const std::string& s) {
  if (s == "double" || s == "fp64") return Precision::fp64;
  if (s == "single" || s == "fp32") return Precision::fp32;
  throw Error(ErrorCode::ConfigInvalid, "unknown precision '" + s + "'");
}

const char* precision_to_string(Precision p) {
  return p == Precision::fp64 ? "double" : "single";
}

TrainResult train(models::Model& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& config) {
  FitSpec spec;
  spec.forward = [&model](nn::Graph& g, nn::Ref in, nn::Mode mode, Rng* rng) {
    return model.forward(g, in, mode, rng);
  };
  spec.params = model.parameters();
  spec.train_set = &train_set;
  spec.val_set = &val_set;
  spec.model_name = model.kind();
  spec.variant = model.variant();
  return fit(spec, config);
}

TrainResult train_ensemble(models::Ensemble& ensemble, const Dataset& train_set,
                           const Dataset& val_set, const TrainConfig& config) {
  std::vector<const nn::Parameter*> frozen;
  for (const nn::Parameter* p : const_cast<const models::Ensemble&>(ensemble).parameters())
    if (!p->trainable) frozen.push_back(p);
  const std::uint64_t hash_before = models::parameter_hash(frozen);

  // frozen sub-models give constant outputs, so evaluate them once and
  // train the head on the concatenated pairs
  auto to_pairs = [&](const Dataset& in) {
    Dataset out;
    out.reserve(in.size());
    for (const Example& ex : in) {
      nn::Graph g(config.precision == Precision::fp32);
      const nn::Ref x = g.input(ex.input);
      const double p_cnn =
          g.value(ensemble.cnn().forward(g, x, nn::Mode::infer, nullptr)).values[0];
      const double p_lstm =
          g.value(ensemble.lstm().forward(g, x, nn::Mode::infer, nullptr)).values[0];
      Example pair;
      pair.input = nn::Tensor({2}, {p_cnn, p_lstm});
      pair.label = ex.label;
      pair.patient_id = ex.patient_id;
      pair.file_path = ex.file_path;
      out.push_back(std::move(pair));
    }
    return out;
  };
  const Dataset train_pairs = to_pairs(train_set);
  const Dataset val_pairs = to_pairs(val_set);

  FitSpec spec;
  spec.forward = [&ensemble](nn::Graph& g, nn::Ref in, nn::Mode, Rng*) {
    return ensemble.head_forward(g, in);
  };
  spec.params = ensemble.head_parameters();
  spec.train_set = &train_pairs;
  spec.val_set = &val_pairs;
  spec.model_name = ensemble.kind();
  spec.variant = ensemble.variant();
  TrainResult result = fit(spec, config);

  if (models::parameter_hash(frozen) != hash_before)
    throw Error(ErrorCode::NotTrained,
                "frozen sub-model parameters changed during head training");

  // checkpoint the whole ensemble so the saved file is self-contained
  std::vector<nn::Parameter*> all = ensemble.parameters();
  result.best.params = snapshot_params(all);
  return result;
}

std::string format_history(const std::vector<EpochRecord>& history,
                           bool with_wall_time) {
  std::string out = "epoch,train_loss,val_loss,seconds\n";
  char line[160];
  for (const EpochRecord& r : history) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.3f\n", r.epoch,
                  r.train_loss, r.val_loss, with_wall_time ? r.seconds : 0.0);
    out += line;
  }
  return out;
}

void save_history(const std::vector<EpochRecord>& history,
                  const std::string& path, bool with_wall_time) {
  write_text_file(path, format_history(history, with_wall_time));
}

nn::Tensor window_tensor(const prep::PreparedRecording& prepared) {
  const int c = static_cast<int>(prepared.window.size());
  const int len = c > 0 ? static_cast<int>(prepared.window[0].size()) : 0;
  nn::Tensor t({c, len});
  for (int ch = 0; ch < c; ++ch)
    std::copy(prepared.window[static_cast<std::size_t>(ch)].begin(),
              prepared.window[static_cast<std::size_t>(ch)].end(),
              t.values.begin() + static_cast<std::size_t>(ch) * len);
  return t;
}

Dataset make_dataset(const std::vector<data::ManifestEntry>& entries,
                     const std::string& base_dir,
                     const prep::PreprocessConfig& pcfg, int threads) {
  Dataset out(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    const data::ManifestEntry& entry = entries[i];
    std::filesystem::path path(entry.file_path);
    if (path.is_relative() && !base_dir.empty())
      path = std::filesystem::path(base_dir) / path;
    const edf::EdfFile file = edf::read_edf_file(path.string());
    const prep::RawRecording raw = data::to_raw_recording(file, entry);
    const prep::PreparedRecording prepared = prep::preprocess_recording(raw, pcfg);
    Example ex;
    ex.input = window_tensor(prepared);
    ex.label = entry.label == data::Label::epileptic ? 1.0 : 0.0;
    ex.patient_id = entry.patient_id;
    ex.file_path = entry.file_path;
    out[i] = std::move(ex);
  });
  return out;
}

}  // namespace ied::train

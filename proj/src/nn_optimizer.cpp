#include "ied/nn/optimizer.hpp"

#include <cmath>

namespace ied::nn {

void Rmsprop::step(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    p->tensor.ensure_grad();
    std::vector<double>& acc = state_[p->name];
    if (acc.size() != p->tensor.values.size())
      acc.assign(p->tensor.values.size(), 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const double g = p->tensor.grad[i];
      acc[i] = config_.rho * acc[i] + (1.0 - config_.rho) * g * g;
      p->tensor.values[i] -= config_.lr * g / (std::sqrt(acc[i]) + config_.epsilon);
    }
  }
}

namespace {

void fill_uniform(Parameter& p, double bound, Rng& rng) {
  for (double& v : p.tensor.values) v = rng.uniform(-bound, bound);
}

}  // namespace

void init_dense(Parameter& w, Rng& rng) {
  const double fan_in = w.tensor.dim(0);
  const double fan_out = w.tensor.dim(1);
  fill_uniform(w, std::sqrt(6.0 / (fan_in + fan_out)), rng);
}

void init_conv(Parameter& w, Rng& rng) {
  const double fan_in = w.tensor.dim(1) * w.tensor.dim(2);
  const double fan_out = w.tensor.dim(0) * w.tensor.dim(2);
  fill_uniform(w, std::sqrt(6.0 / (fan_in + fan_out)), rng);
}

void init_lstm_input(Parameter& w, Rng& rng) {
  const double fan_in = w.tensor.dim(0);
  const double fan_out = w.tensor.dim(1);
  fill_uniform(w, std::sqrt(6.0 / (fan_in + fan_out)), rng);
}

void init_lstm_recurrent(Parameter& w, Rng& rng) {
  fill_uniform(w, 1.0 / std::sqrt(static_cast<double>(w.tensor.dim(0))), rng);
}

void init_lstm_bias(Parameter& b) {
  const int h = b.tensor.dim(0) / 4;
  for (double& v : b.tensor.values) v = 0.0;
  for (int j = 0; j < h; ++j) b.tensor.values[static_cast<std::size_t>(h + j)] = 1.0;
}

}  // namespace ied::nn

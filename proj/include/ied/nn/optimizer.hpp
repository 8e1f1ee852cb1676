#ifndef IED_NN_OPTIMIZER_HPP
#define IED_NN_OPTIMIZER_HPP

#include <map>
#include <string>
#include <vector>

#include "ied/nn/tensor.hpp"

namespace ied::nn {

struct RmspropConfig {
  double lr = 0.001;
  double rho = 0.9;
  double epsilon = 1e-7;
};

// RMSprop with a per-parameter squared-gradient accumulator, keyed by
// parameter name. Frozen parameters are skipped entirely.
class Rmsprop {
 public:
  explicit Rmsprop(RmspropConfig config = {}) : config_(config) {}

  const RmspropConfig& config() const { return config_; }

  // a <- rho*a + (1-rho)*g^2 ; theta <- theta - lr*g/(sqrt(a) + eps)
  void step(const std::vector<Parameter*>& params);

  const std::vector<double>* accumulator(const std::string& name) const {
    auto it = state_.find(name);
    return it == state_.end() ? nullptr : &it->second;
  }

 private:
  RmspropConfig config_;
  std::map<std::string, std::vector<double>> state_;
};

// Fan-based uniform init, bound sqrt(6/(fan_in+fan_out)).
void init_dense(Parameter& w, Rng& rng);           // F x H
void init_conv(Parameter& w, Rng& rng);            // Cout x Cin x K
// Scaled-uniform recurrent init: input kernel fan-based over (F, 4H),
// recurrent kernel bound 1/sqrt(H); forget-gate bias block set to 1.
void init_lstm_input(Parameter& w, Rng& rng);      // F x 4H
void init_lstm_recurrent(Parameter& w, Rng& rng);  // H x 4H
void init_lstm_bias(Parameter& b);                 // 4H, [i f g o] blocks

}  // namespace ied::nn

#endif  // IED_NN_OPTIMIZER_HPP

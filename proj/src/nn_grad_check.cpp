#include "ied/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace ied::nn {

namespace {

double evaluate(const GraphBuilder& build, const std::vector<Tensor>& inputs) {
  Graph g;
  std::vector<Ref> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(g.input(t));
  const Ref loss = build(g, leaves);
  return g.value(loss).values[0];
}

}  // namespace

double grad_check(const GraphBuilder& build, std::vector<Tensor> inputs,
                  double h) {
  // analytic gradients in one reverse pass
  std::vector<std::vector<double>> analytic;
  {
    Graph g;
    std::vector<Ref> leaves;
    leaves.reserve(inputs.size());
    for (const Tensor& t : inputs) leaves.push_back(g.input(t));
    const Ref loss = build(g, leaves);
    g.backward(loss);
    for (const Ref& r : leaves) analytic.push_back(g.grad_of(r));
  }

  double max_rel = 0.0;
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    for (std::size_t i = 0; i < inputs[ti].values.size(); ++i) {
      const double saved = inputs[ti].values[i];
      inputs[ti].values[i] = saved + h;
      const double up = evaluate(build, inputs);
      inputs[ti].values[i] = saved - h;
      const double down = evaluate(build, inputs);
      inputs[ti].values[i] = saved;

      const double fd = (up - down) / (2.0 * h);
      const double ad = analytic[ti][i];
      const double rel =
          std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1e-6});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace ied::nn

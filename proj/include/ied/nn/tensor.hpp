#ifndef IED_NN_TENSOR_HPP
#define IED_NN_TENSOR_HPP

#include <string>
#include <vector>

#include "ied/common.hpp"

namespace ied::nn {

// Shape-tagged contiguous array, row-major. `grad` is empty until a
// backward pass (or an optimizer) needs it, then matches `values` in size.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    values.assign(static_cast<std::size_t>(numel_of(shape)), 0.0);
  }
  Tensor(std::vector<int> s, std::vector<double> v)
      : shape(std::move(s)), values(std::move(v)) {
    if (static_cast<long>(values.size()) != numel_of(shape))
      throw Error(ErrorCode::ShapeMismatch, "value count does not match shape");
  }

  static long numel_of(const std::vector<int>& s) {
    long n = 1;
    for (int d : s) n *= d;
    return n;
  }

  long numel() const { return static_cast<long>(values.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  double& at(int r, int c) {
    return values[static_cast<std::size_t>(r) * dim(1) + c];
  }
  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * dim(1) + c];
  }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
  void zero_grad() { grad.assign(values.size(), 0.0); }
};

struct Parameter {
  std::string name;
  Tensor tensor;
  bool trainable = true;
};

}  // namespace ied::nn

#endif  // IED_NN_TENSOR_HPP

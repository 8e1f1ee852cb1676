#ifndef IED_NN_GRAD_CHECK_HPP
#define IED_NN_GRAD_CHECK_HPP

#include <functional>
#include <vector>

#include "ied/nn/graph.hpp"

namespace ied::nn {

// Builds a scalar loss from one leaf Ref per input tensor.
using GraphBuilder =
    std::function<Ref(Graph&, const std::vector<Ref>&)>;

// Compares reverse-mode gradients of `build` w.r.t. every element of every
// input against central finite differences (f(x+h)-f(x-h))/2h. Returns the
// maximum relative error, |fd - ad| / max(|fd|, |ad|, 1e-6).
//
// The builder must be deterministic: it is re-invoked for every probe.
double grad_check(const GraphBuilder& build, std::vector<Tensor> inputs,
                  double h = 1e-5);

}  // namespace ied::nn

#endif  // IED_NN_GRAD_CHECK_HPP

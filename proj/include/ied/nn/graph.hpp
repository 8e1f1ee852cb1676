#ifndef IED_NN_GRAPH_HPP
#define IED_NN_GRAPH_HPP

#include <deque>
#include <functional>
#include <vector>

#include "ied/nn/tensor.hpp"

namespace ied::nn {

enum class Mode { train, infer };
enum class Act { tanh, relu, sigmoid };
enum class Direction { forward, backward, bidirectional_concat };

// Handle into a Graph's tape.
struct Ref {
  int index = -1;
};

// Dynamic single-use computation tape. Ops append nodes in topological
// order; backward() walks the tape in reverse. Leaves bound to Parameters
// accumulate their gradients into Parameter::tensor.grad, so one tape per
// example can be replayed across a batch.
class Graph {
 public:
  // round_to_float stores every op's output at single precision (compute
  // stays double); the fast-mode counterpart of the default double storage
  explicit Graph(bool round_to_float = false) : round_(round_to_float) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Ref input(Tensor t);
  Ref param(Parameter& p);

  // cross-correlation with zero padding (K-1)/2 on both ends, K odd
  // x: Cin x L, w: Cout x Cin x K, b: Cout -> Cout x L
  Ref conv1d_same(Ref x, Ref w, Ref b);

  // non-overlapping windows, trailing remainder dropped; gradient routes
  // to the first argmax of each window
  Ref maxpool1d(Ref x, int pool);

  // nearest-neighbor repetition along time; gradient sums over repeats
  Ref upsample_repeat(Ref x, int factor);

  // x: F, w: F x H, b: H -> H
  Ref dense(Ref x, Ref w, Ref b);

  Ref activation(Ref x, Act kind);

  // x: C x L -> C (per-channel mean over time)
  Ref global_avg_pool(Ref x);

  Ref transpose(Ref x);
  Ref add(Ref a, Ref b);
  Ref concat(Ref a, Ref b);       // rank-1 feature concat
  Ref concat_cols(Ref a, Ref b);  // L x Fa, L x Fb -> L x (Fa+Fb)

  // inverted dropout; identity in infer mode and for rate 0
  Ref dropout(Ref x, double rate, Mode mode, Rng* rng);

  // sequence-to-sequence LSTM, zero initial state, gate blocks [i f g o]
  // x: L x F, w_in: F x 4H, w_rec: H x 4H, bias: 4H -> L x H
  Ref lstm_seq(Ref x, Ref w_in, Ref w_rec, Ref bias, bool reverse_time);

  // mean of -[y ln p + (1-y) ln(1-p)], p clipped to [1e-7, 1-1e-7]
  Ref bce_loss(Ref p, std::vector<double> labels);

  // scalar sum w.x; grad-check probe with distinguishable per-element pulls
  Ref weighted_sum(Ref x, std::vector<double> w);

  const Tensor& value(Ref r) const { return nodes_[size_t(r.index)].value; }
  const std::vector<double>& grad_of(Ref r) const {
    return nodes_[size_t(r.index)].grad;
  }

  // seeds d(scalar)/d(itself) = seed and propagates down the tape
  void backward(Ref scalar, double seed = 1.0);

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    Parameter* bound = nullptr;
    std::function<void()> back;
  };

  Node& node(Ref r) { return nodes_[static_cast<std::size_t>(r.index)]; }
  Ref push(Tensor value);

  std::deque<Node> nodes_;
  bool round_ = false;
};

// BCE as a plain function over already-computed probabilities (used for
// whole-set validation losses; same clipping as the graph op).
double bce_loss(const std::vector<double>& probs, const std::vector<double>& labels);

constexpr double kBceClip = 1e-7;

}  // namespace ied::nn

#endif  // IED_NN_GRAPH_HPP

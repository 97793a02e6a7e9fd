#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "filt/random.hpp"
#include "filt/tensor.hpp"

namespace filt {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
  bool valid() const { return id != static_cast<std::size_t>(-1); }
};

/// Reverse-mode recording of the handful of ops the model needs.
///
/// Every node owns its value as a flat row-major buffer with a (rows, cols)
/// shape; vectors are rows x 1. Leaves bound to a ParamTensor (whole or one
/// row) scatter their gradient into ParamTensor::grad on backward. Ops that
/// have a kink (leaky_relu, relu, hinge) append the side of the kink they were
/// evaluated on to branch_pattern(), which gradcheck uses to skip coordinates
/// whose perturbation crosses a kink.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(std::vector<double> values, std::size_t rows, std::size_t cols = 1);
  Var constant(std::vector<double> values);
  Var scalar(double v) { return constant({v}); }

  /// The whole tensor as one leaf; a 1-D tensor becomes a column vector,
  /// higher ranks become rows() x row_size(). Memoized per tensor.
  Var param(ParamTensor& p);
  /// One row of the tensor as a column vector leaf. Memoized per (tensor, row).
  Var param_row(ParamTensor& p, std::size_t row);
  /// One row of the tensor reshaped as a matrix (for per-relation matrices).
  Var param_row_matrix(ParamTensor& p, std::size_t row, std::size_t rows, std::size_t cols);

  std::span<const double> value(Var v) const;
  double scalar_value(Var v) const;
  std::size_t rows(Var v) const { return node(v).rows; }
  std::size_t cols(Var v) const { return node(v).cols; }
  std::size_t size(Var v) const { return node(v).value.size(); }
  std::size_t num_nodes() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates to every leaf.
  void backward(Var loss);

  const std::vector<std::uint8_t>& branch_pattern() const { return branches_; }
  void record_branch(bool side) { branches_.push_back(side ? 1 : 0); }

  // Op-implementation interface.
  Var push(std::vector<double> value, std::size_t rows, std::size_t cols, BackwardFn backward);
  std::span<double> grad(Var v);
  std::span<double> grad_of(std::size_t id) { return nodes_[id].grad; }
  std::span<const double> value_of(std::size_t id) const { return nodes_[id].value; }

 private:
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    std::size_t rows = 0;
    std::size_t cols = 0;
    BackwardFn backward;
  };
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  std::vector<std::uint8_t> branches_;
  std::map<std::pair<const ParamTensor*, std::size_t>, Var> leaf_cache_;
  bool backward_done_ = false;
};

inline constexpr double kLeakySlope = 0.01;

// Differentiable ops. Vectors are column vectors (n x 1).

/// W (m x n) times x (n) -> m.
Var linear(Tape& t, Var w, Var x);
Var add(Tape& t, Var a, Var b);
/// Scalar (1-element) var times vector.
Var scale(Tape& t, Var s, Var x);
/// Constant scalar times vector.
Var scale(Tape& t, double s, Var x);
Var concat(Tape& t, Var a, Var b);
/// sum_i weights[i] * vectors[i]; weights is a length-k vector var.
Var weighted_sum(Tape& t, Var weights, std::span<const Var> vectors);
/// Arithmetic mean of equally-sized vectors.
Var mean(Tape& t, std::span<const Var> vectors);
/// Max-shifted softmax over a vector.
Var softmax(Tape& t, Var logits);
Var leaky_relu(Tape& t, Var x, double slope = kLeakySlope);
Var relu(Tape& t, Var x);
Var tanh(Tape& t, Var x);
/// Inverted dropout: in training keeps each unit with probability 1-p and scales it by 1/(1-p).
Var dropout(Tape& t, Var x, double p, bool train, Rng& rng);
Var dot(Tape& t, Var a, Var b);
/// Stacks scalar vars into one vector.
Var stack(Tape& t, std::span<const Var> scalars);
/// Sum of scalar vars.
Var sum(Tape& t, std::span<const Var> scalars);
/// max(margin - pos + neg, 0).
Var hinge(Tape& t, double margin, Var pos, Var neg);
/// Re<s, r, conj(o)> with each d-vector split into real (first d/2) and imaginary halves.
Var complex_score(Tape& t, Var s, Var r, Var o);
/// [omega_0 t + phi_0, sin(omega_j t + phi_j) for j >= 1].
Var time2vec(Tape& t, Var omega, Var phase, double time);
/// sqrt(1/n) [cos(omega_j t + phi_j)].
Var functional_time(Tape& t, Var omega, Var phase, double time);

/// Plain (untaped) Re<s, r, conj(o)>.
double complex_score_value(std::span<const double> s, std::span<const double> r,
                           std::span<const double> o);

}  // namespace filt

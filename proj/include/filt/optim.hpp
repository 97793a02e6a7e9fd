#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "filt/tensor.hpp"

namespace filt {

enum class OptimizerKind { adam, sgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam / SGD over a fixed list of tensors. Moment buffers are keyed by position
/// in the list, so the list must be the same on every step.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  /// Applies one update to every tensor not listed in `frozen`, then zeroes all
  /// gradients. Throws NumericError naming the first tensor with a non-finite gradient
  /// (before any tensor is modified).
  void step(std::span<ParamTensor* const> params, const std::vector<std::string>& frozen = {});

  std::uint64_t steps() const { return step_count_; }
  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  std::uint64_t step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Per-tensor outcome of a finite-difference check.
struct GradcheckTensorReport {
  std::string name;
  std::size_t checked = 0;
  std::size_t kinks = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t kinks = 0;
  std::vector<GradcheckTensorReport> tensors;
  bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// Loss value plus the kink-side pattern recorded while computing it.
struct LossProbe {
  double value = 0.0;
  std::vector<std::uint8_t> branches;
  /// Optional additive decomposition of `value`. When present (same length for every
  /// probe), differences are taken term by term and then summed.
  std::vector<double> terms;
};

/// Evaluates the loss at the current parameter values; when `with_grad` is set it
/// must also run backward, accumulating into ParamTensor::grad.
using LossFn = std::function<LossProbe(bool with_grad)>;

struct GradcheckOptions {
  double epsilon = 1e-5;
  /// Coordinates sampled per tensor; 0 checks every coordinate.
  std::size_t samples_per_tensor = 24;
  std::uint64_t seed = 7;
};

/// Compares analytic gradients against central differences on sampled coordinates.
/// A coordinate whose +eps or -eps evaluation lands on a different kink side than the
/// base evaluation is counted as a kink and left out of the maximum.
GradcheckReport gradcheck(const LossFn& loss, std::span<ParamTensor* const> params,
                          const GradcheckOptions& options = {});

double relative_error(double analytic, double numeric);

}  // namespace filt

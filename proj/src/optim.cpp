#include "filt/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "filt/random.hpp"
#include "filt/types.hpp"

namespace filt {

void Optimizer::step(std::span<ParamTensor* const> params, const std::vector<std::string>& frozen) {
  for (const ParamTensor* p : params) {
    for (std::size_t i = 0; i < p->grad.size(); ++i) {
      if (!std::isfinite(p->grad[i])) {
        throw NumericError("non-finite gradient in tensor '" + p->name + "' at index " +
                           std::to_string(i));
      }
    }
  }
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k].assign(params[k]->size(), 0.0);
      v_[k].assign(params[k]->size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw ArgumentError("optimizer parameter list changed");
  ++step_count_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));

  for (std::size_t k = 0; k < params.size(); ++k) {
    ParamTensor& p = *params[k];
    const bool is_frozen = std::find(frozen.begin(), frozen.end(), p.name) != frozen.end();
    if (!is_frozen) {
      if (config_.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < p.size(); ++i) p.values[i] -= config_.lr * p.grad[i];
      } else {
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
          const double g = p.grad[i];
          m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
          v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
          if (m[i] == 0.0) continue;
          const double mhat = m[i] / bc1;
          const double vhat = v[i] / bc2;
          p.values[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
      }
    }
    p.zero_grad();
  }
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-12, std::abs(analytic) + std::abs(numeric));
}

GradcheckReport gradcheck(const LossFn& loss, std::span<ParamTensor* const> params,
                          const GradcheckOptions& options) {
  for (ParamTensor* p : params) p->zero_grad();
  const LossProbe base = loss(true);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (ParamTensor* p : params) {
    analytic.push_back(p->grad);
    p->zero_grad();
  }

  GradcheckReport report;
  Rng rng(options.seed);
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParamTensor& p = *params[k];
    GradcheckTensorReport tr;
    tr.name = p.name;
    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.samples_per_tensor != 0 && options.samples_per_tensor < coords.size()) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(options.samples_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t idx : coords) {
      const double saved = p.values[idx];
      const double x_plus = saved + options.epsilon;
      const double x_minus = saved - options.epsilon;
      p.values[idx] = x_plus;
      const LossProbe plus = loss(false);
      p.values[idx] = x_minus;
      const LossProbe minus = loss(false);
      p.values[idx] = saved;
      if (plus.branches != base.branches || minus.branches != base.branches) {
        ++tr.kinks;
        continue;
      }
      double diff = plus.value - minus.value;
      if (!plus.terms.empty() && plus.terms.size() == minus.terms.size()) {
        diff = 0.0;
        for (std::size_t i = 0; i < plus.terms.size(); ++i) diff += plus.terms[i] - minus.terms[i];
      }
      const double numeric = diff / (x_plus - x_minus);
      const double err = relative_error(analytic[k][idx], numeric);
      ++tr.checked;
      if (err > tr.max_rel_error) {
        tr.max_rel_error = err;
        tr.worst_index = idx;
      }
    }
    report.checked += tr.checked;
    report.kinks += tr.kinks;
    report.max_rel_error = std::max(report.max_rel_error, tr.max_rel_error);
    report.tensors.push_back(tr);
  }
  return report;
}

}  // namespace filt

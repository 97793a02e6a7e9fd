#include "filt/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "filt/types.hpp"

namespace filt {

namespace {

[[noreturn]] void shape_fail(const char* op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

// ---------------------------------------------------------------------------
// ParamTensor

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

ParamTensor::ParamTensor(std::string n, std::vector<std::size_t> s)
    : name(std::move(n)), shape(std::move(s)), values(shape_size(shape), 0.0),
      grad(shape_size(shape), 0.0) {}

std::size_t ParamTensor::row_size() const {
  if (shape.empty()) return 0;
  if (shape.size() == 1) return 1;
  return values.size() / shape.front();
}

std::span<double> ParamTensor::row(std::size_t r) {
  const std::size_t n = row_size();
  return std::span<double>(values).subspan(r * n, n);
}

std::span<const double> ParamTensor::row(std::size_t r) const {
  const std::size_t n = row_size();
  return std::span<const double>(values).subspan(r * n, n);
}

void ParamTensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

// ---------------------------------------------------------------------------
// Tape

Var Tape::push(std::vector<double> value, std::size_t rows, std::size_t cols,
               BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), {}, rows, cols, std::move(backward)});
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw ArgumentError("var does not belong to this tape");
  return nodes_[v.id];
}

Var Tape::constant(std::vector<double> values, std::size_t rows, std::size_t cols) {
  if (rows * cols != values.size()) shape_fail("constant", "size mismatch");
  return push(std::move(values), rows, cols, nullptr);
}

Var Tape::constant(std::vector<double> values) {
  const std::size_t n = values.size();
  return constant(std::move(values), n, 1);
}

Var Tape::param(ParamTensor& p) {
  const auto key = std::make_pair(static_cast<const ParamTensor*>(&p), static_cast<std::size_t>(-1));
  if (auto it = leaf_cache_.find(key); it != leaf_cache_.end()) return it->second;
  const std::size_t rows = p.shape.size() == 1 ? p.size() : p.rows();
  const std::size_t cols = p.shape.size() == 1 ? 1 : p.row_size();
  ParamTensor* target = &p;
  Var v = push(p.values, rows, cols, [target](Tape& t, std::size_t self) {
    const auto g = t.grad_of(self);
    for (std::size_t i = 0; i < g.size(); ++i) target->grad[i] += g[i];
  });
  leaf_cache_.emplace(key, v);
  return v;
}

Var Tape::param_row(ParamTensor& p, std::size_t row) {
  if (row >= p.rows()) {
    throw ArgumentError(p.name + ": row " + std::to_string(row) + " out of range " +
                        std::to_string(p.rows()));
  }
  const auto key = std::make_pair(static_cast<const ParamTensor*>(&p), row);
  if (auto it = leaf_cache_.find(key); it != leaf_cache_.end()) return it->second;
  const std::size_t n = p.row_size();
  auto src = p.row(row);
  ParamTensor* target = &p;
  Var v = push(std::vector<double>(src.begin(), src.end()), n, 1,
               [target, row, n](Tape& t, std::size_t self) {
                 const auto g = t.grad_of(self);
                 double* dst = target->grad.data() + row * n;
                 for (std::size_t i = 0; i < n; ++i) dst[i] += g[i];
               });
  leaf_cache_.emplace(key, v);
  return v;
}

Var Tape::param_row_matrix(ParamTensor& p, std::size_t row, std::size_t rows, std::size_t cols) {
  if (rows * cols != p.row_size()) shape_fail("param_row_matrix", p.name + " row size mismatch");
  Var v = param_row(p, row);
  nodes_[v.id].rows = rows;
  nodes_[v.id].cols = cols;
  return v;
}

std::span<const double> Tape::value(Var v) const { return node(v).value; }

double Tape::scalar_value(Var v) const {
  const auto& n = node(v);
  if (n.value.size() != 1) shape_fail("scalar_value", "not a scalar: " + dims(n.rows, n.cols));
  return n.value[0];
}

std::span<double> Tape::grad(Var v) {
  if (!v.valid() || v.id >= nodes_.size()) throw ArgumentError("var does not belong to this tape");
  return nodes_[v.id].grad;
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw ArgumentError("backward called on an empty tape");
  if (!loss.valid() || loss.id >= nodes_.size()) throw ArgumentError("backward: unknown loss var");
  if (nodes_[loss.id].value.size() != 1) throw ShapeError("backward: loss must be a scalar");
  if (backward_done_) throw ArgumentError("backward already ran on this tape");
  backward_done_ = true;
  for (auto& n : nodes_) n.grad.assign(n.value.size(), 0.0);
  nodes_[loss.id].grad[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, i);
  }
}

// ---------------------------------------------------------------------------
// Ops

Var linear(Tape& t, Var w, Var x) {
  const std::size_t m = t.rows(w);
  const std::size_t n = t.cols(w);
  if (t.size(x) != n) {
    shape_fail("linear", "W " + dims(m, n) + " vs x " + dims(t.rows(x), t.cols(x)));
  }
  const auto wv = t.value(w);
  const auto xv = t.value(x);
  std::vector<double> y(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* wr = wv.data() + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += wr[j] * xv[j];
    y[i] = acc;
  }
  return t.push(std::move(y), m, 1, [w = w.id, x = x.id, m, n](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    const auto wv = t.value_of(w);
    const auto xv = t.value_of(x);
    auto gw = t.grad_of(w);
    auto gx = t.grad_of(x);
    for (std::size_t i = 0; i < m; ++i) {
      const double g = gy[i];
      if (g == 0.0) continue;
      const double* wr = wv.data() + i * n;
      double* gwr = gw.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        gwr[j] += g * xv[j];
        gx[j] += g * wr[j];
      }
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  if (t.size(a) != t.size(b)) {
    shape_fail("add", std::to_string(t.size(a)) + " vs " + std::to_string(t.size(b)));
  }
  const auto av = t.value(a);
  const auto bv = t.value(b);
  std::vector<double> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  return t.push(std::move(y), t.rows(a), t.cols(a), [a = a.id, b = b.id](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    auto ga = t.grad_of(a);
    auto gb = t.grad_of(b);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      ga[i] += gy[i];
      gb[i] += gy[i];
    }
  });
}

Var scale(Tape& t, Var s, Var x) {
  if (t.size(s) != 1) shape_fail("scale", "scale factor is not a scalar");
  const double sv = t.value(s)[0];
  const auto xv = t.value(x);
  std::vector<double> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = sv * xv[i];
  return t.push(std::move(y), t.rows(x), t.cols(x), [s = s.id, x = x.id](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    const auto xv = t.value_of(x);
    const double sv = t.value_of(s)[0];
    auto gx = t.grad_of(x);
    double gs = 0.0;
    for (std::size_t i = 0; i < gy.size(); ++i) {
      gs += gy[i] * xv[i];
      gx[i] += gy[i] * sv;
    }
    t.grad_of(s)[0] += gs;
  });
}

Var scale(Tape& t, double s, Var x) {
  const auto xv = t.value(x);
  std::vector<double> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = s * xv[i];
  return t.push(std::move(y), t.rows(x), t.cols(x), [s, x = x.id](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    auto gx = t.grad_of(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += s * gy[i];
  });
}

Var concat(Tape& t, Var a, Var b) {
  const auto av = t.value(a);
  const auto bv = t.value(b);
  std::vector<double> y;
  y.reserve(av.size() + bv.size());
  y.insert(y.end(), av.begin(), av.end());
  y.insert(y.end(), bv.begin(), bv.end());
  const std::size_t na = av.size();
  const std::size_t n = y.size();
  return t.push(std::move(y), n, 1, [a = a.id, b = b.id, na](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    auto ga = t.grad_of(a);
    auto gb = t.grad_of(b);
    for (std::size_t i = 0; i < na; ++i) ga[i] += gy[i];
    for (std::size_t i = na; i < gy.size(); ++i) gb[i - na] += gy[i];
  });
}

Var weighted_sum(Tape& t, Var weights, std::span<const Var> vectors) {
  if (vectors.empty()) shape_fail("weighted_sum", "no vectors");
  if (t.size(weights) != vectors.size()) {
    shape_fail("weighted_sum", std::to_string(t.size(weights)) + " weights for " +
                                   std::to_string(vectors.size()) + " vectors");
  }
  const std::size_t n = t.size(vectors[0]);
  const auto wv = t.value(weights);
  std::vector<double> y(n, 0.0);
  std::vector<std::size_t> ids;
  ids.reserve(vectors.size());
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (t.size(vectors[k]) != n) {
      shape_fail("weighted_sum", "vector " + std::to_string(k) + " has size " +
                                     std::to_string(t.size(vectors[k])) + ", expected " +
                                     std::to_string(n));
    }
    const auto v = t.value(vectors[k]);
    for (std::size_t i = 0; i < n; ++i) y[i] += wv[k] * v[i];
    ids.push_back(vectors[k].id);
  }
  return t.push(std::move(y), n, 1,
                [w = weights.id, ids = std::move(ids)](Tape& t, std::size_t self) {
                  const auto gy = t.grad_of(self);
                  const auto wv = t.value_of(w);
                  auto gw = t.grad_of(w);
                  for (std::size_t k = 0; k < ids.size(); ++k) {
                    const auto v = t.value_of(ids[k]);
                    auto gv = t.grad_of(ids[k]);
                    double acc = 0.0;
                    for (std::size_t i = 0; i < gy.size(); ++i) {
                      acc += gy[i] * v[i];
                      gv[i] += wv[k] * gy[i];
                    }
                    gw[k] += acc;
                  }
                });
}

Var mean(Tape& t, std::span<const Var> vectors) {
  if (vectors.empty()) shape_fail("mean", "no vectors");
  const double w = 1.0 / static_cast<double>(vectors.size());
  Var weights = t.constant(std::vector<double>(vectors.size(), w));
  return weighted_sum(t, weights, vectors);
}

Var softmax(Tape& t, Var logits) {
  const auto z = t.value(logits);
  if (z.empty()) shape_fail("softmax", "empty input");
  const double mx = *std::max_element(z.begin(), z.end());
  std::vector<double> y(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    y[i] = std::exp(z[i] - mx);
    total += y[i];
  }
  for (double& v : y) v /= total;
  const std::size_t n = y.size();
  return t.push(std::move(y), n, 1, [z = logits.id](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    const auto y = t.value_of(self);
    auto gz = t.grad_of(z);
    double inner = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) inner += gy[i] * y[i];
    for (std::size_t i = 0; i < y.size(); ++i) gz[i] += y[i] * (gy[i] - inner);
  });
}

Var leaky_relu(Tape& t, Var x, double slope) {
  const auto xv = t.value(x);
  std::vector<double> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool pos = xv[i] > 0.0;
    t.record_branch(pos);
    y[i] = pos ? xv[i] : slope * xv[i];
  }
  return t.push(std::move(y), t.rows(x), t.cols(x), [x = x.id, slope](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    const auto xv = t.value_of(x);
    auto gx = t.grad_of(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += xv[i] > 0.0 ? gy[i] : slope * gy[i];
  });
}

Var relu(Tape& t, Var x) { return leaky_relu(t, x, 0.0); }

Var tanh(Tape& t, Var x) {
  const auto xv = t.value(x);
  std::vector<double> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(xv[i]);
  return t.push(std::move(y), t.rows(x), t.cols(x), [x = x.id](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    const auto y = t.value_of(self);
    auto gx = t.grad_of(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * (1.0 - y[i] * y[i]);
  });
}

Var dropout(Tape& t, Var x, double p, bool train, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ArgumentError("dropout rate must lie in [0, 1)");
  if (!train || p == 0.0) return x;
  const auto xv = t.value(x);
  std::vector<double> mask(xv.size());
  std::vector<double> y(xv.size());
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < y.size(); ++i) {
    mask[i] = rng.uniform01() < p ? 0.0 : keep_scale;
    y[i] = xv[i] * mask[i];
  }
  return t.push(std::move(y), t.rows(x), t.cols(x),
                [x = x.id, mask = std::move(mask)](Tape& t, std::size_t self) {
                  const auto gy = t.grad_of(self);
                  auto gx = t.grad_of(x);
                  for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * mask[i];
                });
}

Var dot(Tape& t, Var a, Var b) {
  if (t.size(a) != t.size(b)) {
    shape_fail("dot", std::to_string(t.size(a)) + " vs " + std::to_string(t.size(b)));
  }
  const auto av = t.value(a);
  const auto bv = t.value(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return t.push({acc}, 1, 1, [a = a.id, b = b.id](Tape& t, std::size_t self) {
    const double g = t.grad_of(self)[0];
    const auto av = t.value_of(a);
    const auto bv = t.value_of(b);
    auto ga = t.grad_of(a);
    auto gb = t.grad_of(b);
    for (std::size_t i = 0; i < av.size(); ++i) {
      ga[i] += g * bv[i];
      gb[i] += g * av[i];
    }
  });
}

Var stack(Tape& t, std::span<const Var> scalars) {
  std::vector<double> y;
  std::vector<std::size_t> ids;
  y.reserve(scalars.size());
  for (Var s : scalars) {
    y.push_back(t.scalar_value(s));
    ids.push_back(s.id);
  }
  const std::size_t n = y.size();
  return t.push(std::move(y), n, 1, [ids = std::move(ids)](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    for (std::size_t k = 0; k < ids.size(); ++k) t.grad_of(ids[k])[0] += gy[k];
  });
}

Var sum(Tape& t, std::span<const Var> scalars) {
  double acc = 0.0;
  std::vector<std::size_t> ids;
  ids.reserve(scalars.size());
  for (Var s : scalars) {
    acc += t.scalar_value(s);
    ids.push_back(s.id);
  }
  return t.push({acc}, 1, 1, [ids = std::move(ids)](Tape& t, std::size_t self) {
    const double g = t.grad_of(self)[0];
    for (std::size_t id : ids) t.grad_of(id)[0] += g;
  });
}

Var hinge(Tape& t, double margin, Var pos, Var neg) {
  const double z = margin - t.scalar_value(pos) + t.scalar_value(neg);
  const bool active = z > 0.0;
  t.record_branch(active);
  return t.push({active ? z : 0.0}, 1, 1,
                [pos = pos.id, neg = neg.id, active](Tape& t, std::size_t self) {
                  if (!active) return;
                  const double g = t.grad_of(self)[0];
                  t.grad_of(pos)[0] -= g;
                  t.grad_of(neg)[0] += g;
                });
}

double complex_score_value(std::span<const double> s, std::span<const double> r,
                           std::span<const double> o) {
  const std::size_t h = s.size() / 2;
  double acc = 0.0;
  for (std::size_t k = 0; k < h; ++k) {
    const double sr = s[k], si = s[k + h];
    const double rr = r[k], ri = r[k + h];
    const double orl = o[k], oi = o[k + h];
    acc += (sr * rr - si * ri) * orl + (sr * ri + si * rr) * oi;
  }
  return acc;
}

Var complex_score(Tape& t, Var s, Var r, Var o) {
  const std::size_t d = t.size(s);
  if (t.size(r) != d || t.size(o) != d) {
    shape_fail("complex_score", std::to_string(d) + ", " + std::to_string(t.size(r)) + ", " +
                                    std::to_string(t.size(o)));
  }
  if (d % 2 != 0) shape_fail("complex_score", "odd dimension " + std::to_string(d));
  const double score = complex_score_value(t.value(s), t.value(r), t.value(o));
  return t.push({score}, 1, 1, [s = s.id, r = r.id, o = o.id](Tape& t, std::size_t self) {
    const double g = t.grad_of(self)[0];
    const auto sv = t.value_of(s);
    const auto rv = t.value_of(r);
    const auto ov = t.value_of(o);
    auto gs = t.grad_of(s);
    auto gr = t.grad_of(r);
    auto go = t.grad_of(o);
    const std::size_t h = sv.size() / 2;
    for (std::size_t k = 0; k < h; ++k) {
      const double sr = sv[k], si = sv[k + h];
      const double rr = rv[k], ri = rv[k + h];
      const double orl = ov[k], oi = ov[k + h];
      gs[k] += g * (rr * orl + ri * oi);
      gs[k + h] += g * (rr * oi - ri * orl);
      gr[k] += g * (sr * orl + si * oi);
      gr[k + h] += g * (sr * oi - si * orl);
      go[k] += g * (sr * rr - si * ri);
      go[k + h] += g * (sr * ri + si * rr);
    }
  });
}

Var time2vec(Tape& t, Var omega, Var phase, double time) {
  const std::size_t n = t.size(omega);
  if (t.size(phase) != n || n == 0) shape_fail("time2vec", "frequency/phase size mismatch");
  const auto w = t.value(omega);
  const auto p = t.value(phase);
  std::vector<double> y(n);
  y[0] = w[0] * time + p[0];
  for (std::size_t j = 1; j < n; ++j) y[j] = std::sin(w[j] * time + p[j]);
  return t.push(std::move(y), n, 1, [omega = omega.id, phase = phase.id, time](Tape& t, std::size_t self) {
    const auto gy = t.grad_of(self);
    const auto w = t.value_of(omega);
    const auto p = t.value_of(phase);
    auto gw = t.grad_of(omega);
    auto gp = t.grad_of(phase);
    gw[0] += gy[0] * time;
    gp[0] += gy[0];
    for (std::size_t j = 1; j < gy.size(); ++j) {
      const double c = std::cos(w[j] * time + p[j]) * gy[j];
      gw[j] += c * time;
      gp[j] += c;
    }
  });
}

Var functional_time(Tape& t, Var omega, Var phase, double time) {
  const std::size_t n = t.size(omega);
  if (t.size(phase) != n || n == 0) shape_fail("functional_time", "frequency/phase size mismatch");
  const auto w = t.value(omega);
  const auto p = t.value(phase);
  const double norm = std::sqrt(1.0 / static_cast<double>(n));
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = norm * std::cos(w[j] * time + p[j]);
  return t.push(std::move(y), n, 1,
                [omega = omega.id, phase = phase.id, time, norm](Tape& t, std::size_t self) {
                  const auto gy = t.grad_of(self);
                  const auto w = t.value_of(omega);
                  const auto p = t.value_of(phase);
                  auto gw = t.grad_of(omega);
                  auto gp = t.grad_of(phase);
                  for (std::size_t j = 0; j < gy.size(); ++j) {
                    const double s = -norm * std::sin(w[j] * time + p[j]) * gy[j];
                    gw[j] += s * time;
                    gp[j] += s;
                  }
                });
}

}  // namespace filt

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "osod/common.hpp"

namespace osod {

// Max-subtracted softmax; valid probability vector for any finite logits.
inline std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw validation_error("softmax of empty logit vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

// -sum_c q_c log p_c. Soft targets allowed; q_c > 0 with p_c = 0 yields an
// explicit +inf instead of a NaN.
inline double soft_cross_entropy(const std::vector<double>& p,
                                 const std::vector<double>& q) {
  if (p.size() != q.size()) {
    throw validation_error("cross entropy: p and q have different lengths");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) continue;
    if (p[i] <= 0.0) return std::numeric_limits<double>::infinity();
    loss -= q[i] * std::log(p[i]);
  }
  return loss;
}

inline double smooth_l1_scalar(double d, double beta) {
  const double ad = std::abs(d);
  if (ad < beta) return 0.5 * d * d / beta;
  return ad - 0.5 * beta;
}

// Per-coordinate smooth-L1 summed over the 4 box coordinates.
inline double smooth_l1(const std::array<double, 4>& predicted,
                        const std::array<double, 4>& target, double beta = 1.0) {
  if (beta <= 0.0) throw validation_error("smooth_l1: beta must be positive");
  double loss = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    loss += smooth_l1_scalar(predicted[i] - target[i], beta);
  }
  return loss;
}

// Unweighted multi-task aggregation; per-term weights stay configurable
// at the call site by pre-scaling.
inline double total_loss(double l_rpn, double l_reg, double l_cls) {
  return l_rpn + l_reg + l_cls;
}

// w(p) = (1-p)^alpha * p. alpha = 0 degenerates to the identity.
inline double weight_fn(double p, double alpha) {
  if (p < 0.0 || p > 1.0) throw validation_error("weight_fn: p outside [0,1]");
  if (alpha < 0.0) throw validation_error("weight_fn: alpha must be >= 0");
  return std::pow(1.0 - p, alpha) * p;
}

inline double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

// Entropy-threshold unknown flagging (natural log; 0*log 0 := 0).
inline bool entropy_unknown_flag(const std::vector<double>& p,
                                 double threshold = 0.25) {
  return shannon_entropy(p) > threshold;
}

// --- derivative plumbing -------------------------------------------------

// d/do_i of soft_cross_entropy(softmax(o), q) = softmax(o)_i - q_i
// whenever q sums to 1.
inline std::vector<double> softmax_xent_gradient(const std::vector<double>& logits,
                                                 const std::vector<double>& q) {
  std::vector<double> g = softmax(logits);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= q[i];
  return g;
}

inline double smooth_l1_scalar_gradient(double d, double beta) {
  if (std::abs(d) < beta) return d / beta;
  return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
}

inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h) {
  if (h <= 0.0) throw validation_error("finite differences need h > 0");
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Max relative error between an analytic gradient and central differences.
// Denominator floor avoids blowups where both gradients vanish.
inline double grad_check(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& analytic, const std::vector<double>& x, double h) {
  const std::vector<double> numeric = finite_difference_gradient(f, x, h);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace osod

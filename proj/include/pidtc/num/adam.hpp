#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pidtc/num/tensor.hpp"

namespace pidtc::num {

// Per-tensor Adam state; first/second moments grow on first use.
struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;
};

// One bias-corrected Adam update, in place.
inline void adam_step(std::vector<double>& w, const std::vector<double>& g, AdamState& s) {
  if (w.size() != g.size()) {
    throw DimensionError("adam_step: weight/gradient size mismatch (" + std::to_string(w.size()) +
                         " vs " + std::to_string(g.size()) + ")");
  }
  if (s.m.empty()) {
    s.m.assign(w.size(), 0.0);
    s.v.assign(w.size(), 0.0);
  } else if (s.m.size() != w.size()) {
    throw ContractError("adam_step: state sized for " + std::to_string(s.m.size()) +
                        " weights, got " + std::to_string(w.size()));
  }
  s.t += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < w.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = s.m[i] / bc1;
    const double vhat = s.v[i] / bc2;
    w[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

// Convenience wrapper owning one AdamState per parameter tensor.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Tensor> params, double lr) : params_(std::move(params)) {
    states_.resize(params_.size());
    for (auto& s : states_) s.lr = lr;
  }

  void zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
  }

  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      adam_step(params_[i].values(), params_[i].grad(), states_[i]);
    }
  }

 private:
  std::vector<Tensor> params_;
  std::vector<AdamState> states_;
};

}  // namespace pidtc::num

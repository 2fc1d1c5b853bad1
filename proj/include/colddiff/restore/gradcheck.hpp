#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "colddiff/core/rng.hpp"
#include "colddiff/restore/conv_restorer.hpp"
#include "colddiff/restore/loss.hpp"

namespace colddiff {

struct GradCheckReport {
  double max_rel_error{0.0};
  std::size_t worst_index{0};
  std::size_t checked{0};
};

template <class S>
double model_loss(const ConvRestorer<S>& m, const nn::Tensor<S>& x, std::span<const int> t, const nn::Tensor<S>& target,
                  LossKind kind, std::vector<S>* grad = nullptr) {
  typename ConvRestorer<S>::Cache cache;
  auto y = m.forward(x, t, grad ? &cache : nullptr);
  nn::Tensor<S> dy;
  const double loss = loss_and_grad(y, target, kind, grad ? &dy : nullptr);
  if (grad) *grad = m.backward(cache, dy);
  return loss;
}

/// Analytic gradients of the Huber-smoothed l1 loss against central differences with
/// step h * max(1, |theta_i|). The relative error uses max(|a| + |n|, floor) as denominator.
template <class S>
GradCheckReport gradient_check(ConvRestorer<S> m, const nn::Tensor<S>& x, std::span<const int> t,
                               const nn::Tensor<S>& target, double h = 1e-4, double floor = 1e-6) {
  std::vector<S> analytic;
  model_loss(m, x, t, target, LossKind::huber, &analytic);
  GradCheckReport rep;
  auto& p = m.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const S orig = p[i];
    const S step = static_cast<S>(h * std::max(1.0, std::abs(static_cast<double>(orig))));
    p[i] = orig + step;
    const double up = model_loss(m, x, t, target, LossKind::huber);
    p[i] = orig - step;
    const double down = model_loss(m, x, t, target, LossKind::huber);
    p[i] = orig;
    const double numeric = (up - down) / (2.0 * static_cast<double>(step));
    const double a = static_cast<double>(analytic[i]);
    const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), floor);
    if (rel > rep.max_rel_error) {
      rep.max_rel_error = rel;
      rep.worst_index = i;
    }
    ++rep.checked;
  }
  return rep;
}

/// Probe targets pred + margin * sign with random signs, so no residual sits near the l1 kink.
template <class S>
nn::Tensor<S> margin_targets(const ConvRestorer<S>& m, const nn::Tensor<S>& x, std::span<const int> t, double margin,
                             RngStream rng) {
  auto y = m.forward(x, t);
  for (auto& v : y.data) v += static_cast<S>(rng.uniform() < 0.5 ? -margin : margin);
  return y;
}

}  // namespace colddiff

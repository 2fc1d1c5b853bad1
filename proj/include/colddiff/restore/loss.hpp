#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/restore/tensor.hpp"

namespace colddiff {

enum class LossKind { l1, huber };

inline constexpr double kHuberDelta = 1e-8;

/// Mean absolute deviation over every element of the batch.
inline double l1_loss(std::span<const Image> pred, std::span<const Image> target) {
  if (pred.size() != target.size()) throw std::invalid_argument("l1_loss: batch sizes differ");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    Image::require_same_shape(pred[i], target[i], "l1_loss");
    const auto a = pred[i].data();
    const auto b = target[i].data();
    for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(a[k] - b[k]);
    count += a.size();
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

inline double l1_loss(const Image& pred, const Image& target) {
  return l1_loss(std::span<const Image>(&pred, 1), std::span<const Image>(&target, 1));
}

/// Loss and its gradient with respect to pred. l1 uses subgradient 0 at exact zeros;
/// huber is 0.5 r^2 / delta inside |r| <= delta.
template <class S>
double loss_and_grad(const nn::Tensor<S>& pred, const nn::Tensor<S>& target, LossKind kind, nn::Tensor<S>* grad) {
  if (pred.data.size() != target.data.size()) throw std::invalid_argument("loss_and_grad: shape mismatch");
  const std::size_t n = pred.data.size();
  if (grad) *grad = nn::Tensor<S>(pred.c, pred.n, pred.h, pred.w);
  const double inv = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = static_cast<double>(pred.data[k]) - static_cast<double>(target.data[k]);
    const double a = std::abs(r);
    double g;
    if (kind == LossKind::huber && a <= kHuberDelta) {
      sum += 0.5 * r * r / kHuberDelta;
      g = r / kHuberDelta;
    } else {
      sum += kind == LossKind::huber ? a - 0.5 * kHuberDelta : a;
      g = r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0);
    }
    if (grad) grad->data[k] = static_cast<S>(g * inv);
  }
  return sum * inv;
}

}  // namespace colddiff

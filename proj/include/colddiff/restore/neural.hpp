#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "colddiff/core/errors.hpp"
#include "colddiff/restore/checkpoint.hpp"
#include "colddiff/restore/conv_restorer.hpp"
#include "colddiff/restore/restorer.hpp"

namespace colddiff {

/// Frozen ConvRestorer behind the Restorer contract. Safe to call from several threads.
class NeuralRestorer final : public Restorer {
 public:
  NeuralRestorer(ConvRestorer<float> net, int steps, std::size_t chunk = 64)
      : net_{std::move(net)}, steps_{steps}, chunk_{std::max<std::size_t>(1, chunk)} {}

  static NeuralRestorer from_checkpoint(const Checkpoint& ck, int steps, bool use_ema = true) {
    return NeuralRestorer(ConvRestorer<float>(ck.arch, use_ema ? ck.ema : ck.live), steps);
  }

  std::string family() const override { return "conv " + net_.architecture().descriptor(); }
  std::size_t parameter_count() const override { return net_.parameter_count(); }
  int steps() const override { return steps_; }
  const ConvRestorer<float>& network() const { return net_; }

  std::vector<Image> restore_batch(std::span<const Image> xs, std::span<const int> ts) const override {
    if (xs.size() != ts.size()) throw std::invalid_argument("restore_batch: one step per image required");
    for (int t : ts) {
      if (t < 0 || t > steps_) throw std::out_of_range("restore: step " + std::to_string(t) + " outside [0, " + std::to_string(steps_) + "]");
    }
    std::vector<Image> out;
    out.reserve(xs.size());
    for (std::size_t start = 0; start < xs.size(); start += chunk_) {
      const std::size_t n = std::min(chunk_, xs.size() - start);
      auto y = net_.forward(nn::to_tensor<float>(xs.subspan(start, n)), ts.subspan(start, n));
      for (std::size_t b = 0; b < n; ++b) {
        out.push_back(nn::image_from_tensor(y, static_cast<int>(b)));
        if (!all_finite(out.back())) throw NumericalError("NeuralRestorer: non-finite output at step " + std::to_string(ts[start + b]));
      }
    }
    return out;
  }

 protected:
  Image restore_impl(const Image& x, int t) const override {
    return restore_batch(std::span<const Image>(&x, 1), std::span<const int>(&t, 1)).front();
  }

 private:
  ConvRestorer<float> net_;
  int steps_;
  std::size_t chunk_;
};

}  // namespace colddiff

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/errors.hpp"
#include "colddiff/core/image.hpp"
#include "colddiff/core/log.hpp"
#include "colddiff/core/parallel.hpp"
#include "colddiff/core/rng.hpp"
#include "colddiff/data/augment.hpp"
#include "colddiff/degrade/degradation.hpp"
#include "colddiff/restore/conv_restorer.hpp"
#include "colddiff/restore/loss.hpp"

namespace colddiff {

/// Shadow weights: shadow = decay * shadow + (1 - decay) * live every `period` steps.
template <class S>
struct EmaState {
  std::vector<S> shadow;
  double decay{0.995};
  int period{10};

  EmaState() = default;
  EmaState(std::vector<S> init, double d, int p) : shadow{std::move(init)}, decay{d}, period{p} {
    if (!(decay >= 0.0 && decay <= 1.0)) throw std::invalid_argument("EmaState: decay must lie in [0, 1]");
    if (period < 1) throw std::invalid_argument("EmaState: period must be >= 1");
  }

  void update(const std::vector<S>& live) {
    if (live.size() != shadow.size()) throw std::invalid_argument("EmaState: size mismatch");
    const S d = static_cast<S>(decay);
    const S e = static_cast<S>(1.0 - decay);
    for (std::size_t i = 0; i < shadow.size(); ++i) shadow[i] = d * shadow[i] + e * live[i];
  }
};

template <class S>
class Adam {
 public:
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_{lr}, b1_{beta1}, b2_{beta2}, eps_{eps}, m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<S>& params, const std::vector<S>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = static_cast<double>(grad[i]);
      m_[i] = b1_ * m_[i] + (1.0 - b1_) * g;
      v_[i] = b2_ * v_[i] + (1.0 - b2_) * g * g;
      params[i] -= static_cast<S>(lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_));
    }
  }

  long long updates() const { return t_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, b1_, b2_, eps_;
  long long t_{0};
  std::vector<double> m_, v_;
};

struct TrainHyper {
  long long steps{4000};
  int batch{32};
  double lr{1e-3};
  int accumulate{2};
  double ema_decay{0.995};
  int ema_every{10};
  double beta1{0.9};
  double beta2{0.999};
  long long warmup{0};  // linear learning-rate ramp over the first steps
  bool cosine{false};   // after warmup, anneal the learning rate to zero along a half cosine
  Augment augment{};

  /// Full-scale schedule: Adam at 2e-5, batch 32 (64 for inpainting),
  /// accumulation 2, EMA 0.995 every 10 steps.
  static TrainHyper full_scale(Family f) {
    TrainHyper h;
    h.lr = 2e-5;
    h.batch = f == Family::mask ? 64 : 32;
    h.steps = f == Family::mask ? 60000 : 700000;
    return h;
  }

  void validate() const {
    if (steps < 0) throw std::invalid_argument("TrainHyper: steps must be >= 0");
    if (batch < 1) throw std::invalid_argument("TrainHyper: batch must be >= 1");
    if (accumulate < 1) throw std::invalid_argument("TrainHyper: accumulate must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainHyper: lr must be positive");
    if (warmup < 0) throw std::invalid_argument("TrainHyper: warmup must be >= 0");
  }
};

/// Learning rate used for optimizer step `step` (1-based).
inline double learning_rate(const TrainHyper& h, long long step) {
  if (h.warmup > 0 && step < h.warmup) return h.lr * static_cast<double>(step) / static_cast<double>(h.warmup);
  if (!h.cosine || h.steps <= h.warmup) return h.lr;
  const double progress = static_cast<double>(step - h.warmup) / static_cast<double>(h.steps - h.warmup);
  return 0.5 * h.lr * (1.0 + std::cos(std::numbers::pi * progress));
}

struct TrainResult {
  ConvRestorer<float> live;
  EmaState<float> ema;
  std::vector<double> losses;  // one per optimizer step
  long long steps{0};
};

/// Means of consecutive non-overlapping windows of the loss curve.
inline std::vector<double> window_means(std::span<const double> losses, std::size_t window) {
  std::vector<double> out;
  if (window == 0) return out;
  for (std::size_t start = 0; start + window <= losses.size(); start += window) {
    double s = 0.0;
    for (std::size_t i = start; i < start + window; ++i) s += losses[i];
    out.push_back(s / static_cast<double>(window));
  }
  return out;
}

/// One training batch: D(x, t) with t ~ U{1..T}, targets x.
struct TrainBatch {
  nn::Tensor<float> input;
  nn::Tensor<float> target;
  std::vector<int> steps;
};

inline TrainBatch draw_batch(std::span<const Image> data, const std::shared_ptr<const DegradationSpec>& spec,
                             const Degradation* shared, int batch, RngStream rng, const Augment& aug = {}) {
  const int T = spec->steps();
  std::vector<std::size_t> idx(static_cast<std::size_t>(batch));
  std::vector<int> ts(static_cast<std::size_t>(batch));
  std::vector<RngStream> streams;
  streams.reserve(static_cast<std::size_t>(batch));
  for (int i = 0; i < batch; ++i) {
    idx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(rng.uniform_int(data.size()));
    ts[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(T)));
    streams.push_back(rng.split(static_cast<std::uint64_t>(i)));
  }
  std::vector<Image> degraded(static_cast<std::size_t>(batch));
  std::vector<Image> clean(static_cast<std::size_t>(batch));
  parallel_for(static_cast<std::size_t>(batch), [&](std::size_t i) {
    if (aug.enabled()) {
      RngStream ra = streams[i].split(7);
      clean[i] = augment(data[idx[i]], aug, ra);
    } else {
      clean[i] = data[idx[i]];
    }
    const Image& x = clean[i];
    if (shared) {
      degraded[i] = shared->apply(x, ts[i]);
    } else {
      Degradation d(spec, x.shape(), streams[i]);
      degraded[i] = d.apply(x, ts[i]);
    }
  });
  return {nn::to_tensor<float>(degraded), nn::to_tensor<float>(clean), std::move(ts)};
}

using TrainCallback = std::function<void(long long step, double loss)>;

/// Minimizes E ||R(D(x, t), t) - x||_1 with Adam. Each step averages the gradients of
/// `accumulate` minibatches into one optimizer update; the EMA is refreshed every
/// `ema_every` steps. The loss curve holds the mean minibatch loss of every step.
inline TrainResult train_restorer(std::span<const Image> data, std::shared_ptr<const DegradationSpec> spec,
                                  const Architecture& arch, const TrainHyper& hyper, RngStream rng,
                                  const TrainCallback& on_step = {}) {
  if (data.empty()) throw std::invalid_argument("train_restorer: empty dataset");
  if (!spec) throw std::invalid_argument("train_restorer: null spec");
  hyper.validate();
  const Shape shape = data[0].shape();
  for (const Image& x : data) {
    if (x.shape() != shape) throw std::invalid_argument("train_restorer: dataset images differ in shape");
  }
  if (shape.channels != arch.channels) throw std::invalid_argument("train_restorer: channel count differs from architecture");

  RngStream init_rng = rng.split(0);
  RngStream batch_rng = rng.split(1);
  TrainResult res{ConvRestorer<float>(arch, init_rng), {}, {}, 0};
  res.ema = EmaState<float>(res.live.params(), hyper.ema_decay, hyper.ema_every);
  res.losses.reserve(static_cast<std::size_t>(hyper.steps));

  std::unique_ptr<Degradation> shared;
  if (!spec->randomized()) shared = std::make_unique<Degradation>(spec, shape, rng.split(2));

  Adam<float> opt(res.live.parameter_count(), hyper.lr, hyper.beta1, hyper.beta2);
  std::vector<float> acc(res.live.parameter_count(), 0.0f);
  typename ConvRestorer<float>::Cache cache;
  for (long long step = 1; step <= hyper.steps; ++step) {
    std::fill(acc.begin(), acc.end(), 0.0f);
    double loss = 0.0;
    for (int micro = 0; micro < hyper.accumulate; ++micro) {
      const auto id = static_cast<std::uint64_t>(step) * static_cast<std::uint64_t>(hyper.accumulate) + static_cast<std::uint64_t>(micro);
      TrainBatch b = draw_batch(data, spec, shared.get(), hyper.batch, batch_rng.split(id), hyper.augment);
      nn::Tensor<float> pred = res.live.forward(b.input, b.steps, &cache);
      nn::Tensor<float> dy;
      const double l = loss_and_grad(pred, b.target, LossKind::l1, &dy);
      if (!std::isfinite(l)) {
        throw NumericalError("train_restorer: non-finite loss " + std::to_string(l) + " at step " + std::to_string(step) +
                             " (lr " + std::to_string(hyper.lr) + ", spec " + spec->name + ")");
      }
      loss += l;
      res.live.backward_into(cache, dy, acc);
    }
    const float inv = 1.0f / static_cast<float>(hyper.accumulate);
    for (float& a : acc) a *= inv;
    opt.set_lr(learning_rate(hyper, step));
    opt.step(res.live.params(), acc);
    if (step % hyper.ema_every == 0) res.ema.update(res.live.params());
    loss /= hyper.accumulate;
    res.losses.push_back(loss);
    res.steps = step;
    if (on_step) on_step(step, loss);
  }
  return res;
}

}  // namespace colddiff

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/core/parallel.hpp"
#include "colddiff/degrade/degradation.hpp"
#include "colddiff/restore/restorer.hpp"
#include "colddiff/sample/trajectory.hpp"

namespace colddiff {

enum class Sampler { naive, cold };

inline std::string sampler_name(Sampler s) { return s == Sampler::naive ? "naive" : "cold"; }

inline Sampler parse_sampler(const std::string& s) {
  if (s == "naive" || s == "1" || s == "alg1") return Sampler::naive;
  if (s == "cold" || s == "improved" || s == "2" || s == "alg2") return Sampler::cold;
  throw std::invalid_argument("unknown sampler '" + s + "'");
}

namespace detail {

inline void check_sampler_args(const Image& x_t, int t, const Restorer& model, int horizon, const std::optional<Image>& x0) {
  if (t < 0 || t > horizon) throw std::out_of_range("sampler: t = " + std::to_string(t) + " outside [0, " + std::to_string(horizon) + "]");
  if (model.steps() >= 0 && model.steps() != horizon) {
    throw std::invalid_argument("sampler: restorer serves T = " + std::to_string(model.steps()) + " but the degradation has T = " +
                                std::to_string(horizon));
  }
  if (x0 && x0->shape() != x_t.shape()) throw std::invalid_argument("sampler: ground truth shape differs from x_t");
}

inline Trajectory begin(const Image& x_t, int t, bool with_drift) {
  Trajectory tr;
  tr.steps.reserve(static_cast<std::size_t>(t) + 1);
  tr.iterates.reserve(static_cast<std::size_t>(t) + 1);
  tr.steps.push_back(t);
  tr.iterates.push_back(x_t);
  if (with_drift) tr.drift.emplace();
  return tr;
}

inline void record_drift(Trajectory& tr, const Degradation& d, const std::optional<Image>& x0) {
  if (!x0) return;
  tr.drift->push_back(max_abs_diff(tr.iterates.back(), d.apply(*x0, tr.steps.back())));
}

inline void push(Trajectory& tr, int s, Image x) {
  tr.increments.push_back(l2_norm(x - tr.iterates.back()));
  tr.steps.push_back(s);
  tr.iterates.push_back(std::move(x));
}

}  // namespace detail

/// x_{s-1} = D(R(x_s, s), s - 1).
inline Trajectory naive_sample(const Image& x_t, int t, const Restorer& model, const Degradation& d,
                               const std::optional<Image>& x0 = std::nullopt) {
  detail::check_sampler_args(x_t, t, model, d.steps(), x0);
  Trajectory tr = detail::begin(x_t, t, x0.has_value());
  detail::record_drift(tr, d, x0);
  for (int s = t; s >= 1; --s) {
    Image est = model.restore(tr.iterates.back(), s);
    Image next = d.apply(est, s - 1);
    tr.estimates.push_back(std::move(est));
    detail::push(tr, s - 1, std::move(next));
    detail::record_drift(tr, d, x0);
  }
  return tr;
}

/// One improved step: x_s - D(x_hat, s) + D(x_hat, s - 1), evaluated left to right.
inline Image cold_step(const Image& x_s, const Image& x_hat, int s, const Degradation& d) {
  auto [lower, upper] = d.apply_adjacent(x_hat, s);
  Image out = x_s;
  auto o = out.data();
  const auto u = upper.data();
  const auto l = lower.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (o[i] - u[i]) + l[i];
  return out;
}

/// x_{s-1} = x_s - D(x_hat, s) + D(x_hat, s - 1) with x_hat = R(x_s, s). No clamping.
inline Trajectory cold_sample(const Image& x_t, int t, const Restorer& model, const Degradation& d,
                              const std::optional<Image>& x0 = std::nullopt) {
  detail::check_sampler_args(x_t, t, model, d.steps(), x0);
  Trajectory tr = detail::begin(x_t, t, x0.has_value());
  detail::record_drift(tr, d, x0);
  for (int s = t; s >= 1; --s) {
    Image est = model.restore(tr.iterates.back(), s);
    Image next = cold_step(tr.iterates.back(), est, s, d);
    tr.estimates.push_back(std::move(est));
    detail::push(tr, s - 1, std::move(next));
    detail::record_drift(tr, d, x0);
  }
  return tr;
}

inline Trajectory run_sampler(Sampler which, const Image& x_t, int t, const Restorer& model, const Degradation& d,
                              const std::optional<Image>& x0 = std::nullopt) {
  return which == Sampler::naive ? naive_sample(x_t, t, model, d, x0) : cold_sample(x_t, t, model, d, x0);
}

/// z_hat = (x_t - sqrt(alpha_t) x_hat) / sqrt(1 - alpha_t).
inline Image estimated_noise(const Image& x_t, int t, const Image& x_hat, const InterpSchedule& alpha) {
  if (t < 1 || t > alpha.steps()) throw std::out_of_range("estimated_noise: t must lie in [1, T]");
  const double a = alpha.alpha(t);
  if (!(a < 1.0)) throw std::domain_error("estimated_noise: alpha_t = 1 leaves the noise undetermined");
  Image::require_same_shape(x_t, x_hat, "estimated_noise");
  return lincomb(1.0 / std::sqrt(1.0 - a), x_t, -std::sqrt(a) / std::sqrt(1.0 - a), x_hat);
}

/// Deterministic noise-estimating sampler:
/// x_{s-1} = sqrt(alpha_{s-1}) x_hat + sqrt(1 - alpha_{s-1}) z_hat(x_s, s).
inline Trajectory cold_sample_estimated(const Image& x_t, int t, const Restorer& model, const InterpSchedule& alpha,
                                        const std::optional<Image>& x0 = std::nullopt,
                                        const std::optional<Image>& true_noise = std::nullopt) {
  if (t < 0 || t > alpha.steps()) throw std::out_of_range("cold_sample_estimated: t outside [0, T]");
  if (model.steps() >= 0 && model.steps() != alpha.steps()) {
    throw std::invalid_argument("cold_sample_estimated: restorer and schedule disagree on T");
  }
  Trajectory tr = detail::begin(x_t, t, x0.has_value() && true_noise.has_value());
  auto drift = [&]() {
    if (!tr.drift) return;
    tr.drift->push_back(max_abs_diff(tr.iterates.back(), interpolate(*x0, *true_noise, alpha.alpha(tr.steps.back()))));
  };
  drift();
  for (int s = t; s >= 1; --s) {
    Image est = model.restore(tr.iterates.back(), s);
    Image z = estimated_noise(tr.iterates.back(), s, est, alpha);
    Image next = interpolate(est, z, alpha.alpha(s - 1));
    tr.estimates.push_back(std::move(est));
    detail::push(tr, s - 1, std::move(next));
    drift();
  }
  return tr;
}

/// Many trajectories advanced in lock step so the restorer sees whole batches.
/// degradations holds one entry per start, or a single shared one. Identical,
/// iterate for iterate, to calling the single-trajectory sampler on each start.
inline std::vector<Trajectory> sample_many(Sampler which, std::span<const Image> starts, int t, const Restorer& model,
                                           std::span<const Degradation> degradations,
                                           std::span<const Image> truths = {}) {
  if (degradations.size() != starts.size() && degradations.size() != 1) {
    throw std::invalid_argument("sample_many: need one degradation per start or a single shared one");
  }
  if (!truths.empty() && truths.size() != starts.size()) throw std::invalid_argument("sample_many: truth count mismatch");
  const std::size_t n = starts.size();
  auto deg = [&](std::size_t i) -> const Degradation& { return degradations.size() == 1 ? degradations[0] : degradations[i]; };
  std::vector<Trajectory> out(n);
  std::vector<std::optional<Image>> x0(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!truths.empty()) x0[i] = truths[i];
    detail::check_sampler_args(starts[i], t, model, deg(i).steps(), x0[i]);
    out[i] = detail::begin(starts[i], t, x0[i].has_value());
  }
  parallel_for(n, [&](std::size_t i) { detail::record_drift(out[i], deg(i), x0[i]); });
  std::vector<Image> current(starts.begin(), starts.end());
  for (int s = t; s >= 1; --s) {
    const std::vector<int> ts(n, s);
    std::vector<Image> est = model.restore_batch(current, ts);
    parallel_for(n, [&](std::size_t i) {
      Image next = which == Sampler::naive ? deg(i).apply(est[i], s - 1) : cold_step(current[i], est[i], s, deg(i));
      out[i].estimates.push_back(std::move(est[i]));
      detail::push(out[i], s - 1, next);
      detail::record_drift(out[i], deg(i), x0[i]);
      current[i] = std::move(next);
    });
  }
  return out;
}

}  // namespace colddiff

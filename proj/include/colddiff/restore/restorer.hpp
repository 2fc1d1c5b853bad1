#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/core/parallel.hpp"
#include "colddiff/core/rng.hpp"
#include "colddiff/degrade/degradation.hpp"

namespace colddiff {

/// R(x_t, t) ~ x_0. Implementations must be deterministic and shape-preserving.
class Restorer {
 public:
  virtual ~Restorer() = default;

  Image restore(const Image& x_t, int t) const {
    if (t < 0 || (steps() >= 0 && t > steps())) {
      throw std::out_of_range("restore: step " + std::to_string(t) + " outside [0, " + std::to_string(steps()) + "]");
    }
    return restore_impl(x_t, t);
  }

  virtual std::vector<Image> restore_batch(std::span<const Image> xs, std::span<const int> ts) const {
    if (xs.size() != ts.size()) throw std::invalid_argument("restore_batch: one step per image required");
    std::vector<Image> out(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { out[i] = restore(xs[i], ts[i]); });
    return out;
  }

  virtual std::string family() const = 0;
  virtual std::size_t parameter_count() const { return 0; }
  /// Horizon T of the degradation this restorer serves; -1 when unconstrained.
  virtual int steps() const { return -1; }

 protected:
  virtual Image restore_impl(const Image& x_t, int t) const = 0;
};

/// Always returns the same value everywhere.
class ConstantRestorer final : public Restorer {
 public:
  explicit ConstantRestorer(double value = 0.0) : value_{value} {}
  std::string family() const override { return "constant"; }

 protected:
  Image restore_impl(const Image& x, int) const override { return Image(x.shape(), value_); }

 private:
  double value_;
};

/// Uniform [0,1) noise, a pure function of (seed, t, input).
class NoiseRestorer final : public Restorer {
 public:
  explicit NoiseRestorer(std::uint64_t seed) : seed_{seed} {}
  std::string family() const override { return "noise"; }

 protected:
  Image restore_impl(const Image& x, int t) const override {
    RngStream rng(seed_, RngStream::mix64(fingerprint(x) ^ static_cast<std::uint64_t>(t)));
    Image out(x.shape());
    for (double& v : out.data()) v = rng.uniform();
    return out;
  }

 private:
  std::uint64_t seed_;
};

/// Perfect restorer for a known set of clean images under one frozen degradation.
/// Lookup order: exact fingerprint of a registered D(x_0, t), then the nearest registered
/// D(x_0, t) in l2. With nothing registered the linear and interpolation families fall
/// back to their closed-form inverse.
class OracleRestorer final : public Restorer {
 public:
  explicit OracleRestorer(std::shared_ptr<const Degradation> d) : d_{std::move(d)} {
    if (!d_) throw std::invalid_argument("OracleRestorer: null degradation");
  }

  void add(const Image& x0) {
    const std::size_t idx = originals_.size();
    originals_.push_back(x0);
    std::vector<Image> levels;
    levels.reserve(static_cast<std::size_t>(d_->steps()) + 1);
    for (int t = 0; t <= d_->steps(); ++t) {
      levels.push_back(d_->apply(x0, t));
      table_.emplace(key(t, fingerprint(levels.back())), idx);
    }
    degraded_.push_back(std::move(levels));
  }

  std::size_t registered() const { return originals_.size(); }
  const Degradation& degradation() const { return *d_; }
  std::string family() const override { return "oracle"; }
  int steps() const override { return d_->steps(); }

  bool has_closed_form() const {
    const Family f = d_->family();
    return f == Family::linear_test || f == Family::noise_interp || f == Family::donor_interp;
  }

 protected:
  Image restore_impl(const Image& x, int t) const override {
    if (auto hit = exact(x, t)) return originals_[*hit];
    if (originals_.empty()) {
      if (has_closed_form()) return invert(x, t);
      throw std::logic_error("OracleRestorer: no registered images and no closed-form inverse");
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < originals_.size(); ++i) {
      const Image& ref = degraded_[i][static_cast<std::size_t>(t)];
      if (ref.shape() != x.shape()) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - ref[k]) * (x[k] - ref[k]);
      if (s < best_d) {
        best_d = s;
        best = i;
      }
    }
    return originals_[best];
  }

 private:
  static std::uint64_t key(int t, std::uint64_t fp) { return RngStream::mix64(fp + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(t + 1)); }

  std::optional<std::size_t> exact(const Image& x, int t) const {
    auto [lo, hi] = table_.equal_range(key(t, fingerprint(x)));
    for (auto it = lo; it != hi; ++it) {
      if (degraded_[it->second][static_cast<std::size_t>(t)] == x) return it->second;
    }
    return std::nullopt;
  }

  Image invert(const Image& x, int t) const {
    if (d_->family() == Family::linear_test) return x - static_cast<double>(t) * d_->anchor();
    const double a = interp_schedule(d_->spec()).alpha(t);
    if (a <= 0.0) throw std::domain_error("OracleRestorer: interpolation fully degraded at t=" + std::to_string(t));
    return (x - std::sqrt(1.0 - a) * d_->anchor()) * (1.0 / std::sqrt(a));
  }

  std::shared_ptr<const Degradation> d_;
  std::vector<Image> originals_;
  std::vector<std::vector<Image>> degraded_;
  std::unordered_multimap<std::uint64_t, std::size_t> table_;
};

enum class PerturbMode { fixed_offset, seeded_random, adversarial_constant };

inline std::string perturb_mode_name(PerturbMode m) {
  switch (m) {
    case PerturbMode::fixed_offset: return "fixed-offset";
    case PerturbMode::seeded_random: return "seeded-random";
    case PerturbMode::adversarial_constant: return "adversarial-constant";
  }
  return "?";
}

inline PerturbMode parse_perturb_mode(const std::string& s) {
  if (s == "fixed-offset" || s == "offset" || s == "constant") return PerturbMode::fixed_offset;
  if (s == "seeded-random" || s == "random") return PerturbMode::seeded_random;
  if (s == "adversarial-constant" || s == "adversarial") return PerturbMode::adversarial_constant;
  throw std::invalid_argument("unknown perturbation mode '" + s + "'");
}

/// Base restorer plus an error bounded by eps in max-norm:
/// fixed-offset adds +eps, seeded-random adds eps * U(-1, 1) keyed on (seed, t, input),
/// adversarial-constant adds a fixed +-eps checkerboard.
class PerturbedOracle final : public Restorer {
 public:
  PerturbedOracle(std::shared_ptr<const Restorer> base, double eps, PerturbMode mode, std::uint64_t seed = 0)
      : base_{std::move(base)}, eps_{eps}, mode_{mode}, seed_{seed} {
    if (!base_) throw std::invalid_argument("PerturbedOracle: null base");
    if (!(eps >= 0.0)) throw std::invalid_argument("PerturbedOracle: eps must be >= 0");
  }

  double eps() const { return eps_; }
  PerturbMode mode() const { return mode_; }
  std::string family() const override { return "perturbed-" + perturb_mode_name(mode_); }
  int steps() const override { return base_->steps(); }

 protected:
  Image restore_impl(const Image& x, int t) const override {
    Image out = base_->restore(x, t);
    if (eps_ == 0.0) return out;
    switch (mode_) {
      case PerturbMode::fixed_offset:
        out += eps_;
        break;
      case PerturbMode::seeded_random: {
        RngStream rng(seed_, RngStream::mix64(fingerprint(x) ^ (static_cast<std::uint64_t>(t) << 32)));
        for (double& v : out.data()) v += eps_ * rng.uniform(-1.0, 1.0);
        break;
      }
      case PerturbMode::adversarial_constant: {
        const Shape s = out.shape();
        for (int r = 0; r < s.height; ++r) {
          for (int c = 0; c < s.width; ++c) {
            for (int ch = 0; ch < s.channels; ++ch) out.at(r, c, ch) += ((r + c) % 2 ? -eps_ : eps_);
          }
        }
        break;
      }
    }
    return out;
  }

 private:
  std::shared_ptr<const Restorer> base_;
  double eps_;
  PerturbMode mode_;
  std::uint64_t seed_;
};

}  // namespace colddiff

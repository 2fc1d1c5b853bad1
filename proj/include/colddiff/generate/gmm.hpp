#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/errors.hpp"
#include "colddiff/core/rng.hpp"

namespace colddiff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kCovarianceRidge = 1e-6;

/// Smallest eigenvalue below this (relative to the trace scale) counts as degenerate.
inline bool degenerate(const Mat& cov) {
  Eigen::SelfAdjointEigenSolver<Mat> es(cov, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() <= 1e-12 * scale;
}

/// Sample mean and maximum-likelihood (1/N) covariance.
inline std::pair<Vec, Mat> mean_and_covariance(std::span<const Vec> pts) {
  if (pts.empty()) throw std::invalid_argument("mean_and_covariance: no points");
  const Eigen::Index d = pts[0].size();
  Vec mu = Vec::Zero(d);
  for (const Vec& p : pts) mu += p;
  mu /= static_cast<double>(pts.size());
  Mat cov = Mat::Zero(d, d);
  for (const Vec& p : pts) {
    const Vec c = p - mu;
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(pts.size());
  return {mu, cov};
}

/// Multivariate normal; sampling goes through the eigendecomposition so singular
/// (even zero) covariances are fine.
class Gaussian {
 public:
  Gaussian() = default;
  Gaussian(Vec mean, Mat cov) : mean_{std::move(mean)}, cov_{std::move(cov)} {
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) throw std::invalid_argument("Gaussian: dimension mismatch");
    cov_ = 0.5 * (cov_ + cov_.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(cov_);
    if (es.info() != Eigen::Success) throw NumericalError("Gaussian: eigendecomposition failed");
    transform_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

  Vec sample(RngStream& rng) const {
    Vec z(mean_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean_ + transform_ * z;
  }

 private:
  Vec mean_;
  Mat cov_;
  Mat transform_;
};

struct GmmComponent {
  double weight{1.0};
  Vec mean;
  Mat cov;
};

struct EmOptions {
  int max_iter{500};
  double tol{1e-8};  // on the mean per-point log-likelihood
  int restarts{5};
};

/// Gaussian mixture with full covariances.
class Gmm {
 public:
  Gmm() = default;
  explicit Gmm(std::vector<GmmComponent> comps) : comps_{std::move(comps)} {
    if (comps_.empty()) throw std::invalid_argument("Gmm: no components");
    double w = 0.0;
    for (const auto& c : comps_) {
      if (c.mean.size() != comps_[0].mean.size()) throw std::invalid_argument("Gmm: components differ in dimension");
      if (!(c.weight >= 0.0)) throw std::invalid_argument("Gmm: negative weight");
      w += c.weight;
    }
    if (std::abs(w - 1.0) > 1e-9) throw std::invalid_argument("Gmm: weights must sum to 1");
    samplers_.reserve(comps_.size());
    for (const auto& c : comps_) samplers_.emplace_back(c.mean, c.cov);
  }

  std::size_t size() const { return comps_.size(); }
  Eigen::Index dim() const { return comps_.empty() ? 0 : comps_[0].mean.size(); }
  const std::vector<GmmComponent>& components() const { return comps_; }

  Vec sample(RngStream& rng) const {
    if (comps_.empty()) throw std::logic_error("Gmm: not fitted");
    double u = rng.uniform();
    std::size_t k = 0;
    for (; k + 1 < comps_.size(); ++k) {
      if (u < comps_[k].weight) break;
      u -= comps_[k].weight;
    }
    return samplers_[k].sample(rng);
  }

  /// Per-point log-likelihoods under the mixture, plus responsibilities (N x K) if requested.
  double log_likelihood(std::span<const Vec> pts, Mat* resp = nullptr) const {
    const std::size_t K = comps_.size();
    std::vector<Eigen::LLT<Mat>> chol;
    std::vector<double> log_norm;
    const double d = static_cast<double>(dim());
    for (const auto& c : comps_) {
      chol.emplace_back(c.cov);
      if (chol.back().info() != Eigen::Success) throw NumericalError("Gmm: covariance not positive definite");
      const double logdet = 2.0 * chol.back().matrixL().toDenseMatrix().diagonal().array().log().sum();
      log_norm.push_back(std::log(std::max(c.weight, std::numeric_limits<double>::min())) -
                         0.5 * (d * std::log(2.0 * std::numbers::pi) + logdet));
    }
    if (resp) resp->resize(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(K));
    double total = 0.0;
    std::vector<double> lp(K);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < K; ++k) {
        const Vec diff = pts[i] - comps_[k].mean;
        const double m = chol[k].matrixL().solve(diff).squaredNorm();
        lp[k] = log_norm[k] - 0.5 * m;
        mx = std::max(mx, lp[k]);
      }
      double s = 0.0;
      for (double v : lp) s += std::exp(v - mx);
      const double lse = mx + std::log(s);
      total += lse;
      if (resp) {
        for (std::size_t k = 0; k < K; ++k) (*resp)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = std::exp(lp[k] - lse);
      }
    }
    return total;
  }

 private:
  std::vector<GmmComponent> comps_;
  std::vector<Gaussian> samplers_;
};

struct GmmFit {
  Gmm model;
  std::vector<double> history;  // mean per-point log-likelihood after each EM iteration
  int iterations{0};
  bool converged{false};
  int restart{0};
  /// max over iterations of |1 - sum_k r_ik| across points
  double max_resp_error{0.0};
};

namespace detail {

inline Mat regularized(Mat cov) {
  cov = 0.5 * (cov + cov.transpose());
  if (degenerate(cov)) cov += kCovarianceRidge * Mat::Identity(cov.rows(), cov.cols());
  return cov;
}

inline std::vector<Vec> kmeanspp(std::span<const Vec> pts, int K, RngStream& rng) {
  std::vector<Vec> centers;
  centers.push_back(pts[rng.uniform_int(pts.size())]);
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < K) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], (pts[i] - centers.back()).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = rng.uniform_int(pts.size());
    } else {
      double u = rng.uniform() * total;
      for (; pick + 1 < pts.size(); ++pick) {
        if (u < d2[pick]) break;
        u -= d2[pick];
      }
    }
    centers.push_back(pts[pick]);
  }
  return centers;
}

inline GmmFit em_once(std::span<const Vec> pts, int K, RngStream rng, const EmOptions& opt) {
  const auto [mu, cov] = mean_and_covariance(pts);
  const Mat init_cov = regularized(cov);
  std::vector<GmmComponent> comps;
  for (Vec& c : kmeanspp(pts, K, rng)) comps.push_back({1.0 / K, std::move(c), init_cov});
  GmmFit fit;
  fit.model = Gmm(comps);
  const double n = static_cast<double>(pts.size());
  const Eigen::Index d = mu.size();
  Mat resp;
  double prev = fit.model.log_likelihood(pts, &resp) / n;
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (Eigen::Index i = 0; i < resp.rows(); ++i) fit.max_resp_error = std::max(fit.max_resp_error, std::abs(1.0 - resp.row(i).sum()));
    std::vector<GmmComponent> next(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      const double nk = resp.col(k).sum();
      auto& c = next[static_cast<std::size_t>(k)];
      if (nk <= 1e-12) {
        c = fit.model.components()[static_cast<std::size_t>(k)];
        c.weight = 0.0;
        continue;
      }
      c.weight = nk / n;
      c.mean = Vec::Zero(d);
      for (std::size_t i = 0; i < pts.size(); ++i) c.mean += resp(static_cast<Eigen::Index>(i), k) * pts[i];
      c.mean /= nk;
      c.cov = Mat::Zero(d, d);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec diff = pts[i] - c.mean;
        c.cov.noalias() += resp(static_cast<Eigen::Index>(i), k) * diff * diff.transpose();
      }
      c.cov = regularized(c.cov / nk);
    }
    double wsum = 0.0;
    for (const auto& c : next) wsum += c.weight;
    for (auto& c : next) c.weight /= wsum;
    fit.model = Gmm(std::move(next));
    const double cur = fit.model.log_likelihood(pts, &resp) / n;
    fit.history.push_back(cur);
    fit.iterations = it;
    if (std::abs(cur - prev) < opt.tol) {
      fit.converged = true;
      break;
    }
    prev = cur;
  }
  return fit;
}

}  // namespace detail

/// EM with k-means++ seeding; the best of `restarts` runs by final log-likelihood.
/// Covariances get +1e-6 I only when degenerate.
inline GmmFit fit_gmm(std::span<const Vec> pts, int K, RngStream rng, const EmOptions& opt = {}) {
  if (pts.empty()) throw std::invalid_argument("fit_gmm: no data");
  if (K < 1) throw std::invalid_argument("fit_gmm: K must be >= 1");
  if (static_cast<std::size_t>(K) > pts.size()) {
    throw std::invalid_argument("fit_gmm: K = " + std::to_string(K) + " exceeds the " + std::to_string(pts.size()) + " data points");
  }
  for (const Vec& p : pts) {
    if (p.size() != pts[0].size()) throw std::invalid_argument("fit_gmm: points differ in dimension");
  }
  GmmFit best;
  double best_ll = -std::numeric_limits<double>::infinity();
  const int runs = K == 1 ? 1 : std::max(1, opt.restarts);
  for (int r = 0; r < runs; ++r) {
    GmmFit f = detail::em_once(pts, K, rng.split(static_cast<std::uint64_t>(r)), opt);
    const double ll = f.history.empty() ? -std::numeric_limits<double>::infinity() : f.history.back();
    if (ll > best_ll || r == 0) {
      best_ll = ll;
      best = std::move(f);
      best.restart = r;
    }
  }
  return best;
}

}  // namespace colddiff

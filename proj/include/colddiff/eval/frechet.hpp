#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/binary.hpp"
#include "colddiff/core/image.hpp"
#include "colddiff/core/rng.hpp"

namespace colddiff {

/// One feature vector per row.
using FeatureMatrix = Eigen::MatrixXd;

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string descriptor() const = 0;
  virtual FeatureMatrix extract(std::span<const Image> images) const = 0;
};

/// Area-weighted resampling to size x size, per channel.
inline Image area_resample(const Image& x, int size) {
  Image out(size, size, x.channels());
  const double sy = static_cast<double>(x.height()) / size;
  const double sx = static_cast<double>(x.width()) / size;
  for (int oy = 0; oy < size; ++oy) {
    const double y0 = oy * sy, y1 = (oy + 1) * sy;
    for (int ox = 0; ox < size; ++ox) {
      const double x0 = ox * sx, x1 = (ox + 1) * sx;
      for (int c = 0; c < x.channels(); ++c) {
        double s = 0.0;
        for (int y = static_cast<int>(y0); y < std::min(x.height(), static_cast<int>(std::ceil(y1))); ++y) {
          const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
          if (wy <= 0.0) continue;
          for (int xx = static_cast<int>(x0); xx < std::min(x.width(), static_cast<int>(std::ceil(x1))); ++xx) {
            const double wx = std::min<double>(xx + 1, x1) - std::max<double>(xx, x0);
            if (wx > 0.0) s += wy * wx * x.at(y, xx, c);
          }
        }
        out.at(oy, ox, c) = s / (sy * sx);
      }
    }
  }
  return out;
}

/// Pixels area-resampled to grid x grid, then a fixed Gaussian random projection
/// scaled by 1/sqrt(input dimension).
class RandomProjectionExtractor final : public FeatureExtractor {
 public:
  explicit RandomProjectionExtractor(int dim = 64, int grid = 8, std::uint64_t seed = 0xC01DF) : dim_{dim}, grid_{grid}, seed_{seed} {
    if (dim < 1 || grid < 1) throw std::invalid_argument("RandomProjectionExtractor: dim and grid must be positive");
  }

  std::string descriptor() const override {
    return "random-projection dim=" + std::to_string(dim_) + " grid=" + std::to_string(grid_) + " seed=" + std::to_string(seed_);
  }

  FeatureMatrix extract(std::span<const Image> images) const override {
    if (images.empty()) return FeatureMatrix(0, dim_);
    const int c = images[0].channels();
    const Eigen::MatrixXd& proj = projection(c);
    const Eigen::Index in = proj.cols();
    FeatureMatrix f(static_cast<Eigen::Index>(images.size()), dim_);
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (images[i].channels() != c) throw std::invalid_argument("RandomProjectionExtractor: mixed channel counts");
      const Image small = area_resample(images[i], grid_);
      const Eigen::Map<const Eigen::VectorXd> v(small.data().data(), in);
      f.row(static_cast<Eigen::Index>(i)) = (proj * v).transpose();
    }
    return f;
  }

 private:
  const Eigen::MatrixXd& projection(int channels) const {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(channels);
    if (it != cache_.end()) return it->second;
    const int in = grid_ * grid_ * channels;
    Eigen::MatrixXd p(dim_, in);
    RngStream rng(seed_, static_cast<std::uint64_t>(channels));
    for (int r = 0; r < dim_; ++r)
      for (int k = 0; k < in; ++k) p(r, k) = rng.normal() / std::sqrt(static_cast<double>(in));
    return cache_.emplace(channels, std::move(p)).first->second;
  }

  int dim_;
  int grid_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  mutable std::map<int, Eigen::MatrixXd> cache_;
};

inline bool covariance_degenerate(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
}

/// Symmetric PSD square root through the eigendecomposition, eigenvalues floored at 0.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

/// |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)). The trace term is computed
/// as tr((S_a^(1/2) S_b S_a^(1/2))^(1/2)). If either covariance is singular both
/// get +ridge I.
inline double frechet_distance(const Eigen::VectorXd& mu_a, Eigen::MatrixXd cov_a, const Eigen::VectorXd& mu_b,
                               Eigen::MatrixXd cov_b, double ridge = 1e-6) {
  if (mu_a.size() != mu_b.size() || cov_a.rows() != mu_a.size() || cov_b.rows() != mu_b.size()) {
    throw std::invalid_argument("frechet_distance: dimension mismatch");
  }
  if (covariance_degenerate(cov_a) || covariance_degenerate(cov_b)) {
    cov_a += ridge * Eigen::MatrixXd::Identity(cov_a.rows(), cov_a.cols());
    cov_b += ridge * Eigen::MatrixXd::Identity(cov_b.rows(), cov_b.cols());
  }
  const Eigen::MatrixXd ra = psd_sqrt(cov_a);
  const Eigen::MatrixXd mid = ra * cov_b * ra;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (mid + mid.transpose()), Eigen::EigenvaluesOnly);
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, d);
}

/// Mean and 1/(n-1) covariance of the rows.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> feature_stats(const FeatureMatrix& f) {
  if (f.rows() < 2) throw std::invalid_argument("feature_stats: need at least 2 samples");
  const Eigen::VectorXd mu = f.colwise().mean().transpose();
  const Eigen::MatrixXd c = f.rowwise() - mu.transpose();
  return {mu, (c.transpose() * c) / static_cast<double>(f.rows() - 1)};
}

inline double frechet_from_features(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("frechet_from_features: feature dimensions differ");
  auto [ma, ca] = feature_stats(a);
  auto [mb, cb] = feature_stats(b);
  return frechet_distance(ma, std::move(ca), mb, std::move(cb));
}

/// Gaussian-Frechet proxy between two image sets. This is not FID: the features
/// come from `extractor`, not an Inception network.
inline double frechet_proxy(std::span<const Image> a, std::span<const Image> b, const FeatureExtractor& extractor) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("frechet_proxy: each set needs at least 2 images");
  return frechet_from_features(extractor.extract(a), extractor.extract(b));
}

inline constexpr std::uint32_t kFeatureFileVersion = 1;

/// Layout: "CDFT", u32 version, str descriptor, u64 rows, u64 cols, rows*cols f32 (row-major).
struct FeatureFile {
  std::string descriptor;
  FeatureMatrix features;
};

inline void save_features(const FeatureFile& ff, const std::string& path) {
  auto os = bin::open_output(path);
  bin::Writer w(os);
  w.magic("CDFT");
  w.u32(kFeatureFileVersion);
  w.str(ff.descriptor);
  w.u64(static_cast<std::uint64_t>(ff.features.rows()));
  w.u64(static_cast<std::uint64_t>(ff.features.cols()));
  for (Eigen::Index r = 0; r < ff.features.rows(); ++r)
    for (Eigen::Index c = 0; c < ff.features.cols(); ++c) w.f32(static_cast<float>(ff.features(r, c)));
  if (!w.ok()) throw std::runtime_error("save_features: write failed for '" + path + "'");
}

inline FeatureFile load_features(const std::string& path) {
  const auto buf = bin::read_file(path);
  bin::Reader r(buf, "feature file '" + path + "'");
  r.expect_magic("CDFT");
  const std::uint32_t version = r.u32();
  if (version != kFeatureFileVersion) {
    throw FormatError(FormatError::Kind::bad_version, r.what() + ": unsupported version " + std::to_string(version));
  }
  FeatureFile ff;
  ff.descriptor = r.str();
  const std::uint64_t rows = r.u64();
  const std::uint64_t cols = r.u64();
  if (cols == 0 || rows > (1ULL << 32) || cols > (1ULL << 20)) throw FormatError(FormatError::Kind::bad_value, r.what() + ": invalid dimensions");
  r.need(rows * cols * 4);
  ff.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) ff.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.f32();
  if (r.remaining() != 0) throw FormatError(FormatError::Kind::dimension_mismatch, r.what() + ": payload larger than rows x cols");
  return ff;
}

}  // namespace colddiff

#pragma once

#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/core/rng.hpp"
#include "colddiff/data/dataset.hpp"
#include "colddiff/generate/gmm.hpp"

namespace colddiff {

/// Sampler over fully-degraded images x_T.
class PriorModel {
 public:
  virtual ~PriorModel() = default;
  virtual std::string kind() const = 0;
  virtual Shape shape() const = 0;
  virtual Image sample(RngStream& rng) const = 0;

  /// n draws, item i from rng.split(i).
  virtual std::vector<Image> sample_batch(std::size_t n, const RngStream& rng) const {
    std::vector<Image> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      RngStream r = rng.split(i);
      out.push_back(sample(r));
    }
    return out;
  }
};

inline Vec to_vec(std::span<const double> v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline std::vector<Vec> channel_mean_points(const Dataset& data) {
  std::vector<Vec> pts;
  pts.reserve(data.size());
  for (const Image& x : data.items) pts.push_back(to_vec(channel_means(x)));
  return pts;
}

/// EM on the per-image channel-mean vectors (dimension = channel count).
inline GmmFit fit_channel_mean_gmm(const Dataset& data, int K, RngStream rng, const EmOptions& opt = {}) {
  if (data.empty()) throw std::invalid_argument("fit_channel_mean_gmm: empty dataset");
  const auto pts = channel_mean_points(data);
  return fit_gmm(pts, K, std::move(rng), opt);
}

inline Image broadcast_channels(const Vec& m, Shape shape) {
  if (m.size() != shape.channels) throw std::invalid_argument("broadcast_channels: channel count mismatch");
  std::vector<double> c(m.data(), m.data() + m.size());
  return Image::solid(shape.height, shape.width, c);
}

/// Channel means drawn from a GMM, each broadcast to a constant plane.
class GmmPrior final : public PriorModel {
 public:
  GmmPrior() = default;
  GmmPrior(Gmm gmm, Shape shape) : gmm_{std::move(gmm)}, shape_{shape} {
    if (gmm_.size() == 0) throw std::invalid_argument("GmmPrior: empty mixture");
    if (gmm_.dim() != shape.channels) throw std::invalid_argument("GmmPrior: mixture dimension does not match channels");
  }

  std::string kind() const override { return "gmm"; }
  Shape shape() const override { return shape_; }
  const Gmm& gmm() const { return gmm_; }

  Image sample(RngStream& rng) const override {
    if (gmm_.size() == 0) throw std::logic_error("GmmPrior: prior is not fitted");
    return broadcast_channels(gmm_.sample(rng), shape_);
  }

 private:
  Gmm gmm_;
  Shape shape_{};
};

/// Constant image, each channel uniform in [0, 1].
class SolidColorPrior final : public PriorModel {
 public:
  explicit SolidColorPrior(Shape shape) : shape_{shape} {}
  std::string kind() const override { return "solid"; }
  Shape shape() const override { return shape_; }
  Image sample(RngStream& rng) const override {
    std::vector<double> c(static_cast<std::size_t>(shape_.channels));
    for (double& v : c) v = rng.uniform();
    return Image::solid(shape_.height, shape_.width, c);
  }

 private:
  Shape shape_;
};

/// Quadrant means: a 2x2xC summary. Rows split at h/2, columns at w/2.
inline Image quadrant_means(const Image& x) {
  if (x.height() < 2 || x.width() < 2) throw std::invalid_argument("quadrant_means: image smaller than 2x2");
  Image out(2, 2, x.channels());
  const int hr = x.height() / 2;
  const int wc = x.width() / 2;
  for (int qy = 0; qy < 2; ++qy) {
    for (int qx = 0; qx < 2; ++qx) {
      const int y0 = qy ? hr : 0, y1 = qy ? x.height() : hr;
      const int x0 = qx ? wc : 0, x1 = qx ? x.width() : wc;
      for (int c = 0; c < x.channels(); ++c) {
        double s = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int xx = x0; xx < x1; ++xx) s += x.at(y, xx, c);
        out.at(qy, qx, c) = s / ((y1 - y0) * (x1 - x0));
      }
    }
  }
  return out;
}

/// Nearest-neighbour expansion of a 2x2 array using the same split as quadrant_means.
inline Image expand_quadrants(const Image& q, Shape shape) {
  if (q.height() != 2 || q.width() != 2 || q.channels() != shape.channels) {
    throw std::invalid_argument("expand_quadrants: expected a 2x2 array with matching channels");
  }
  Image out(shape);
  const int hr = shape.height / 2;
  const int wc = shape.width / 2;
  for (int y = 0; y < shape.height; ++y)
    for (int x = 0; x < shape.width; ++x)
      for (int c = 0; c < shape.channels; ++c) out.at(y, x, c) = q.at(y >= hr, x >= wc, c);
  return out;
}

/// Gaussian over the 2x2xC downsample, upsampled with nearest neighbour.
class LowResGaussianPrior final : public PriorModel {
 public:
  LowResGaussianPrior() = default;
  LowResGaussianPrior(Gaussian g, Shape shape) : g_{std::move(g)}, shape_{shape} {
    if (g_.dim() != 4 * shape.channels) throw std::invalid_argument("LowResGaussianPrior: dimension must be 4 x channels");
  }

  static LowResGaussianPrior fit(const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("LowResGaussianPrior::fit: empty dataset");
    std::vector<Vec> pts;
    for (const Image& x : data.items) pts.push_back(to_vec(quadrant_means(x).data()));
    auto [mu, cov] = mean_and_covariance(pts);
    return LowResGaussianPrior(Gaussian(std::move(mu), std::move(cov)), data.shape);
  }

  std::string kind() const override { return "lowres"; }
  Shape shape() const override { return shape_; }
  const Gaussian& gaussian() const { return g_; }

  Image sample(RngStream& rng) const override {
    if (g_.dim() == 0) throw std::logic_error("LowResGaussianPrior: prior is not fitted");
    const Vec v = g_.sample(rng);
    Image q(Shape{2, 2, shape_.channels}, std::vector<double>(v.data(), v.data() + v.size()));
    return expand_quadrants(q, shape_);
  }

 private:
  Gaussian g_;
  Shape shape_{};
};

/// Draws donor images; batches sample without replacement while donors last.
class DonorPrior final : public PriorModel {
 public:
  explicit DonorPrior(std::shared_ptr<const std::vector<Image>> donors) : donors_{std::move(donors)} {
    if (!donors_ || donors_->empty()) throw std::invalid_argument("DonorPrior: empty donor set");
    for (const Image& d : *donors_) {
      if (d.shape() != donors_->front().shape()) throw std::invalid_argument("DonorPrior: donors differ in shape");
    }
  }

  std::string kind() const override { return "donor"; }
  Shape shape() const override { return donors_->front().shape(); }
  Image sample(RngStream& rng) const override { return (*donors_)[rng.uniform_int(donors_->size())]; }

  std::vector<Image> sample_batch(std::size_t n, const RngStream& rng) const override {
    RngStream r = rng;
    std::vector<std::size_t> pool;
    std::vector<Image> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (pool.empty()) {
        pool.resize(donors_->size());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
      }
      const std::size_t j = r.uniform_int(pool.size());
      out.push_back((*donors_)[pool[j]]);
      pool[j] = pool.back();
      pool.pop_back();
    }
    return out;
  }

 private:
  std::shared_ptr<const std::vector<Image>> donors_;
};

/// x + N(0, sigma^2) per element.
inline Image break_symmetry(const Image& x, double sigma, RngStream& rng) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("break_symmetry: sigma must be >= 0");
  if (sigma == 0.0) return x;
  Image out = x;
  for (double& v : out.data()) v += sigma * rng.normal();
  return out;
}

}  // namespace colddiff

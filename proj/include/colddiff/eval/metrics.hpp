#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/core/parallel.hpp"
#include "colddiff/degrade/convolution.hpp"

namespace colddiff {

inline double rmse(const Image& a, const Image& b) {
  Image::require_same_shape(a, b, "rmse");
  if (a.empty()) throw std::invalid_argument("rmse: empty images");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

struct SsimParams {
  int window{11};
  double sigma{1.5};
  double k1{0.01};
  double k2{0.03};
  double range{1.0};
};

/// Mean local SSIM. Local statistics use a Gaussian window with symmetric
/// boundary extension; the per-channel means are averaged.
inline double ssim(const Image& a, const Image& b, const SsimParams& p = {}) {
  Image::require_same_shape(a, b, "ssim");
  if (a.empty()) throw std::invalid_argument("ssim: empty images");
  const auto k = gaussian_kernel_1d(p.window, p.sigma);
  const double c1 = (p.k1 * p.range) * (p.k1 * p.range);
  const double c2 = (p.k2 * p.range) * (p.k2 * p.range);
  Image aa(a.shape()), bb(a.shape()), ab(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const Image mu_a = convolve_separable(a, k);
  const Image mu_b = convolve_separable(b, k);
  const Image e_aa = convolve_separable(aa, k);
  const Image e_bb = convolve_separable(bb, k);
  const Image e_ab = convolve_separable(ab, k);
  std::vector<double> per_channel(static_cast<std::size_t>(a.channels()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    const double s = ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    per_channel[i % per_channel.size()] += s;
  }
  double total = 0.0;
  for (double v : per_channel) total += v / static_cast<double>(a.shape().pixels());
  return total / static_cast<double>(per_channel.size());
}

struct MetricReport {
  std::vector<double> rmse;
  std::vector<double> ssim;
  double mean_rmse{0.0};
  double mean_ssim{0.0};
  std::optional<double> proxy;
  std::string protocol;  // how the proxy was computed
  std::size_t count{0};
};

/// Per-pair RMSE and SSIM between outputs and references.
inline MetricReport evaluate_pairs(std::span<const Image> outputs, std::span<const Image> references) {
  if (outputs.size() != references.size()) throw std::invalid_argument("evaluate_pairs: set sizes differ");
  MetricReport r;
  r.count = outputs.size();
  r.rmse.resize(r.count);
  r.ssim.resize(r.count);
  parallel_for(r.count, [&](std::size_t i) {
    r.rmse[i] = rmse(outputs[i], references[i]);
    r.ssim[i] = ssim(outputs[i], references[i]);
  });
  for (std::size_t i = 0; i < r.count; ++i) {
    r.mean_rmse += r.rmse[i];
    r.mean_ssim += r.ssim[i];
  }
  if (r.count) {
    r.mean_rmse /= static_cast<double>(r.count);
    r.mean_ssim /= static_cast<double>(r.count);
  }
  return r;
}

}  // namespace colddiff

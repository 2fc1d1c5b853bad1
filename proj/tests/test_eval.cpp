#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "colddiff/eval/frechet.hpp"
#include "colddiff/eval/metrics.hpp"
#include "colddiff/eval/report.hpp"
#include "colddiff/eval/stability.hpp"

using namespace colddiff;
namespace fs = std::filesystem;

namespace {

Image random_image(int h, int w, int c, RngStream rng) {
  Image x(h, w, c);
  for (double& v : x.data()) v = rng.uniform();
  return x;
}

FeatureMatrix gaussian_features(int n, const Eigen::VectorXd& mean, RngStream rng) {
  FeatureMatrix f(n, mean.size());
  for (int i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < mean.size(); ++j) f(i, j) = mean[j] + rng.normal();
  return f;
}

// Sliding-window SSIM written out directly from the definition.
double ssim_direct(const Image& a, const Image& b) {
  const int r = 5;
  const double s = 1.5;
  double wsum = 0.0;
  std::vector<double> w(121);
  for (int u = -r; u <= r; ++u)
    for (int v = -r; v <= r; ++v) wsum += w[static_cast<std::size_t>((u + r) * 11 + v + r)] = std::exp(-(u * u + v * v) / (2 * s * s));
  for (double& x : w) x /= wsum;
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0.0;
  for (int ch = 0; ch < a.channels(); ++ch) {
    double acc = 0.0;
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        double ma = 0, mb = 0, aa = 0, bb = 0, ab = 0;
        for (int u = -r; u <= r; ++u) {
          for (int v = -r; v <= r; ++v) {
            const double wt = w[static_cast<std::size_t>((u + r) * 11 + v + r)];
            const double pa = a.at(reflect_index(y + u, a.height()), reflect_index(x + v, a.width()), ch);
            const double pb = b.at(reflect_index(y + u, b.height()), reflect_index(x + v, b.width()), ch);
            ma += wt * pa;
            mb += wt * pb;
            aa += wt * pa * pa;
            bb += wt * pb * pb;
            ab += wt * pa * pb;
          }
        }
        const double va = aa - ma * ma, vb = bb - mb * mb, cv = ab - ma * mb;
        acc += (2 * ma * mb + c1) * (2 * cv + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      }
    }
    total += acc / (a.height() * a.width());
  }
  return total / a.channels();
}

}  // namespace

TEST(Rmse, Examples) {
  Image a = random_image(5, 5, 3, RngStream(1));
  EXPECT_EQ(rmse(a, a), 0.0);
  Image b = a;
  b += 0.1;
  EXPECT_NEAR(rmse(b, a), 0.1, 1e-15);
  Image z(Shape{1, 2, 1}, std::vector<double>{0.0, 0.0});
  Image w(Shape{1, 2, 1}, std::vector<double>{0.3, 0.4});
  EXPECT_NEAR(rmse(z, w), std::sqrt((0.09 + 0.16) / 2.0), 1e-15);
  EXPECT_THROW(rmse(a, Image(5, 5, 1)), std::invalid_argument);
}

TEST(Rmse, IsAMetric) {
  RngStream rng(2);
  for (int i = 0; i < 50; ++i) {
    Image x = random_image(4, 4, 1, rng.split(3 * i));
    Image y = random_image(4, 4, 1, rng.split(3 * i + 1));
    Image z = random_image(4, 4, 1, rng.split(3 * i + 2));
    EXPECT_EQ(rmse(x, y), rmse(y, x));
    EXPECT_GT(rmse(x, y), 0.0);
    EXPECT_LE(rmse(x, z), rmse(x, y) + rmse(y, z) + 1e-15);
  }
}

TEST(Ssim, IdentityConstantsAndSymmetry) {
  Image a = random_image(16, 16, 3, RngStream(3));
  Image b = random_image(16, 16, 3, RngStream(4));
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(ssim(a, b), ssim(b, a));
  const double c1 = 1e-4;
  EXPECT_NEAR(ssim(Image(12, 12, 1, 0.0), Image(12, 12, 1, 1.0)), c1 / (1.0 + c1), 1e-12);
  const double s = ssim(a, b);
  EXPECT_GE(s, -1.0);
  EXPECT_LE(s, 1.0);
  EXPECT_THROW(ssim(a, Image(16, 16, 1)), std::invalid_argument);
}

TEST(Ssim, MatchesDirectSlidingWindow) {
  Image a = random_image(13, 10, 3, RngStream(5));
  Image b = a;
  RngStream rng(6);
  for (double& v : b.data()) v = std::clamp(v + 0.2 * rng.normal(), 0.0, 1.0);
  EXPECT_NEAR(ssim(a, b), ssim_direct(a, b), 1e-12);
  Image g = random_image(7, 7, 1, RngStream(7));
  Image h = random_image(7, 7, 1, RngStream(8));
  EXPECT_NEAR(ssim(g, h), ssim_direct(g, h), 1e-12);
}

TEST(EvaluatePairs, MeansAndCounts) {
  std::vector<Image> a{random_image(8, 8, 1, RngStream(1)), random_image(8, 8, 1, RngStream(2))};
  std::vector<Image> b{a[0], random_image(8, 8, 1, RngStream(3))};
  auto r = evaluate_pairs(a, b);
  EXPECT_EQ(r.count, 2u);
  EXPECT_EQ(r.rmse[0], 0.0);
  EXPECT_NEAR(r.mean_rmse, 0.5 * (r.rmse[0] + r.rmse[1]), 1e-15);
  EXPECT_NEAR(r.mean_ssim, 0.5 * (1.0 + r.ssim[1]), 1e-12);
  std::ostringstream table, lines;
  write_metric_table(r, table);
  write_metric_jsonl(r, lines);
  EXPECT_NE(table.str().find("mean"), std::string::npos);
  std::istringstream in(lines.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_NO_THROW((void)nlohmann::json::parse(line));
    ++n;
  }
  EXPECT_EQ(n, 3);
}

TEST(Frechet, UnivariateClosedForm) {
  Eigen::VectorXd m1(1), m2(1);
  m1 << 0.3;
  m2 << -0.2;
  Eigen::MatrixXd s1(1, 1), s2(1, 1);
  s1 << 4.0;
  s2 << 0.25;
  EXPECT_NEAR(frechet_distance(m1, s1, m2, s2), 0.25 + (2.0 - 0.5) * (2.0 - 0.5), 1e-12);
}

TEST(Frechet, DiagonalClosedForm) {
  Eigen::VectorXd m1 = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0), m2 = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd d1(5), d2(5);
  d1 << 1, 2, 3, 4, 5;
  d2 << 5, 1, 0.5, 2, 3;
  double want = m1.squaredNorm();
  for (int i = 0; i < 5; ++i) want += std::pow(std::sqrt(d1[i]) - std::sqrt(d2[i]), 2);
  EXPECT_NEAR(frechet_distance(m1, d1.asDiagonal(), m2, d2.asDiagonal()), want, 1e-10);
}

TEST(Frechet, SameSetIsZeroAndOrderInvariant) {
  std::vector<Image> a, b;
  for (int i = 0; i < 100; ++i) a.push_back(random_image(28, 28, 1, RngStream(10 + i)));
  for (int i = 0; i < 80; ++i) b.push_back(random_image(28, 28, 1, RngStream(500 + i)));
  RandomProjectionExtractor ex;
  EXPECT_LT(frechet_proxy(a, a, ex), 1e-8);
  EXPECT_NEAR(frechet_proxy(a, b, ex), frechet_proxy(b, a, ex), 1e-8);
  EXPECT_GT(frechet_proxy(a, b, ex), 0.0);
  std::vector<Image> few(a.begin(), a.begin() + 10);
  EXPECT_LT(frechet_proxy(few, few, ex), 1e-8);
  EXPECT_THROW(frechet_proxy(std::vector<Image>(a.begin(), a.begin() + 1), b, ex), std::invalid_argument);
}

TEST(Frechet, MeanShiftRecoversSquaredNorm) {
  Eigen::VectorXd delta(8);
  delta << 0.5, -0.3, 0.2, 0.0, 0.1, 0.4, -0.2, 0.3;
  auto a = gaussian_features(20000, Eigen::VectorXd::Zero(8), RngStream(20));
  auto b = gaussian_features(20000, delta, RngStream(21));
  const double proxy = frechet_from_features(a, b);
  const Eigen::VectorXd shift = (b.colwise().mean() - a.colwise().mean()).transpose();
  // covariance term of two N(0, I) estimates from 20000 samples is ~ 1e-3
  EXPECT_NEAR(proxy, shift.squaredNorm(), 0.01);
  EXPECT_NEAR(proxy, delta.squaredNorm(), 0.07);
}

TEST(Features, ExtractorIsDeterministicAndAreaPreservesMean) {
  Image x = random_image(28, 28, 3, RngStream(30));
  Image small = area_resample(x, 8);
  const auto m0 = channel_means(x), m1 = channel_means(small);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(m0[c], m1[c], 1e-12);
  Image k(20, 20, 1, 0.25);
  const Image ks = area_resample(k, 8);
  for (double v : ks.data()) EXPECT_NEAR(v, 0.25, 1e-15);
  RandomProjectionExtractor e1, e2;
  std::vector<Image> imgs{x, random_image(28, 28, 3, RngStream(31))};
  EXPECT_EQ(e1.extract(imgs), e2.extract(imgs));
  EXPECT_EQ(e1.extract(imgs).cols(), 64);
}

TEST(Features, FileRoundTripAndErrors) {
  FeatureFile ff{"test features", gaussian_features(7, Eigen::VectorXd::Zero(5), RngStream(40))};
  ff.features = ff.features.cast<float>().cast<double>();
  const auto p = (fs::temp_directory_path() / "colddiff_eval_features.bin").string();
  save_features(ff, p);
  auto back = load_features(p);
  EXPECT_EQ(back.descriptor, ff.descriptor);
  EXPECT_EQ(back.features, ff.features);
  {
    std::ofstream out(p, std::ios::binary | std::ios::app);
    out.put(0);
  }
  try {
    load_features(p);
    ADD_FAILURE();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::dimension_mismatch);
  }
  fs::resize_file(p, 30);
  try {
    load_features(p);
    ADD_FAILURE();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::truncated);
  }
  fs::remove(p);
}

TEST(Stability, LinearFamilyExactForImprovedSampler) {
  StabilityConfig cfg;
  cfg.presets = {"linear"};
  cfg.eps = {0.1, 1.0, 10.0};
  cfg.steps = {16, 64};
  auto r = stability_sweep(cfg);
  ASSERT_EQ(r.cells.size(), 6u);
  for (const auto& c : r.cells) {
    EXPECT_LT(c.cold_drift, 1e-9) << c.eps << " " << c.t;
    EXPECT_GE(c.naive_drift, c.eps * (1 - 1e-9)) << c.eps << " " << c.t;
  }
}

TEST(Stability, PerfectRestorerHasNoDrift) {
  StabilityConfig cfg;
  cfg.presets = {"linear", "blur", "mask", "downsample", "snow", "desaturate", "noise", "animorph"};
  cfg.eps = {0.0};
  cfg.steps = {3};
  cfg.images = 2;
  cfg.height = cfg.width = 32;
  auto r = stability_sweep(cfg);
  ASSERT_EQ(r.cells.size(), 8u);
  for (const auto& c : r.cells) {
    EXPECT_LT(c.naive_drift, 1e-12) << c.preset;
    EXPECT_LT(c.cold_drift, 1e-12) << c.preset;
  }
}

TEST(Stability, BlurColdBeatsNaive) {
  StabilityConfig cfg;
  cfg.presets = {"blur/mnist"};
  cfg.eps = {0.05};
  cfg.steps = {40};
  cfg.images = 3;
  auto r = stability_sweep(cfg);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_LT(r.cells[0].cold_drift, r.cells[0].naive_drift);
}

TEST(Stability, DeterministicAndReported) {
  StabilityConfig cfg;
  cfg.presets = {"linear", "blur"};
  cfg.eps = {0.5};
  cfg.steps = {5, 20};
  cfg.mode = PerturbMode::seeded_random;
  cfg.seed = 9;
  set_thread_count(1);
  auto a = stability_sweep(cfg);
  set_thread_count(3);
  auto b = stability_sweep(cfg);
  set_thread_count(0);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].naive_drift, b.cells[i].naive_drift);
    EXPECT_EQ(a.cells[i].cold_drift, b.cells[i].cold_drift);
    EXPECT_GE(a.cells[i].naive_drift, 0.0);
  }
  std::ostringstream table, lines;
  write_stability_table(a, table);
  write_stability_jsonl(a, lines);
  EXPECT_NE(table.str().find("cold_drift"), std::string::npos);
  std::istringstream in(lines.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["mode"], "seeded-random");
    ++n;
  }
  EXPECT_EQ(n, a.cells.size());
  cfg.steps = {100};
  EXPECT_THROW(stability_sweep(cfg), std::invalid_argument);
}

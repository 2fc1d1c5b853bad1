#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "colddiff/core/binary.hpp"
#include "colddiff/generate/prior.hpp"

namespace colddiff {

inline constexpr std::uint32_t kPriorVersion = 1;

/// Layout: "CDPR", u32 version, str kind ("gmm" | "lowres"), u32 height, width,
/// channels, u32 K, u32 D, then per component f64 weight, D f64 mean, D*D f64
/// covariance (row-major). A low-res prior is stored as a single component.
inline void save_prior(const PriorModel& prior, const std::string& path) {
  std::vector<GmmComponent> comps;
  if (const auto* g = dynamic_cast<const GmmPrior*>(&prior)) {
    comps = g->gmm().components();
  } else if (const auto* l = dynamic_cast<const LowResGaussianPrior*>(&prior)) {
    comps.push_back({1.0, l->gaussian().mean(), l->gaussian().cov()});
  } else {
    throw std::invalid_argument("save_prior: prior kind '" + prior.kind() + "' has no file format");
  }
  auto os = bin::open_output(path);
  bin::Writer w(os);
  w.magic("CDPR");
  w.u32(kPriorVersion);
  w.str(prior.kind());
  const Shape s = prior.shape();
  w.u32(static_cast<std::uint32_t>(s.height));
  w.u32(static_cast<std::uint32_t>(s.width));
  w.u32(static_cast<std::uint32_t>(s.channels));
  w.u32(static_cast<std::uint32_t>(comps.size()));
  const auto d = static_cast<std::uint32_t>(comps.front().mean.size());
  w.u32(d);
  for (const auto& c : comps) {
    w.f64(c.weight);
    for (Eigen::Index i = 0; i < c.mean.size(); ++i) w.f64(c.mean[i]);
    for (Eigen::Index i = 0; i < c.cov.rows(); ++i)
      for (Eigen::Index j = 0; j < c.cov.cols(); ++j) w.f64(c.cov(i, j));
  }
  if (!w.ok()) throw std::runtime_error("save_prior: write failed for '" + path + "'");
}

inline std::shared_ptr<PriorModel> load_prior(const std::string& path) {
  const auto buf = bin::read_file(path);
  bin::Reader r(buf, "prior '" + path + "'");
  r.expect_magic("CDPR");
  const std::uint32_t version = r.u32();
  if (version != kPriorVersion) {
    throw FormatError(FormatError::Kind::bad_version, r.what() + ": unsupported version " + std::to_string(version));
  }
  const std::string kind = r.str(64);
  Shape s;
  s.height = static_cast<int>(r.u32());
  s.width = static_cast<int>(r.u32());
  s.channels = static_cast<int>(r.u32());
  const std::uint32_t K = r.u32();
  const std::uint32_t d = r.u32();
  if (s.height < 1 || s.width < 1 || (s.channels != 1 && s.channels != 3) || K < 1 || d < 1 || d > 4096) {
    throw FormatError(FormatError::Kind::bad_value, r.what() + ": invalid header");
  }
  const std::uint32_t want = kind == "lowres" ? 4u * static_cast<std::uint32_t>(s.channels)
                                              : static_cast<std::uint32_t>(s.channels);
  if (kind != "gmm" && kind != "lowres") throw FormatError(FormatError::Kind::bad_value, r.what() + ": unknown kind '" + kind + "'");
  if (d != want || (kind == "lowres" && K != 1)) {
    throw FormatError(FormatError::Kind::dimension_mismatch, r.what() + ": dimension does not match the image shape");
  }
  r.need(static_cast<std::size_t>(K) * (1 + d + static_cast<std::size_t>(d) * d) * 8);
  std::vector<GmmComponent> comps(K);
  for (auto& c : comps) {
    c.weight = r.f64();
    c.mean.resize(d);
    for (std::uint32_t i = 0; i < d; ++i) c.mean[i] = r.f64();
    c.cov.resize(d, d);
    for (std::uint32_t i = 0; i < d; ++i)
      for (std::uint32_t j = 0; j < d; ++j) c.cov(i, j) = r.f64();
  }
  if (r.remaining() != 0) throw FormatError(FormatError::Kind::bad_value, r.what() + ": trailing bytes");
  try {
    if (kind == "lowres") return std::make_shared<LowResGaussianPrior>(Gaussian(comps[0].mean, comps[0].cov), s);
    return std::make_shared<GmmPrior>(Gmm(std::move(comps)), s);
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::bad_value, r.what() + ": " + e.what());
  }
}

}  // namespace colddiff

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "colddiff/core/binary.hpp"
#include "colddiff/restore/conv_restorer.hpp"

namespace colddiff {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: "CDCK", u32 version, str architecture, str preset, u64 seed, u64 steps,
/// u64 n, n x f32 live weights, n x f32 EMA weights. Strings are u32 length + bytes.
struct Checkpoint {
  Architecture arch;
  std::string preset;
  std::uint64_t seed{0};
  std::uint64_t steps{0};
  std::vector<float> live;
  std::vector<float> ema;
};

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  if (ck.live.size() != ck.ema.size()) throw std::invalid_argument("save_checkpoint: live and EMA sizes differ");
  auto os = bin::open_output(path);
  bin::Writer w(os);
  w.magic("CDCK");
  w.u32(kCheckpointVersion);
  w.str(ck.arch.descriptor());
  w.str(ck.preset);
  w.u64(ck.seed);
  w.u64(ck.steps);
  w.u64(ck.live.size());
  for (float v : ck.live) w.f32(v);
  for (float v : ck.ema) w.f32(v);
  if (!w.ok()) throw std::runtime_error("save_checkpoint: write failed for '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  const auto buf = bin::read_file(path);
  bin::Reader r(buf, "checkpoint '" + path + "'");
  r.expect_magic("CDCK");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(FormatError::Kind::bad_version, r.what() + ": unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  try {
    ck.arch = Architecture::parse(r.str());
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::bad_value, r.what() + ": " + e.what());
  }
  ck.preset = r.str();
  ck.seed = r.u64();
  ck.steps = r.u64();
  const std::uint64_t n = r.u64();
  const std::size_t expected = ConvRestorer<float>(ck.arch).parameter_count();
  if (n != expected) {
    throw FormatError(FormatError::Kind::dimension_mismatch, r.what() + ": " + std::to_string(n) +
                                                                  " weights but architecture " + ck.arch.descriptor() +
                                                                  " has " + std::to_string(expected));
  }
  r.need(static_cast<std::size_t>(n) * 8);
  ck.live.resize(n);
  ck.ema.resize(n);
  for (auto& v : ck.live) v = r.f32();
  for (auto& v : ck.ema) v = r.f32();
  if (r.remaining() != 0) throw FormatError(FormatError::Kind::bad_value, r.what() + ": trailing bytes");
  return ck;
}

}  // namespace colddiff

#pragma once

#include <string>
#include <vector>

#include "colddiff/core/binary.hpp"
#include "colddiff/core/errors.hpp"
#include "colddiff/core/log.hpp"
#include "colddiff/data/dataset.hpp"

namespace colddiff {

inline constexpr std::size_t kCifarRecord = 3073;

/// CIFAR-10 binary batch: records of 1 label byte + 1024 R + 1024 G + 1024 B bytes.
inline Dataset load_cifar_bin(const std::string& path, Split split = Split::train) {
  const auto buf = bin::read_file(path);
  Dataset d;
  d.name = "cifar10";
  d.split = split;
  d.shape = Shape{32, 32, 3};
  if (buf.empty()) {
    log::warn("CIFAR batch '" + path + "' is empty");
    return d;
  }
  if (buf.size() % kCifarRecord != 0) {
    throw FormatError(FormatError::Kind::truncated, "CIFAR '" + path + "': size " + std::to_string(buf.size()) +
                                                        " is not a multiple of 3073");
  }
  const std::size_t n = buf.size() / kCifarRecord;
  d.items.reserve(n);
  d.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* rec = buf.data() + i * kCifarRecord;
    if (rec[0] > 9) {
      throw FormatError(FormatError::Kind::bad_value, "CIFAR '" + path + "': record " + std::to_string(i) + " has label " +
                                                          std::to_string(rec[0]));
    }
    Image x(32, 32, 3);
    for (int c = 0; c < 3; ++c) {
      for (int p = 0; p < 1024; ++p) x.at(p / 32, p % 32, c) = static_cast<double>(rec[1 + c * 1024 + p]) / 255.0;
    }
    d.items.push_back(std::move(x));
    d.labels.push_back(rec[0]);
  }
  return d;
}

}  // namespace colddiff

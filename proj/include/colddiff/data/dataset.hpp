#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/image.hpp"

namespace colddiff {

enum class Split { train, test };

inline std::string split_name(Split s) { return s == Split::train ? "train" : "test"; }

/// A named collection of same-shape images, with optional integer labels.
struct Dataset {
  std::string name;
  Split split{Split::train};
  Shape shape{};
  std::vector<Image> items;
  std::vector<int> labels;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  const Image& operator[](std::size_t i) const { return items.at(i); }

  void push(Image x, int label = -1) {
    if (items.empty() && shape.size() == 0) shape = x.shape();
    if (x.shape() != shape) {
      throw std::invalid_argument("Dataset '" + name + "': item shape " + x.shape().str() + " differs from " + shape.str());
    }
    items.push_back(std::move(x));
    if (label >= 0 || !labels.empty()) labels.push_back(label);
  }

  /// First n items (or all when n exceeds the size).
  Dataset head(std::size_t n) const {
    Dataset d{name, split, shape, {}, {}};
    n = std::min(n, items.size());
    d.items.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n));
    if (!labels.empty()) d.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
    return d;
  }
};

}  // namespace colddiff

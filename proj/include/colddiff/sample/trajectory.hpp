#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/image.hpp"

namespace colddiff {

/// Iterates x_t, x_{t-1}, ..., x_0 of one sampling run.
/// estimates[k] is R(x_s, s) for s = steps[k] (there are t of them);
/// increments[k] = ||x_{s-1} - x_s||_2; drift[k] = ||x_s - D(x_0, s)||_inf when x_0 is known.
struct Trajectory {
  std::vector<int> steps;
  std::vector<Image> iterates;
  std::vector<Image> estimates;
  std::vector<double> increments;
  std::optional<std::vector<double>> drift;

  std::size_t size() const { return iterates.size(); }
  int start() const { return steps.empty() ? -1 : steps.front(); }
  const Image& final() const {
    if (iterates.empty()) throw std::logic_error("Trajectory: empty");
    return iterates.back();
  }
  /// Iterate at step s.
  const Image& at_step(int s) const {
    const int t = start();
    if (s < 0 || s > t) throw std::out_of_range("Trajectory: no iterate at step " + std::to_string(s));
    return iterates[static_cast<std::size_t>(t - s)];
  }
  double final_drift() const {
    if (!drift || drift->empty()) throw std::logic_error("Trajectory: no drift recorded");
    return drift->back();
  }
  double max_drift() const {
    if (!drift) throw std::logic_error("Trajectory: no drift recorded");
    double m = 0.0;
    for (double d : *drift) m = std::max(m, d);
    return m;
  }
};

}  // namespace colddiff

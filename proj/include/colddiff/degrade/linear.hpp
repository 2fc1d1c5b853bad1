#pragma once

#include "colddiff/core/image.hpp"
#include "colddiff/degrade/blur.hpp"

namespace colddiff {

/// Model degradation D(x, s) = x + s e.
struct LinearTestOp {
  Image direction;
  int steps{64};
};

inline Image linear_degrade(const Image& x, int s, const LinearTestOp& op) {
  Image::require_same_shape(x, op.direction, "linear_degrade");
  check_step(s, op.steps, "linear_degrade");
  if (s == 0) return x;
  Image out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + s * op.direction[i];
  return out;
}

}  // namespace colddiff

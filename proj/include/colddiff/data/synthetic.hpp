#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "colddiff/core/rng.hpp"
#include "colddiff/data/dataset.hpp"

namespace colddiff {

namespace detail {

// 1 inside, 0 outside, linear ramp one pixel wide across the boundary of the
// ellipse ((x-cx)/rx)^2 + ((y-cy)/ry)^2 = 1.
inline double ellipse_cover(double x, double y, double cx, double cy, double rx, double ry, double px) {
  const double dx = (x - cx) / rx, dy = (y - cy) / ry;
  const double r = std::sqrt(dx * dx + dy * dy);
  const double edge = (r - 1.0) * std::min(rx, ry) / px;
  return std::clamp(0.5 - edge, 0.0, 1.0);
}

inline void blend(std::array<double, 3>& dst, const std::array<double, 3>& src, double a) {
  for (int c = 0; c < 3; ++c) dst[static_cast<std::size_t>(c)] += a * (src[static_cast<std::size_t>(c)] - dst[static_cast<std::size_t>(c)]);
}

}  // namespace detail

/// One procedural face-like RGB image: gradient background, hair, an elliptical
/// face, two eyes and a mouth, each with randomized geometry and color.
inline Image synthetic_face(int resolution, RngStream& rng) {
  const double n = resolution;
  const double px = 1.0 / n;
  std::array<double, 3> bg0{rng.uniform(), rng.uniform(), rng.uniform()};
  std::array<double, 3> bg1{rng.uniform(), rng.uniform(), rng.uniform()};
  const double tone = rng.uniform(0.35, 0.95);
  std::array<double, 3> skin{tone, tone * rng.uniform(0.7, 0.85), tone * rng.uniform(0.55, 0.7)};
  const double hair_v = rng.uniform(0.05, 0.6);
  std::array<double, 3> hair{hair_v, hair_v * rng.uniform(0.6, 1.0), hair_v * rng.uniform(0.4, 0.9)};
  std::array<double, 3> eye{0.1 * rng.uniform(), 0.1 * rng.uniform(), 0.15 * rng.uniform()};
  std::array<double, 3> lip{rng.uniform(0.5, 0.8), rng.uniform(0.15, 0.35), rng.uniform(0.2, 0.4)};
  const double cx = 0.5 + rng.uniform(-0.05, 0.05);
  const double cy = 0.55 + rng.uniform(-0.04, 0.04);
  const double rx = rng.uniform(0.22, 0.3);
  const double ry = rng.uniform(0.3, 0.36);
  const double hair_grow = rng.uniform(0.03, 0.09);
  const double eye_dx = rx * rng.uniform(0.35, 0.5);
  const double eye_y = cy - ry * rng.uniform(0.15, 0.3);
  const double eye_r = rx * rng.uniform(0.1, 0.16);
  const double mouth_y = cy + ry * rng.uniform(0.4, 0.55);
  const double mouth_w = rx * rng.uniform(0.3, 0.5);
  const double mouth_h = ry * rng.uniform(0.05, 0.12);

  Image img(resolution, resolution, 3);
  for (int y = 0; y < resolution; ++y) {
    for (int x = 0; x < resolution; ++x) {
      const double u = (x + 0.5) / n, v = (y + 0.5) / n;
      std::array<double, 3> p;
      for (int c = 0; c < 3; ++c) p[static_cast<std::size_t>(c)] = bg0[static_cast<std::size_t>(c)] * (1 - v) + bg1[static_cast<std::size_t>(c)] * v;
      const double hair_a = detail::ellipse_cover(u, v, cx, cy - hair_grow, rx + hair_grow, ry + hair_grow, px);
      detail::blend(p, hair, hair_a * (v < cy + 0.1 ? 1.0 : 0.0));
      detail::blend(p, skin, detail::ellipse_cover(u, v, cx, cy, rx, ry, px));
      detail::blend(p, eye, detail::ellipse_cover(u, v, cx - eye_dx, eye_y, eye_r, eye_r * 0.8, px));
      detail::blend(p, eye, detail::ellipse_cover(u, v, cx + eye_dx, eye_y, eye_r, eye_r * 0.8, px));
      detail::blend(p, lip, detail::ellipse_cover(u, v, cx, mouth_y, mouth_w, mouth_h, px));
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = std::clamp(p[static_cast<std::size_t>(c)], 0.0, 1.0);
    }
  }
  return img;
}

/// n faces; face i is drawn from rng.split(i).
inline Dataset synthetic_faces(std::size_t n, int resolution, const RngStream& rng, Split split = Split::train) {
  if (resolution < 4) throw std::invalid_argument("synthetic_faces: resolution must be >= 4");
  Dataset d{"synthetic-faces", split, Shape{resolution, resolution, 3}, {}, {}};
  d.items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = rng.split(i);
    d.items.push_back(synthetic_face(resolution, r));
  }
  return d;
}

}  // namespace colddiff

#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/core/rng.hpp"
#include "colddiff/degrade/blur.hpp"
#include "colddiff/degrade/desaturate.hpp"
#include "colddiff/degrade/downsample.hpp"
#include "colddiff/degrade/interp.hpp"
#include "colddiff/degrade/linear.hpp"
#include "colddiff/degrade/mask.hpp"
#include "colddiff/degrade/snow.hpp"

namespace colddiff {

// Order matches the alternatives of FamilyParams.
enum class Family { blur, mask, downsample, snow, desaturate, noise_interp, donor_interp, linear_test };

inline constexpr std::string_view family_name(Family f) {
  switch (f) {
    case Family::blur: return "blur";
    case Family::mask: return "mask";
    case Family::downsample: return "downsample";
    case Family::snow: return "snow";
    case Family::desaturate: return "desaturate";
    case Family::noise_interp: return "noise_interp";
    case Family::donor_interp: return "donor_interp";
    case Family::linear_test: return "linear_test";
  }
  return "unknown";
}

inline Family parse_family(std::string_view s) {
  for (Family f : {Family::blur, Family::mask, Family::downsample, Family::snow, Family::desaturate,
                   Family::noise_interp, Family::donor_interp, Family::linear_test}) {
    if (family_name(f) == s) return f;
  }
  if (s == "linear") return Family::linear_test;
  if (s == "noise") return Family::noise_interp;
  if (s == "animorph" || s == "donor") return Family::donor_interp;
  throw std::invalid_argument("unknown degradation family '" + std::string(s) + "'");
}

struct MaskParams {
  MaskSchedule schedule;
  bool solid_color{false};                 // blend toward a color instead of zero
  std::optional<std::vector<double>> color;  // drawn uniform in [0,1]^C per realization if absent
};

struct DesaturateParams {
  int steps{50};
};

struct NoiseInterpParams {
  InterpSchedule schedule;
};

struct DonorInterpParams {
  InterpSchedule schedule;
  std::shared_ptr<const std::vector<Image>> donors;
};

struct LinearParams {
  int steps{64};
  double scale{1.0};               // std of a randomly drawn direction
  std::optional<Image> direction;  // fixed e, if given
};

using FamilyParams = std::variant<BlurSchedule, MaskParams, DownsampleSchedule, SnowSchedule, DesaturateParams,
                                  NoiseInterpParams, DonorInterpParams, LinearParams>;

/// One operator family together with its full schedule.
struct DegradationSpec {
  std::string name;
  FamilyParams params;

  Family family() const { return static_cast<Family>(params.index()); }

  int steps() const {
    return std::visit(
        [](const auto& p) -> int {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, BlurSchedule>) return p.steps();
          else if constexpr (std::is_same_v<P, MaskParams>) return p.schedule.steps();
          else if constexpr (std::is_same_v<P, NoiseInterpParams> || std::is_same_v<P, DonorInterpParams>)
            return p.schedule.steps();
          else return p.steps;
        },
        params);
  }

  bool randomized() const {
    const Family f = family();
    if (f == Family::mask) {
      const auto& m = std::get<MaskParams>(params);
      return m.schedule.center_mode == MaskCenterMode::random || (m.solid_color && !m.color);
    }
    if (f == Family::linear_test) return !std::get<LinearParams>(params).direction.has_value();
    return f == Family::snow || f == Family::noise_interp || f == Family::donor_interp;
  }
};

/// A DegradationSpec with its randomness frozen for one image shape: the mask
/// center, snow seed, interpolation anchor, fill color or linear direction.
/// apply(x, t) is a pure function of (x, t) for the lifetime of the object.
class Degradation {
 public:
  Degradation(std::shared_ptr<const DegradationSpec> spec, Shape shape, RngStream rng)
      : spec_{std::move(spec)}, shape_{shape} {
    if (!spec_) throw std::invalid_argument("Degradation: null spec");
    switch (spec_->family()) {
      case Family::mask: {
        const auto& p = std::get<MaskParams>(spec_->params);
        center_ = draw_mask_center(shape.height, shape.width, p.schedule.center_mode, rng);
        if (p.solid_color) {
          if (p.color) {
            if (p.color->size() != static_cast<std::size_t>(shape.channels)) {
              throw std::invalid_argument("Degradation: fill color channel count mismatch");
            }
            color_ = *p.color;
          } else {
            for (int c = 0; c < shape.channels; ++c) color_.push_back(rng.uniform());
          }
        }
        break;
      }
      case Family::snow:
        if (shape.channels != 3) throw std::invalid_argument("snow degradation requires 3-channel images");
        snow_ = draw_snow_seed(shape.height, shape.width, std::get<SnowSchedule>(spec_->params), rng);
        break;
      case Family::desaturate:
        if (shape.channels != 3) throw std::invalid_argument("desaturate degradation requires 3-channel images");
        break;
      case Family::noise_interp: {
        anchor_ = Image(shape);
        for (double& v : anchor_.data()) v = rng.normal();
        break;
      }
      case Family::donor_interp: {
        const auto& p = std::get<DonorInterpParams>(spec_->params);
        if (!p.donors || p.donors->empty()) throw std::invalid_argument("donor_interp: empty donor set");
        anchor_ = (*p.donors)[rng.uniform_int(p.donors->size())];
        if (anchor_.shape() != shape) throw std::invalid_argument("donor_interp: donor shape mismatch");
        break;
      }
      case Family::linear_test: {
        const auto& p = std::get<LinearParams>(spec_->params);
        if (p.direction) {
          if (p.direction->shape() != shape) throw std::invalid_argument("linear_test: direction shape mismatch");
          anchor_ = *p.direction;
        } else {
          anchor_ = Image(shape);
          for (double& v : anchor_.data()) v = rng.normal(0.0, p.scale);
        }
        break;
      }
      default:
        break;
    }
  }

  Degradation(const DegradationSpec& spec, Shape shape, RngStream rng)
      : Degradation(std::make_shared<const DegradationSpec>(spec), shape, std::move(rng)) {}

  /// Interpolation (or linear) family anchored at a caller-supplied image.
  static Degradation anchored(std::shared_ptr<const DegradationSpec> spec, Image anchor) {
    const Family f = spec->family();
    if (f != Family::noise_interp && f != Family::donor_interp && f != Family::linear_test) {
      throw std::invalid_argument("Degradation::anchored: family has no anchor");
    }
    Degradation d(std::move(spec), anchor.shape());
    d.anchor_ = std::move(anchor);
    return d;
  }

  /// Solid-color mask family blending toward a caller-supplied color.
  static Degradation with_fill(std::shared_ptr<const DegradationSpec> spec, Shape shape, RngStream rng,
                               std::vector<double> color) {
    const auto* p = std::get_if<MaskParams>(&spec->params);
    if (!p || !p->solid_color) throw std::invalid_argument("Degradation::with_fill: spec is not a solid-color mask");
    if (color.size() != static_cast<std::size_t>(shape.channels)) {
      throw std::invalid_argument("Degradation::with_fill: color channel count mismatch");
    }
    Degradation d(std::move(spec), shape);
    d.center_ = draw_mask_center(shape.height, shape.width, p->schedule.center_mode, rng);
    d.color_ = std::move(color);
    return d;
  }

  const DegradationSpec& spec() const { return *spec_; }
  std::shared_ptr<const DegradationSpec> spec_ptr() const { return spec_; }
  Family family() const { return spec_->family(); }
  int steps() const { return spec_->steps(); }
  const Shape& shape() const { return shape_; }

  const Image& anchor() const { return anchor_; }
  const MaskCenter& mask_center() const { return center_; }
  const SnowSeed& snow_seed() const { return snow_; }
  const std::vector<double>& fill_color() const { return color_; }

  /// D(x, t).
  Image apply(const Image& x, int t) const {
    check_step(t, steps(), "Degradation::apply");
    if (x.shape() != shape_) {
      throw std::invalid_argument("Degradation::apply: image shape " + x.shape().str() + " does not match " +
                                  shape_.str());
    }
    if (t == 0) return x;
    return std::visit([&](const auto& p) { return apply_impl(p, x, t); }, spec_->params);
  }

  /// (D(x, s-1), D(x, s)). Blur reuses the lower level, which yields exactly the
  /// same values as two apply calls.
  std::pair<Image, Image> apply_adjacent(const Image& x, int s) const {
    if (s < 1) throw std::out_of_range("Degradation::apply_adjacent: step must be >= 1");
    if (family() == Family::blur) {
      Image lower = apply(x, s - 1);
      Image upper = blur_advance(lower, s - 1, s, std::get<BlurSchedule>(spec_->params));
      return {std::move(lower), std::move(upper)};
    }
    return {apply(x, s - 1), apply(x, s)};
  }

 private:
  Degradation(std::shared_ptr<const DegradationSpec> spec, Shape shape) : spec_{std::move(spec)}, shape_{shape} {}

  Image apply_impl(const BlurSchedule& p, const Image& x, int t) const { return blur_degrade(x, t, p); }
  Image apply_impl(const MaskParams& p, const Image& x, int t) const {
    return p.solid_color ? solid_color_mask_degrade(x, t, p.schedule, center_, color_)
                         : mask_degrade(x, t, p.schedule, center_);
  }
  Image apply_impl(const DownsampleSchedule& p, const Image& x, int t) const { return p.apply(x, t); }
  Image apply_impl(const SnowSchedule& p, const Image& x, int t) const { return snow_degrade(x, t, p, snow_); }
  Image apply_impl(const DesaturateParams& p, const Image& x, int t) const { return desaturate_degrade(x, t, p.steps); }
  Image apply_impl(const NoiseInterpParams& p, const Image& x, int t) const {
    return interp_degrade(x, t, p.schedule, anchor_);
  }
  Image apply_impl(const DonorInterpParams& p, const Image& x, int t) const {
    return interp_degrade(x, t, p.schedule, anchor_);
  }
  Image apply_impl(const LinearParams&, const Image& x, int t) const {
    Image out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + t * anchor_[i];
    return out;
  }

  std::shared_ptr<const DegradationSpec> spec_;
  Shape shape_;
  MaskCenter center_{};
  SnowSeed snow_{};
  Image anchor_;
  std::vector<double> color_;
};

/// Interpolation schedule of an interp-family spec.
inline const InterpSchedule& interp_schedule(const DegradationSpec& spec) {
  if (const auto* p = std::get_if<NoiseInterpParams>(&spec.params)) return p->schedule;
  if (const auto* p = std::get_if<DonorInterpParams>(&spec.params)) return p->schedule;
  throw std::invalid_argument("interp_schedule: spec '" + spec.name + "' is not an interpolation family");
}

}  // namespace colddiff

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/data/config.hpp"
#include "colddiff/degrade/degradation.hpp"

namespace colddiff {

/// Optional adjustments applied when a preset is built.
struct PresetOverrides {
  std::optional<int> steps;
  std::optional<BlurSchedule::Growth> blur_growth;
  std::optional<double> cosine_offset;
};

struct PresetEntry {
  std::string name;
  std::string description;
  std::function<DegradationSpec(const PresetOverrides&)> build;
};

namespace detail {

inline BlurSchedule::Growth growth_or(const PresetOverrides& o, BlurSchedule::Growth g) {
  return o.blur_growth.value_or(g);
}

inline std::vector<PresetEntry> make_registry() {
  using G = BlurSchedule::Growth;
  std::vector<PresetEntry> r;
  auto add = [&r](std::string name, std::string desc, std::function<FamilyParams(const PresetOverrides&)> fn) {
    r.push_back({name, std::move(desc), [name, fn](const PresetOverrides& o) { return DegradationSpec{name, fn(o)}; }});
  };

  add("blur/mnist", "11x11 Gaussian, sigma 7, applied recursively 40 times",
      [](const PresetOverrides& o) { return BlurSchedule::constant(11, 7.0, o.steps.value_or(40)); });
  add("blur/cifar10", "11x11 Gaussian, sigma_t = 0.01 t + 0.35, T = 50",
      [](const PresetOverrides& o) { return BlurSchedule::linear(11, 0.01, 0.35, o.steps.value_or(50)); });
  add("blur/celeba", "15x15 Gaussian, sigma_t = 1.01^(t-1) (compound; natural growth via override), T = 200",
      [](const PresetOverrides& o) {
        return BlurSchedule::exponential(15, 1.0, 0.01, o.steps.value_or(200), growth_or(o, G::compound));
      });
  add("blur/celeba-natural", "15x15 Gaussian, sigma_t = e^(0.01 (t-1)), T = 200",
      [](const PresetOverrides& o) {
        return BlurSchedule::exponential(15, 1.0, 0.01, o.steps.value_or(200), growth_or(o, G::natural));
      });
  add("blur/generation", "27x27 Gaussian over 300 steps, sigma starts at 1 and grows 1% per step",
      [](const PresetOverrides& o) {
        return BlurSchedule::exponential(27, 1.0, 0.01, o.steps.value_or(300), growth_or(o, G::compound));
      });

  for (const char* ds : {"mnist", "cifar10"}) {
    add(std::string("mask/") + ds, "randomly centered Gaussian mask, T = 50, beta_1 = 1, beta_{i+1} = beta_i + 0.1",
        [](const PresetOverrides& o) {
          return MaskParams{MaskSchedule::arithmetic(o.steps.value_or(50), 1.0, 0.1, MaskCenterMode::random), false, {}};
        });
  }
  add("mask/celeba", "centered Gaussian mask, T = 50, beta_1 = 1, beta_{i+1} = beta_i + 0.1",
      [](const PresetOverrides& o) {
        return MaskParams{MaskSchedule::arithmetic(o.steps.value_or(50), 1.0, 0.1, MaskCenterMode::image_center), false, {}};
      });
  add("mask/celeba-gen", "centered Gaussian mask blending toward a random solid color, T = 50",
      [](const PresetOverrides& o) {
        return MaskParams{MaskSchedule::arithmetic(o.steps.value_or(50), 1.0, 0.1, MaskCenterMode::image_center), true, {}};
      });

  add("downsample/mnist", "3 halvings to 4x4 after zero-padding 28x28 to 32x32",
      [](const PresetOverrides&) { return DownsampleSchedule{3, 4, 32}; });
  add("downsample/cifar10", "3 halvings, 32x32 to 4x4", [](const PresetOverrides&) { return DownsampleSchedule{3, 4, 0}; });
  add("downsample/celeba", "6 halvings, 128x128 to 2x2", [](const PresetOverrides&) { return DownsampleSchedule{6, 2, 0}; });

  add("snow/cifar10", "seed N(0.55, 0.3); severity 1.15 -> 0.7; wind 0.05 -> 16; T = 200",
      [](const PresetOverrides& o) { return SnowSchedule{0.55, 0.3, 1.15, 0.7, 0.05, 16.0, o.steps.value_or(200), 1.25}; });
  add("snow/celeba", "seed N(0.55, 0.3); severity 1.15 -> 0.55; wind 0.05 -> 20; T = 200",
      [](const PresetOverrides& o) { return SnowSchedule{0.55, 0.3, 1.15, 0.55, 0.05, 20.0, o.steps.value_or(200), 1.25}; });

  add("desaturate/cifar10", "alpha_t = t / T, T = 50", [](const PresetOverrides& o) { return DesaturateParams{o.steps.value_or(50)}; });
  add("desaturate/celeba", "alpha_t = t / T, T = 20", [](const PresetOverrides& o) { return DesaturateParams{o.steps.value_or(20)}; });

  auto cosine = [](const PresetOverrides& o, int steps, int horizon) {
    const int s = o.steps.value_or(steps);
    return InterpSchedule::cosine(s, std::max(s, horizon), o.cosine_offset.value_or(0.008));
  };
  add("noise/mnist", "fixed Gaussian noise anchor, first 700 steps of a 1000-step cosine schedule",
      [cosine](const PresetOverrides& o) { return NoiseInterpParams{cosine(o, 700, 1000)}; });
  add("noise/cifar10", "fixed Gaussian noise anchor, first 500 steps of a 1000-step cosine schedule",
      [cosine](const PresetOverrides& o) { return NoiseInterpParams{cosine(o, 500, 1000)}; });
  add("noise/celeba", "fixed Gaussian noise anchor, first 500 steps of a 1000-step cosine schedule",
      [cosine](const PresetOverrides& o) { return NoiseInterpParams{cosine(o, 500, 1000)}; });
  add("noise/cosine-1000", "fixed Gaussian noise anchor, full 1000-step cosine schedule",
      [cosine](const PresetOverrides& o) { return NoiseInterpParams{cosine(o, 1000, 1000)}; });
  add("animorph/celeba-afhq", "interpolation toward a donor image, 200-step cosine schedule (donors supplied at run time)",
      [](const PresetOverrides& o) {
        const int s = o.steps.value_or(200);
        return DonorInterpParams{InterpSchedule::cosine(s, s, o.cosine_offset.value_or(0.008)), nullptr};
      });
  add("linear/test", "D(x, s) = x + s e with random e ~ N(0, 1), T = 64",
      [](const PresetOverrides& o) { return LinearParams{o.steps.value_or(64), 1.0, std::nullopt}; });
  return r;
}

}  // namespace detail

inline const std::vector<PresetEntry>& preset_registry() {
  static const std::vector<PresetEntry> registry = detail::make_registry();
  return registry;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& e : preset_registry()) names.push_back(e.name);
  return names;
}

inline DegradationSpec make_preset(const std::string& name, const PresetOverrides& overrides = {}) {
  for (const auto& e : preset_registry()) {
    if (e.name == name) return e.build(overrides);
  }
  throw std::invalid_argument("unknown degradation preset '" + name + "'");
}

/// Degradation section of the config schema.
inline ConfigSchema degradation_schema() {
  return {
      {"degradation.preset", ValueType::string, "", "registered preset name"},
      {"degradation.steps", ValueType::integer, "", "override the number of steps T"},
      {"degradation.blur_growth", ValueType::string, "", "compound | natural"},
      {"degradation.cosine_offset", ValueType::real, "", "cosine schedule offset"},
  };
}

inline DegradationSpec spec_from_config(const Config& cfg) {
  if (!cfg.has("degradation.preset")) throw std::invalid_argument("config: degradation.preset is required");
  PresetOverrides o;
  if (cfg.has("degradation.steps")) o.steps = static_cast<int>(cfg.get_int("degradation.steps"));
  if (cfg.has("degradation.blur_growth")) {
    const std::string g = cfg.get_string("degradation.blur_growth");
    if (g == "compound") o.blur_growth = BlurSchedule::Growth::compound;
    else if (g == "natural") o.blur_growth = BlurSchedule::Growth::natural;
    else throw std::invalid_argument("degradation.blur_growth must be compound or natural");
  }
  if (cfg.has("degradation.cosine_offset")) o.cosine_offset = cfg.get_real("degradation.cosine_offset");
  return make_preset(cfg.get_string("degradation.preset"), o);
}

/// Resolved parameters of a spec in the config text format.
inline std::string describe(const DegradationSpec& spec) {
  std::ostringstream out;
  out << "[degradation]\n";
  out << "preset = " << spec.name << "\n";
  out << "family = " << family_name(spec.family()) << "\n";
  out << "steps = " << spec.steps() << "\n";
  std::visit(
      [&out](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, BlurSchedule>) {
          out << "kernel_size = " << p.kernel_size() << "\n";
          out << "sigma_first = " << p.sigmas().front() << "\n";
          out << "sigma_last = " << p.sigmas().back() << "\n";
        } else if constexpr (std::is_same_v<P, MaskParams>) {
          out << "beta_first = " << p.schedule.betas.front() << "\n";
          out << "beta_last = " << p.schedule.betas.back() << "\n";
          out << "center = " << (p.schedule.center_mode == MaskCenterMode::random ? "random" : "image_center") << "\n";
          out << "fill = " << (p.solid_color ? "solid_color" : "zero") << "\n";
        } else if constexpr (std::is_same_v<P, DownsampleSchedule>) {
          out << "final_res = " << p.final_res << "\n";
          out << "pad_to = " << p.pad_to << "\n";
        } else if constexpr (std::is_same_v<P, SnowSchedule>) {
          out << "seed_mu = " << p.mu << "\nseed_sigma = " << p.sigma << "\n";
          out << "c0 = " << p.c0_start << "," << p.c0_end << "\nc1 = " << p.c1_start << "," << p.c1_end << "\n";
          out << "zoom = " << p.zoom << "\n";
        } else if constexpr (std::is_same_v<P, NoiseInterpParams> || std::is_same_v<P, DonorInterpParams>) {
          out << "alpha_1 = " << p.schedule.alpha(1) << "\n";
          out << "alpha_T = " << p.schedule.alphas().back() << "\n";
        } else if constexpr (std::is_same_v<P, LinearParams>) {
          out << "direction_scale = " << p.scale << "\n";
        }
      },
      spec.params);
  return out.str();
}

}  // namespace colddiff

#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "colddiff/core/parallel.hpp"
#include "colddiff/degrade/presets.hpp"
#include "colddiff/restore/restorer.hpp"
#include "colddiff/sample/samplers.hpp"

namespace colddiff {

struct StabilityConfig {
  std::vector<std::string> presets{"linear/test"};  // preset names or bare family names
  std::vector<double> eps{0.1, 1.0, 10.0};
  std::vector<int> steps{64};
  PerturbMode mode{PerturbMode::fixed_offset};
  int images{4};
  int height{16};
  int width{16};
  int channels{1};  // snow and desaturate always run with 3
  std::uint64_t seed{0};
};

struct StabilityCell {
  std::string preset;
  Family family{};
  double eps{0.0};
  int t{0};
  double naive_drift{0.0};  // max over images of |x_0 sampled - x_0|_inf
  double cold_drift{0.0};
};

struct StabilityResult {
  StabilityConfig config;
  std::vector<StabilityCell> cells;  // preset-major, then eps, then t
};

inline std::string resolve_preset(const std::string& name) {
  if (name.find('/') != std::string::npos) return name;
  static const std::vector<std::pair<std::string, std::string>> defaults{
      {"linear", "linear/test"},         {"linear_test", "linear/test"},   {"blur", "blur/mnist"},
      {"mask", "mask/cifar10"},          {"downsample", "downsample/cifar10"}, {"snow", "snow/cifar10"},
      {"desaturate", "desaturate/cifar10"}, {"noise", "noise/mnist"},      {"noise_interp", "noise/mnist"},
      {"animorph", "animorph/celeba-afhq"}, {"donor_interp", "animorph/celeba-afhq"}};
  for (const auto& [k, v] : defaults)
    if (k == name) return v;
  throw std::invalid_argument("unknown degradation family or preset '" + name + "'");
}

/// Runs both samplers from x_t = D(x_0, t) under a PerturbedOracle for every
/// (preset, eps, t) cell. Cell k draws from RngStream(seed).split(k).
inline StabilityResult stability_sweep(const StabilityConfig& cfg) {
  if (cfg.presets.empty() || cfg.eps.empty() || cfg.steps.empty()) throw std::invalid_argument("stability_sweep: empty grid");
  if (cfg.images < 1) throw std::invalid_argument("stability_sweep: need at least one image");
  struct Plan {
    std::string preset;
    std::shared_ptr<const DegradationSpec> spec;
    Shape shape;
  };
  std::vector<Plan> plans;
  for (std::size_t p = 0; p < cfg.presets.size(); ++p) {
    const std::string name = resolve_preset(cfg.presets[p]);
    DegradationSpec spec = make_preset(name);
    const int tmax = *std::max_element(cfg.steps.begin(), cfg.steps.end());
    if (spec.family() == Family::linear_test && tmax > spec.steps()) std::get<LinearParams>(spec.params).steps = tmax;
    for (int t : cfg.steps) {
      if (t < 1 || t > spec.steps()) {
        throw std::invalid_argument("stability_sweep: t=" + std::to_string(t) + " outside [1, " + std::to_string(spec.steps()) +
                                    "] for " + name);
      }
    }
    const bool rgb = spec.family() == Family::snow || spec.family() == Family::desaturate;
    Shape shape{cfg.height, cfg.width, rgb ? 3 : cfg.channels};
    if (auto* d = std::get_if<DonorInterpParams>(&spec.params); d && !d->donors) {
      auto donors = std::make_shared<std::vector<Image>>();
      RngStream r = RngStream(cfg.seed, 0xD0).split(p);
      for (int i = 0; i < 4; ++i) {
        Image x(shape);
        for (double& v : x.data()) v = r.uniform();
        donors->push_back(std::move(x));
      }
      d->donors = donors;
    }
    plans.push_back({name, std::make_shared<const DegradationSpec>(std::move(spec)), shape});
  }

  StabilityResult res;
  res.config = cfg;
  for (const auto& pl : plans)
    for (double e : cfg.eps)
      for (int t : cfg.steps) res.cells.push_back({pl.preset, pl.spec->family(), e, t, 0.0, 0.0});

  const std::size_t per_plan = cfg.eps.size() * cfg.steps.size();
  parallel_for(res.cells.size(), [&](std::size_t k) {
    StabilityCell& cell = res.cells[k];
    const Plan& pl = plans[k / per_plan];
    const RngStream rng = RngStream(cfg.seed).split(k);
    for (int i = 0; i < cfg.images; ++i) {
      const RngStream ri = rng.split(static_cast<std::uint64_t>(i));
      auto d = std::make_shared<const Degradation>(pl.spec, pl.shape, ri.split(0));
      RngStream rx = ri.split(1);
      Image x0(pl.shape);
      for (double& v : x0.data()) v = rx.uniform();
      auto oracle = std::make_shared<OracleRestorer>(d);
      oracle->add(x0);
      PerturbedOracle model(oracle, cell.eps, cfg.mode, cfg.seed ^ k);
      const Image xt = d->apply(x0, cell.t);
      cell.naive_drift = std::max(cell.naive_drift, max_abs_diff(naive_sample(xt, cell.t, model, *d).final(), x0));
      cell.cold_drift = std::max(cell.cold_drift, max_abs_diff(cold_sample(xt, cell.t, model, *d).final(), x0));
    }
  });
  return res;
}

inline void write_stability_table(const StabilityResult& r, std::ostream& os) {
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-12s %10s %6s %14s %14s\n", "preset", "family", "eps", "t", "naive_drift", "cold_drift");
  os << line;
  for (const auto& c : r.cells) {
    std::snprintf(line, sizeof line, "%-22s %-12s %10.4g %6d %14.6e %14.6e\n", c.preset.c_str(),
                  std::string(family_name(c.family)).c_str(), c.eps, c.t, c.naive_drift, c.cold_drift);
    os << line;
  }
}

inline void write_stability_jsonl(const StabilityResult& r, std::ostream& os) {
  for (const auto& c : r.cells) {
    nlohmann::json j{{"preset", c.preset},
                     {"family", std::string(family_name(c.family))},
                     {"eps", c.eps},
                     {"t", c.t},
                     {"mode", perturb_mode_name(r.config.mode)},
                     {"naive_drift", c.naive_drift},
                     {"cold_drift", c.cold_drift}};
    os << j.dump() << "\n";
  }
}

}  // namespace colddiff

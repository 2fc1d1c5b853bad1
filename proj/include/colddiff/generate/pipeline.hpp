#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "colddiff/core/parallel.hpp"
#include "colddiff/degrade/degradation.hpp"
#include "colddiff/generate/prior.hpp"
#include "colddiff/restore/restorer.hpp"
#include "colddiff/sample/samplers.hpp"

namespace colddiff {

/// Builds the frozen degradation a generated trajectory runs under, given its x_T.
using Realizer = std::function<Degradation(const Image& x_T, RngStream& rng)>;

/// Default realisation: interpolation families anchor at x_T itself, solid-color
/// masks fill with the x_T channel means, everything else draws as usual.
inline Realizer default_realizer(std::shared_ptr<const DegradationSpec> spec) {
  return [spec](const Image& x_T, RngStream& rng) {
    switch (spec->family()) {
      case Family::noise_interp:
      case Family::donor_interp:
      case Family::linear_test:
        return Degradation::anchored(spec, x_T);
      case Family::mask:
        if (std::get<MaskParams>(spec->params).solid_color) {
          return Degradation::with_fill(spec, x_T.shape(), rng, channel_means(x_T));
        }
        break;
      default:
        break;
    }
    return Degradation(spec, x_T.shape(), rng);
  };
}

struct GenerationPipeline {
  std::shared_ptr<const PriorModel> prior;
  std::shared_ptr<const DegradationSpec> spec;
  std::shared_ptr<const Restorer> model;
  double sigma{0.002};
  std::optional<int> start_step;  // defaults to T
  Realizer realize;               // defaults to default_realizer(spec)
  /// noise_interp only: use the noise-estimating update rather than the improved sampler.
  bool estimate_noise{true};
};

struct GenerationResult {
  std::vector<Image> starts;   // x_T after symmetry breaking
  std::vector<Image> outputs;  // final iterates
};

/// n independent draws: prior from rng.split(0), symmetry noise from rng.split(1),
/// degradation realisation from rng.split(2); item i uses .split(i) of each.
inline GenerationResult generate(const GenerationPipeline& p, std::size_t n, const RngStream& rng) {
  if (!p.prior || !p.spec || !p.model) throw std::invalid_argument("generate: pipeline needs a prior, a spec and a model");
  if (!(p.sigma >= 0.0)) throw std::invalid_argument("generate: sigma must be >= 0");
  const int T = p.spec->steps();
  const int t = p.start_step.value_or(T);
  GenerationResult res;
  if (n == 0) return res;

  std::vector<Image> raw = p.prior->sample_batch(n, rng.split(0));
  res.starts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = rng.split(1).split(i);
    res.starts[i] = break_symmetry(raw[i], p.sigma, r);
  }

  if (p.spec->family() == Family::noise_interp && p.estimate_noise) {
    const InterpSchedule& alpha = interp_schedule(*p.spec);
    res.outputs.resize(n);
    parallel_for(n, [&](std::size_t i) { res.outputs[i] = cold_sample_estimated(res.starts[i], t, *p.model, alpha).final(); });
    return res;
  }

  const Realizer realize = p.realize ? p.realize : default_realizer(p.spec);
  std::vector<Degradation> degs;
  degs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = rng.split(2).split(i);
    degs.push_back(realize(res.starts[i], r));
  }
  auto trajectories = sample_many(Sampler::cold, res.starts, t, *p.model, degs);
  res.outputs.reserve(n);
  for (auto& tr : trajectories) res.outputs.push_back(std::move(tr.iterates.back()));
  return res;
}

}  // namespace colddiff

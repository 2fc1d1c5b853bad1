#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "colddiff/colddiff.hpp"

namespace colddiff::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitMissingInput = 3;
inline constexpr int kExitNumerical = 4;

inline ConfigSchema full_schema() {
  ConfigSchema s = degradation_schema();
  auto add = [&s](std::string key, ValueType t, std::string def, std::string help) {
    s.push_back({std::move(key), t, std::move(def), std::move(help)});
  };
  add("run.seed", ValueType::integer, "0", "master seed");
  add("run.threads", ValueType::integer, "0", "worker threads, 0 = all cores");
  add("run.out", ValueType::string, "runs", "parent directory of run directories");
  add("data.source", ValueType::string, "mnist", "mnist | cifar10 | faces | path");
  add("data.split", ValueType::string, "", "train | test (default depends on the subcommand)");
  add("data.limit", ValueType::integer, "", "use at most this many images");
  add("data.resolution", ValueType::integer, "32", "side length for image folders and synthetic faces");
  add("data.donors", ValueType::string, "", "donor image source for animorph presets");
  add("data.random_crop", ValueType::boolean, "false", "training augmentation: pad-4 random crop");
  add("data.random_flip", ValueType::boolean, "false", "training augmentation: horizontal flip");
  add("degrade.t", ValueType::integer, "", "degradation level (default T)");
  add("train.steps", ValueType::integer, "4000", "optimizer steps");
  add("train.batch", ValueType::integer, "16", "images per minibatch");
  add("train.accumulate", ValueType::integer, "2", "minibatches per optimizer step");
  add("train.lr", ValueType::real, "1e-3", "Adam learning rate");
  add("train.warmup", ValueType::integer, "200", "linear learning-rate warmup steps");
  add("train.schedule", ValueType::string, "constant", "constant | cosine learning rate after warmup");
  add("train.ema_decay", ValueType::real, "0.995", "EMA decay");
  add("train.ema_every", ValueType::integer, "10", "EMA update period in steps");
  add("train.arch", ValueType::string, "", "architecture descriptor, e.g. c1-s32.64.128-e32");
  add("train.log_every", ValueType::integer, "100", "loss logging period");
  add("model.checkpoint", ValueType::string, "", "checkpoint file");
  add("model.weights", ValueType::string, "ema", "ema | live");
  add("sample.t", ValueType::integer, "", "starting step (default T)");
  add("sample.sampler", ValueType::string, "both", "naive | cold | both");
  add("sample.trajectory", ValueType::boolean, "true", "export the first trajectory");
  add("generate.n", ValueType::integer, "64", "number of samples");
  add("generate.prior", ValueType::string, "gmm", "gmm | lowres | solid | donor | prior file");
  add("generate.components", ValueType::integer, "1", "GMM components");
  add("generate.sigma", ValueType::real, "0.002", "symmetry-breaking noise");
  add("eval.a", ValueType::string, "", "first set: dataset source or feature file");
  add("eval.b", ValueType::string, "", "second set: dataset source or feature file");
  add("eval.paired", ValueType::boolean, "false", "also report per-pair RMSE and SSIM");
  add("stability.family", ValueType::string, "linear", "comma-separated families or presets");
  add("stability.eps", ValueType::real_list, "0.1,1,10", "perturbation sizes");
  add("stability.t", ValueType::real_list, "64", "starting steps");
  add("stability.mode", ValueType::string, "fixed-offset", "fixed-offset | seeded-random | adversarial-constant");
  add("stability.images", ValueType::integer, "4", "images per cell");
  add("stability.size", ValueType::integer, "16", "image side length");
  add("output.columns", ValueType::integer, "8", "grid columns");
  return s;
}

/// State of one invocation: merged config, run directory and artifact list.
struct Run {
  std::string command;
  Config cfg;
  bool dry_run{false};
  fs::path dir;
  std::vector<std::string> artifacts;
  std::string started;
  std::vector<std::string> argv;
  std::ostream* out{&std::cout};

  std::uint64_t seed() const { return static_cast<std::uint64_t>(cfg.get_int("run.seed")); }

  fs::path artifact(const std::string& name) {
    if (!fs::exists(dir)) {
      fs::create_directories(dir);
      std::ofstream(dir / "config.ini") << cfg.dump();
      artifacts.push_back("config.ini");
    }
    artifacts.push_back(name);
    return dir / name;
  }
};

inline std::string opt_string(const Config& cfg, const std::string& key) { return cfg.maybe(key).value_or(""); }

inline std::string utc_stamp(std::chrono::system_clock::time_point t, const char* fmt) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}

inline void open_run_dir(Run& run) {
  const auto now = std::chrono::system_clock::now();
  run.started = utc_stamp(now, "%Y-%m-%dT%H:%M:%SZ");
  const fs::path root = run.cfg.get_string("run.out");
  const std::string base = utc_stamp(now, "%Y%m%dT%H%M%SZ") + "-seed" + std::to_string(run.seed());
  fs::path dir = root / (run.command + "-" + base);
  for (int k = 2; fs::exists(dir); ++k) dir = root / (run.command + "-" + base + "-" + std::to_string(k));
  run.dir = dir;
}

inline void write_manifest(const Run& run, int exit_code, const std::string& error = "") {
  if (run.dry_run || !fs::exists(run.dir)) return;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : run.cfg.values()) cfg[k] = v;
  nlohmann::json j{{"subcommand", run.command},
                   {"version", COLDDIFF_VERSION},
                   {"argv", run.argv},
                   {"config", cfg},
                   {"seeds", {{"run", run.seed()}}},
                   {"threads", thread_count()},
                   {"start", run.started},
                   {"end", utc_stamp(std::chrono::system_clock::now(), "%Y-%m-%dT%H:%M:%SZ")},
                   {"artifacts", run.artifacts},
                   {"exit_code", exit_code}};
  if (!error.empty()) j["error"] = error;
  std::ofstream(run.dir / "manifest.json") << j.dump(2) << "\n";
}

inline Split split_or(const Run& run, Split fallback) {
  const std::string s = opt_string(run.cfg, "data.split");
  if (s.empty()) return fallback;
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw std::invalid_argument("data.split must be train or test, got '" + s + "'");
}

inline SourceOptions source_options(const Run& run, Split split, std::optional<std::size_t> default_limit = std::nullopt) {
  SourceOptions o;
  o.split = split;
  o.resolution = static_cast<int>(run.cfg.get_int("data.resolution"));
  o.seed = run.seed();
  if (run.cfg.has("data.limit")) o.limit = static_cast<std::size_t>(run.cfg.get_int("data.limit"));
  else o.limit = default_limit;
  return o;
}

inline Dataset load_data(const Run& run, Split fallback, std::optional<std::size_t> default_limit = std::nullopt) {
  Dataset d = load_source(run.cfg.get_string("data.source"), source_options(run, split_or(run, fallback), default_limit));
  if (d.empty()) throw MissingInputError("dataset '" + run.cfg.get_string("data.source") + "' is empty");
  return d;
}

/// The configured preset, with donors attached for animorph presets.
inline std::shared_ptr<const DegradationSpec> build_spec(const Run& run, const std::optional<std::string>& fallback_preset = std::nullopt) {
  Config cfg = run.cfg;
  if (!cfg.has("degradation.preset")) {
    if (!fallback_preset) throw std::invalid_argument("--preset is required");
    cfg.set("degradation.preset", *fallback_preset);
  }
  auto spec = std::make_shared<DegradationSpec>(spec_from_config(cfg));
  if (auto* p = std::get_if<DonorInterpParams>(&spec->params); p && !p->donors) {
    const std::string src = opt_string(run.cfg, "data.donors");
    if (src.empty()) throw std::invalid_argument("preset '" + spec->name + "' needs --donors");
    SourceOptions o = source_options(run, Split::train);
    p->donors = std::make_shared<const std::vector<Image>>(load_source(src, o).items);
  }
  return spec;
}

inline std::vector<Degradation> realize_all(const std::shared_ptr<const DegradationSpec>& spec, const Dataset& d, std::uint64_t seed) {
  std::vector<Degradation> out;
  out.reserve(d.size());
  const RngStream rng(seed, 0xDE9);
  for (std::size_t i = 0; i < d.size(); ++i) out.emplace_back(spec, d.shape, rng.split(i));
  return out;
}

inline int columns(const Run& run) { return static_cast<int>(run.cfg.get_int("output.columns")); }

inline void plan(Run& run, const std::vector<std::string>& lines) {
  std::ostream& o = *run.out;
  o << "plan: " << run.command << "\n";
  o << "run directory: " << run.dir.string() << (run.dry_run ? " (dry run, not created)" : "") << "\n";
  for (const auto& l : lines) o << "  " << l << "\n";
  if (run.dry_run) o << "effective config:\n" << run.cfg.dump();
}

inline void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw std::invalid_argument(std::string(what) + " is required");
  if (!fs::exists(path)) throw MissingInputError(std::string(what) + " not found: " + path);
}

struct LoadedModel {
  Checkpoint ck;
  std::shared_ptr<const DegradationSpec> spec;
  std::shared_ptr<NeuralRestorer> model;
};

inline LoadedModel load_model(const Run& run) {
  const std::string path = opt_string(run.cfg, "model.checkpoint");
  require_file(path, "--checkpoint");
  LoadedModel m;
  m.ck = load_checkpoint(path);
  m.spec = build_spec(run, m.ck.preset);
  const std::string w = run.cfg.get_string("model.weights");
  if (w != "ema" && w != "live") throw std::invalid_argument("model.weights must be ema or live");
  m.model = std::make_shared<NeuralRestorer>(NeuralRestorer::from_checkpoint(m.ck, m.spec->steps(), w == "ema"));
  return m;
}

// ---- subcommands ---------------------------------------------------------

inline int cmd_presets(Run& run) {
  for (const auto& e : preset_registry()) *run.out << e.name << "\t" << e.description << "\n";
  return kExitOk;
}

inline int cmd_degrade(Run& run) {
  auto spec = build_spec(run);
  const int T = spec->steps();
  const int t = run.cfg.has("degrade.t") ? static_cast<int>(run.cfg.get_int("degrade.t")) : T;
  if (t < 0 || t > T) throw std::invalid_argument("--t must lie in [0, " + std::to_string(T) + "]");
  open_run_dir(run);
  plan(run, {"preset " + spec->name + " (T = " + std::to_string(T) + ")", "t = " + std::to_string(t),
             "data " + run.cfg.get_string("data.source")});
  if (run.dry_run) return kExitOk;
  Dataset data = load_data(run, Split::test, 16);
  auto degs = realize_all(spec, data, run.seed());
  std::vector<Image> out(data.size());
  parallel_for(data.size(), [&](std::size_t i) { out[i] = degs[i].apply(data[i], t); });
  save_image_grid(data.items, columns(run), run.artifact("clean.png").string());
  save_image_grid(out, columns(run), run.artifact("degraded_t" + std::to_string(t) + ".png").string());
  *run.out << "wrote " << out.size() << " images to " << run.dir.string() << "\n";
  return kExitOk;
}

inline int cmd_train(Run& run) {
  auto spec = build_spec(run);
  TrainHyper h;
  h.steps = run.cfg.get_int("train.steps");
  h.batch = static_cast<int>(run.cfg.get_int("train.batch"));
  h.accumulate = static_cast<int>(run.cfg.get_int("train.accumulate"));
  h.lr = run.cfg.get_real("train.lr");
  h.warmup = run.cfg.get_int("train.warmup");
  const std::string schedule = run.cfg.get_string("train.schedule");
  if (schedule != "constant" && schedule != "cosine") throw std::invalid_argument("train.schedule must be constant or cosine, got '" + schedule + "'");
  h.cosine = schedule == "cosine";
  h.ema_decay = run.cfg.get_real("train.ema_decay");
  h.ema_every = static_cast<int>(run.cfg.get_int("train.ema_every"));
  h.augment.random_crop = run.cfg.get_bool("data.random_crop");
  h.augment.random_flip = run.cfg.get_bool("data.random_flip");
  h.validate();
  const long long log_every = std::max<long long>(1, run.cfg.get_int("train.log_every"));
  open_run_dir(run);
  plan(run, {"preset " + spec->name, "steps " + std::to_string(h.steps) + ", batch " + std::to_string(h.batch) + " x " +
                                         std::to_string(h.accumulate) + ", lr " + std::to_string(h.lr),
             "data " + run.cfg.get_string("data.source")});
  if (run.dry_run) return kExitOk;
  Dataset data = load_data(run, Split::train);
  Architecture arch;
  arch.channels = data.shape.channels;
  if (!opt_string(run.cfg, "train.arch").empty()) arch = Architecture::parse(opt_string(run.cfg, "train.arch"));
  if (arch.channels != data.shape.channels) throw std::invalid_argument("architecture channels do not match the data");
  std::ofstream losses(run.artifact("loss.jsonl"));
  double window = 0.0;
  auto on_step = [&](long long step, double loss) {
    losses << nlohmann::json{{"step", step}, {"loss", loss}}.dump() << "\n";
    window += loss;
    if (step % log_every == 0) {
      log::info("step " + std::to_string(step) + " loss " + std::to_string(window / static_cast<double>(log_every)));
      window = 0.0;
    }
  };
  TrainResult res = train_restorer(data.items, spec, arch, h, RngStream(run.seed()), on_step);
  Checkpoint ck{arch, spec->name, run.seed(), static_cast<std::uint64_t>(res.steps), res.live.params(), res.ema.shadow};
  save_checkpoint(ck, run.artifact("checkpoint.cdck").string());
  *run.out << "checkpoint " << (run.dir / "checkpoint.cdck").string() << "\n";
  return kExitOk;
}

inline void write_report(Run& run, const std::string& name, const MetricReport& r, const std::string& label, nlohmann::json& summary) {
  std::ofstream f(run.artifact(name), std::ios::app);
  write_metric_jsonl(r, f, label);
  summary[label] = metric_summary(r);
}

inline int cmd_restore(Run& run) {
  open_run_dir(run);
  require_file(opt_string(run.cfg, "model.checkpoint"), "--checkpoint");
  plan(run, {"checkpoint " + opt_string(run.cfg, "model.checkpoint"), "data " + run.cfg.get_string("data.source")});
  if (run.dry_run) return kExitOk;
  LoadedModel m = load_model(run);
  const int T = m.spec->steps();
  const int t = run.cfg.has("sample.t") ? static_cast<int>(run.cfg.get_int("sample.t")) : T;
  if (t < 1 || t > T) throw std::invalid_argument("--t must lie in [1, " + std::to_string(T) + "]");
  Dataset data = load_data(run, Split::test, 16);
  auto degs = realize_all(m.spec, data, run.seed());
  std::vector<Image> xt(data.size());
  parallel_for(data.size(), [&](std::size_t i) { xt[i] = degs[i].apply(data[i], t); });
  std::vector<int> ts(data.size(), t);
  std::vector<Image> rec = m.model->restore_batch(xt, ts);
  nlohmann::json summary;
  write_report(run, "metrics.jsonl", evaluate_pairs(xt, data.items), "degraded", summary);
  write_report(run, "metrics.jsonl", evaluate_pairs(rec, data.items), "restored", summary);
  save_image_grid(data.items, columns(run), run.artifact("clean.png").string());
  save_image_grid(xt, columns(run), run.artifact("degraded.png").string());
  save_image_grid(rec, columns(run), run.artifact("restored.png").string());
  *run.out << summary.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_sample(Run& run) {
  open_run_dir(run);
  require_file(opt_string(run.cfg, "model.checkpoint"), "--checkpoint");
  const std::string which = run.cfg.get_string("sample.sampler");
  if (which != "naive" && which != "cold" && which != "both") throw std::invalid_argument("--sampler must be naive, cold or both");
  plan(run, {"checkpoint " + opt_string(run.cfg, "model.checkpoint"), "sampler " + which, "data " + run.cfg.get_string("data.source")});
  if (run.dry_run) return kExitOk;
  LoadedModel m = load_model(run);
  const int T = m.spec->steps();
  const int t = run.cfg.has("sample.t") ? static_cast<int>(run.cfg.get_int("sample.t")) : T;
  if (t < 1 || t > T) throw std::invalid_argument("--t must lie in [1, " + std::to_string(T) + "]");
  Dataset data = load_data(run, Split::test, 16);
  auto degs = realize_all(m.spec, data, run.seed());
  std::vector<Image> xt(data.size());
  parallel_for(data.size(), [&](std::size_t i) { xt[i] = degs[i].apply(data[i], t); });
  RandomProjectionExtractor features;
  nlohmann::json summary;
  auto report = [&](const std::vector<Image>& imgs, const std::string& label) {
    MetricReport r = evaluate_pairs(imgs, data.items);
    if (imgs.size() >= 2) {
      r.proxy = frechet_proxy(imgs, data.items, features);
      r.protocol = features.descriptor() + ", n=" + std::to_string(imgs.size());
    }
    write_report(run, "metrics.jsonl", r, label, summary);
  };
  report(xt, "degraded");
  save_image_grid(data.items, columns(run), run.artifact("clean.png").string());
  save_image_grid(xt, columns(run), run.artifact("degraded.png").string());
  for (Sampler s : {Sampler::naive, Sampler::cold}) {
    if (which != "both" && which != sampler_name(s)) continue;
    auto trs = sample_many(s, xt, t, *m.model, degs, data.items);
    std::vector<Image> finals;
    for (const auto& tr : trs) finals.push_back(tr.final());
    report(finals, sampler_name(s));
    save_image_grid(finals, columns(run), run.artifact(sampler_name(s) + ".png").string());
    if (run.cfg.get_bool("sample.trajectory") && !trs.empty()) {
      const std::string sub = "trajectory_" + sampler_name(s);
      export_trajectory(trs.front(), (run.dir / sub).string());
      run.artifacts.push_back(sub + "/");
    }
  }
  *run.out << summary.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_generate(Run& run) {
  open_run_dir(run);
  require_file(opt_string(run.cfg, "model.checkpoint"), "--checkpoint");
  const std::string prior_kind = run.cfg.get_string("generate.prior");
  const auto n = static_cast<std::size_t>(std::max<std::int64_t>(0, run.cfg.get_int("generate.n")));
  const double sigma = run.cfg.get_real("generate.sigma");
  plan(run, {"checkpoint " + opt_string(run.cfg, "model.checkpoint"), "prior " + prior_kind, "n = " + std::to_string(n),
             "sigma = " + std::to_string(sigma)});
  if (run.dry_run) return kExitOk;
  LoadedModel m = load_model(run);
  std::shared_ptr<const PriorModel> prior;
  std::optional<Dataset> train;
  auto training_data = [&]() -> const Dataset& {
    if (!train) train = load_data(run, Split::train);
    return *train;
  };
  if (prior_kind == "gmm") {
    const int K = static_cast<int>(run.cfg.get_int("generate.components"));
    auto fit = fit_channel_mean_gmm(training_data(), K, RngStream(run.seed(), 0x63D));
    prior = std::make_shared<GmmPrior>(fit.model, training_data().shape);
  } else if (prior_kind == "lowres") {
    prior = std::make_shared<LowResGaussianPrior>(LowResGaussianPrior::fit(training_data()));
  } else if (prior_kind == "solid") {
    prior = std::make_shared<SolidColorPrior>(training_data().shape);
  } else if (prior_kind == "donor") {
    prior = std::make_shared<DonorPrior>(std::make_shared<const std::vector<Image>>(training_data().items));
  } else {
    require_file(prior_kind, "prior file");
    prior = load_prior(prior_kind);
  }
  if (prior_kind == "gmm" || prior_kind == "lowres") save_prior(*prior, run.artifact("prior.cdpr").string());

  GenerationPipeline p;
  p.prior = prior;
  p.spec = m.spec;
  p.model = m.model;
  p.sigma = sigma;
  GenerationResult res = generate(p, n, RngStream(run.seed(), 0x6E4));
  nlohmann::json summary{{"n", n}, {"prior", prior->kind()}, {"sigma", sigma}};
  if (n > 0) {
    save_image_grid(res.outputs, columns(run), run.artifact("generated.png").string());
    save_image_grid(res.starts, columns(run), run.artifact("starts.png").string());
    save_image_dir(res.outputs, run.artifact("samples").string(), "sample");
  }
  if (n >= 2) {
    try {
      Dataset test = load_data(run, Split::test);
      RandomProjectionExtractor features;
      summary["proxy_generated"] = frechet_proxy(res.outputs, test.items, features);
      summary["proxy_prior"] = frechet_proxy(res.starts, test.items, features);
      summary["protocol"] = features.descriptor() + ", reference n=" + std::to_string(test.size());
    } catch (const MissingInputError& e) {
      log::warn(std::string("no held-out split for the proxy: ") + e.what());
    }
  }
  std::ofstream(run.artifact("summary.json")) << summary.dump(2) << "\n";
  *run.out << summary.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_eval(Run& run) {
  const std::string a = opt_string(run.cfg, "eval.a"), b = opt_string(run.cfg, "eval.b");
  if (a.empty() || b.empty()) throw std::invalid_argument("--a and --b are required");
  open_run_dir(run);
  plan(run, {"a = " + a, "b = " + b});
  if (run.dry_run) return kExitOk;
  auto is_features = [](const std::string& s) { return detail::lower_ext(s) == ".cdft"; };
  nlohmann::json summary;
  if (is_features(a) || is_features(b)) {
    if (!is_features(a) || !is_features(b)) throw std::invalid_argument("feature files can only be compared with feature files");
    require_file(a, "--a");
    require_file(b, "--b");
    FeatureFile fa = load_features(a), fb = load_features(b);
    summary["proxy"] = frechet_from_features(fa.features, fb.features);
    summary["protocol"] = fa.descriptor + " vs " + fb.descriptor;
  } else {
    const SourceOptions o = source_options(run, split_or(run, Split::test));
    Dataset da = load_source(a, o), db = load_source(b, o);
    RandomProjectionExtractor features;
    MetricReport r;
    if (run.cfg.get_bool("eval.paired")) r = evaluate_pairs(da.items, db.items);
    r.proxy = frechet_proxy(da.items, db.items, features);
    r.protocol = features.descriptor() + ", n=" + std::to_string(da.size()) + "/" + std::to_string(db.size());
    std::ofstream table(run.artifact("report.txt"));
    write_metric_table(r, table, a + " vs " + b);
    std::ofstream lines(run.artifact("report.jsonl"));
    write_metric_jsonl(r, lines);
    summary = metric_summary(r);
  }
  std::ofstream(run.artifact("summary.json")) << summary.dump(2) << "\n";
  *run.out << summary.dump(2) << "\n";
  return kExitOk;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Config::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline int cmd_stability(Run& run) {
  StabilityConfig sc;
  sc.presets = split_list(run.cfg.get_string("stability.family"));
  sc.eps = run.cfg.get_reals("stability.eps");
  sc.steps.clear();
  for (double t : run.cfg.get_reals("stability.t")) {
    if (t != std::floor(t)) throw std::invalid_argument("--t values must be integers");
    sc.steps.push_back(static_cast<int>(t));
  }
  sc.mode = parse_perturb_mode(run.cfg.get_string("stability.mode"));
  sc.images = static_cast<int>(run.cfg.get_int("stability.images"));
  sc.height = sc.width = static_cast<int>(run.cfg.get_int("stability.size"));
  sc.seed = run.seed();
  for (const auto& p : sc.presets) make_preset(resolve_preset(p));
  open_run_dir(run);
  plan(run, {"families " + run.cfg.get_string("stability.family"), "eps " + run.cfg.get_string("stability.eps"),
             "t " + run.cfg.get_string("stability.t"), "mode " + perturb_mode_name(sc.mode)});
  if (run.dry_run) return kExitOk;
  StabilityResult r = stability_sweep(sc);
  write_stability_table(r, *run.out);
  std::ofstream table(run.artifact("stability.txt"));
  write_stability_table(r, table);
  std::ofstream lines(run.artifact("stability.jsonl"));
  write_stability_jsonl(r, lines);
  return kExitOk;
}

// ---- entry point ---------------------------------------------------------

inline void error_line(std::ostream& err, int code, const std::string& kind, const std::string& msg) {
  err << "colddiff: error code=" << code << " kind=" << kind << " message=" << nlohmann::json(msg).dump() << "\n";
}

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Cold diffusion: deterministic degradations, restoration, sampling and generation", "colddiff"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand all help");

  // flag value slots, keyed by config key
  std::map<std::string, std::string> slots;
  std::vector<std::pair<CLI::Option*, std::string>> bound;
  bool dry_run = false;
  std::string config_path;

  auto common = [&](CLI::App* sub) {
    bound.emplace_back(sub->add_option("--seed", slots["run.seed"], "master seed"), "run.seed");
    bound.emplace_back(sub->add_option("--threads", slots["run.threads"], "worker threads (1 = bitwise deterministic)"), "run.threads");
    bound.emplace_back(sub->add_option("--out", slots["run.out"], "parent of the run directory"), "run.out");
    sub->add_option("--config", config_path, "config file; flags override its keys");
    sub->add_flag("--dry-run", dry_run, "validate and print the plan without touching the filesystem");
  };
  auto flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    bound.emplace_back(sub->add_option(name, slots[key], help), key);
  };
  auto data_flags = [&](CLI::App* sub) {
    flag(sub, "--in,--data", "data.source", "dataset source: mnist | cifar10 | faces | path");
    flag(sub, "--split", "data.split", "train | test");
    flag(sub, "--limit", "data.limit", "use at most this many images");
    flag(sub, "--resolution", "data.resolution", "side length for folders and synthetic faces");
    flag(sub, "--donors", "data.donors", "donor source for animorph presets");
  };
  auto spec_flags = [&](CLI::App* sub) {
    flag(sub, "--preset", "degradation.preset", "degradation preset (see `colddiff presets`)");
    flag(sub, "--total-steps", "degradation.steps", "override T");
    flag(sub, "--blur-growth", "degradation.blur_growth", "compound | natural");
  };
  auto model_flags = [&](CLI::App* sub) {
    flag(sub, "--checkpoint", "model.checkpoint", "checkpoint file");
    flag(sub, "--weights", "model.weights", "ema | live");
  };

  auto* presets = app.add_subcommand("presets", "list registered degradation presets");
  auto* degrade = app.add_subcommand("degrade", "apply D(x, t) to a dataset and write image grids");
  common(degrade);
  spec_flags(degrade);
  data_flags(degrade);
  flag(degrade, "--t", "degrade.t", "degradation level");
  flag(degrade, "--columns", "output.columns", "grid columns");

  auto* train = app.add_subcommand("train", "train a restoration network");
  common(train);
  spec_flags(train);
  data_flags(train);
  flag(train, "--steps", "train.steps", "optimizer steps");
  flag(train, "--batch", "train.batch", "images per minibatch");
  flag(train, "--accumulate", "train.accumulate", "minibatches per step");
  flag(train, "--lr", "train.lr", "learning rate");
  flag(train, "--warmup", "train.warmup", "warmup steps");
  flag(train, "--schedule", "train.schedule", "constant | cosine");
  flag(train, "--ema-decay", "train.ema_decay", "EMA decay");
  flag(train, "--ema-every", "train.ema_every", "EMA update period");
  flag(train, "--arch", "train.arch", "architecture descriptor");
  flag(train, "--log-every", "train.log_every", "logging period");
  flag(train, "--random-crop", "data.random_crop", "true | false");
  flag(train, "--random-flip", "data.random_flip", "true | false");

  auto* restore = app.add_subcommand("restore", "one-shot restoration R(D(x, t), t)");
  common(restore);
  spec_flags(restore);
  data_flags(restore);
  model_flags(restore);
  flag(restore, "--t", "sample.t", "degradation level");
  flag(restore, "--columns", "output.columns", "grid columns");

  auto* sample = app.add_subcommand("sample", "invert degraded images with the naive or cold sampler");
  common(sample);
  spec_flags(sample);
  data_flags(sample);
  model_flags(sample);
  flag(sample, "--t", "sample.t", "starting step");
  flag(sample, "--sampler", "sample.sampler", "naive | cold | both");
  flag(sample, "--trajectory", "sample.trajectory", "export the first trajectory (true | false)");
  flag(sample, "--columns", "output.columns", "grid columns");

  auto* gen = app.add_subcommand("generate", "unconditional generation from a prior over x_T");
  common(gen);
  spec_flags(gen);
  data_flags(gen);
  model_flags(gen);
  flag(gen, "--n", "generate.n", "number of samples");
  flag(gen, "--prior", "generate.prior", "gmm | lowres | solid | donor | prior file");
  flag(gen, "--components", "generate.components", "GMM components");
  flag(gen, "--sigma", "generate.sigma", "symmetry-breaking noise");
  flag(gen, "--columns", "output.columns", "grid columns");

  auto* ev = app.add_subcommand("eval", "RMSE, SSIM and the Gaussian-Frechet proxy between two sets");
  common(ev);
  flag(ev, "--a", "eval.a", "first set (dataset source or .cdft)");
  flag(ev, "--b", "eval.b", "second set (dataset source or .cdft)");
  flag(ev, "--paired", "eval.paired", "per-pair metrics (true | false)");
  flag(ev, "--split", "data.split", "split for named datasets");
  flag(ev, "--limit", "data.limit", "use at most this many images");
  flag(ev, "--resolution", "data.resolution", "side length for image folders");

  auto* stab = app.add_subcommand("stability", "sampler drift under perturbed perfect restorers");
  common(stab);
  flag(stab, "--family", "stability.family", "comma-separated families or presets");
  flag(stab, "--eps", "stability.eps", "comma-separated perturbation sizes");
  flag(stab, "--t", "stability.t", "comma-separated starting steps");
  flag(stab, "--mode", "stability.mode", "fixed-offset | seeded-random | adversarial-constant");
  flag(stab, "--images", "stability.images", "images per cell");
  flag(stab, "--size", "stability.size", "image side length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << app.help();
    error_line(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  }

  Run run;
  run.out = &out;
  run.command = app.get_subcommands().front()->get_name();
  run.dry_run = dry_run;
  for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);

  try {
    run.cfg = config_path.empty() ? Config(full_schema()) : Config::load(config_path, full_schema());
    for (const auto& [opt, key] : bound) {
      if (opt->count() > 0) run.cfg.set(key, slots[key]);
    }
  } catch (const MissingInputError& e) {
    error_line(err, kExitMissingInput, "missing_input", e.what());
    return kExitMissingInput;
  } catch (const std::exception& e) {
    error_line(err, kExitUsage, "config", e.what());
    return kExitUsage;
  }

  // a run that already wrote artifacts still gets its manifest
  auto fail = [&](int code, const char* kind, const std::string& msg) {
    error_line(err, code, kind, msg);
    write_manifest(run, code, msg);
    return code;
  };
  try {
    set_thread_count(static_cast<int>(run.cfg.get_int("run.threads")));
    int code = kExitOk;
    if (run.command == "presets") code = cmd_presets(run);
    else if (run.command == "degrade") code = cmd_degrade(run);
    else if (run.command == "train") code = cmd_train(run);
    else if (run.command == "restore") code = cmd_restore(run);
    else if (run.command == "sample") code = cmd_sample(run);
    else if (run.command == "generate") code = cmd_generate(run);
    else if (run.command == "eval") code = cmd_eval(run);
    else if (run.command == "stability") code = cmd_stability(run);
    if (run.command != "presets") write_manifest(run, code);
    return code;
  } catch (const MissingInputError& e) {
    return fail(kExitMissingInput, "missing_input", e.what());
  } catch (const NumericalError& e) {
    return fail(kExitNumerical, "numerical", e.what());
  } catch (const FormatError& e) {
    return fail(kExitFailure, "format", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitUsage, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return fail(kExitFailure, "failure", e.what());
  }
}

}  // namespace colddiff::cli

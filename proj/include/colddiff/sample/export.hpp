#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "colddiff/data/image_io.hpp"
#include "colddiff/sample/trajectory.hpp"

namespace colddiff {

/// Writes step_<s>.png for every iterate (clamped on export) and metrics.jsonl with
/// one record per iterate: {"s", "increment", "drift"}; drift only with ground truth.
/// The increment recorded at step s is ||x_s - x_{s+1}||, absent for the starting iterate.
inline void export_trajectory(const Trajectory& tr, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream metrics(fs::path(dir) / "metrics.jsonl");
  if (!metrics) throw std::runtime_error("cannot write metrics in '" + dir + "'");
  for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%04d.png", tr.steps[k]);
    save_image(tr.iterates[k], (fs::path(dir) / name).string());
    nlohmann::json rec;
    rec["s"] = tr.steps[k];
    rec["increment"] = k == 0 ? nlohmann::json(nullptr) : nlohmann::json(tr.increments[k - 1]);
    if (tr.drift) rec["drift"] = (*tr.drift)[k];
    metrics << rec.dump() << '\n';
  }
}

}  // namespace colddiff

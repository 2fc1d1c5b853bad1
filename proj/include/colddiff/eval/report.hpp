#pragma once

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>

#include "colddiff/eval/metrics.hpp"

namespace colddiff {

inline void write_metric_table(const MetricReport& r, std::ostream& os, const std::string& label = "") {
  char line[256];
  if (!label.empty()) os << "# " << label << "\n";
  if (r.count > 0) {
    std::snprintf(line, sizeof line, "%-8s %12s %12s\n", "index", "rmse", "ssim");
    os << line;
    for (std::size_t i = 0; i < r.count; ++i) {
      std::snprintf(line, sizeof line, "%-8zu %12.6f %12.6f\n", i, r.rmse[i], r.ssim[i]);
      os << line;
    }
    std::snprintf(line, sizeof line, "%-8s %12.6f %12.6f\n", "mean", r.mean_rmse, r.mean_ssim);
    os << line;
  }
  if (r.proxy) {
    std::snprintf(line, sizeof line, "proxy    %12.6f  (%s)\n", *r.proxy, r.protocol.c_str());
    os << line;
  }
}

inline nlohmann::json metric_summary(const MetricReport& r, const std::string& label = "") {
  nlohmann::json j{{"count", r.count}};
  if (r.count > 0) {
    j["mean_rmse"] = r.mean_rmse;
    j["mean_ssim"] = r.mean_ssim;
  }
  if (!label.empty()) j["label"] = label;
  if (r.proxy) {
    j["proxy"] = *r.proxy;
    j["protocol"] = r.protocol;
  }
  return j;
}

inline void write_metric_jsonl(const MetricReport& r, std::ostream& os, const std::string& label = "") {
  for (std::size_t i = 0; i < r.count; ++i) {
    nlohmann::json j{{"index", i}, {"rmse", r.rmse[i]}, {"ssim", r.ssim[i]}};
    if (!label.empty()) j["label"] = label;
    os << j.dump() << "\n";
  }
  os << metric_summary(r, label).dump() << "\n";
}

}  // namespace colddiff

#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pcam/episode.hpp"
#include "pcam/params.hpp"

namespace pcam {

inline constexpr const char* kVersion = "0.1.0";

// Every effective config value as JSON (the manifest payload).
nlohmann::json config_json(const SimParams& sim, const HyperParams& hyper);

// Writes `<dir>/manifest.json` with the full effective configuration, the
// code version and caller-provided run fields (seeds, flags, ...).
void write_manifest(const std::string& dir, const SimParams& sim,
                    const HyperParams& hyper, const nlohmann::json& run);

// Line-delimited step records: one JSON object per step, t = 0 included.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::string& path);
  void write(const StepRecord& record);

 private:
  std::ofstream out_;
};

void ensure_dir(const std::string& path);

}  // namespace pcam

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pcam/episode.hpp"
#include "pcam/params.hpp"
#include "pcam/trainer.hpp"

namespace pcam {

struct RunMetrics {
  Setting setting = Setting::kSX;
  double alpha_ped = 0.0;
  std::uint64_t seed = 0;
  int n_episodes = 0;
  double collision_rate_pct = 0.0;
  double av_duration_s = 0.0;   // mean over episodes
  double ped_duration_s = 0.0;  // mean over episodes
};

struct SummaryRow {
  Setting setting = Setting::kSX;
  double alpha_ped = 0.0;
  std::string metric;
  double q10 = 0.0;
  double median = 0.0;
  double q90 = 0.0;
};

// Linear-interpolation quantile on the sorted values (inclusive method).
// Throws std::invalid_argument on an empty list or q outside [0, 1].
double quantile(std::vector<double> values, double q);

namespace seed_purpose {
inline constexpr std::uint64_t kEvalScenario = 101;
inline constexpr std::uint64_t kEvalNoiseAv = 102;
inline constexpr std::uint64_t kEvalNoisePed = 103;
}  // namespace seed_purpose

// Frozen-policy evaluation over freshly sampled scenarios with eta_eval.
// Episode randomness derives from (eval_seed, episode index), so results
// do not depend on scheduling.
RunMetrics evaluate(IAgent& av, IAgent& ped, const SimParams& params,
                    Setting setting, double alpha_ped, double alpha_av,
                    std::uint64_t train_seed, int n_episodes,
                    std::uint64_t eval_seed);

// Builds the evaluation-time policies for a cell. Rule agents for setting X;
// greedy network agents loaded from `<ckpt_dir>/av.ckpt` (and ped.ckpt for
// setting 2) otherwise.
struct EvalPolicies {
  std::unique_ptr<IAgent> av;
  std::unique_ptr<IAgent> ped;
};
EvalPolicies make_policies(Setting setting, const std::string& ckpt_dir,
                           const SimParams& params, const HyperParams& hyper);

struct SweepGrid {
  std::vector<Setting> settings;
  std::vector<double> alphas;
  std::vector<std::uint64_t> seeds;
  int train_episodes = 8000;
  int eval_episodes = 2000;
  std::uint64_t eval_seed = 1000;
  double alpha_av = 0.05;
  int jobs = 1;
  bool train_missing = true;  // train absent checkpoints instead of skipping
};

struct SweepResult {
  std::vector<RunMetrics> cells;     // completed cells in grid order
  std::vector<SummaryRow> summary;   // per (setting, alpha) x metric
  std::vector<std::string> gaps;     // cells skipped, human-readable
  bool all_ok = true;
};

// Trains (when allowed) and evaluates the full settings x alphas x seeds
// grid, caching per-cell results under `<out_root>/cells/` so interrupted
// sweeps resume without recomputation. Cell scheduling is parallel up to
// `jobs`; outputs are byte-identical for any job count.
SweepResult run_sweep(const SweepGrid& grid, const SimParams& params,
                      const HyperParams& hyper, const std::string& out_root);

std::string metrics_csv_header();
std::string metrics_csv_row(const RunMetrics& m);
std::string summary_csv_header();
std::string summary_csv_row(const SummaryRow& r);

void write_metrics_csv(const std::string& path, const std::vector<RunMetrics>& rows);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

}  // namespace pcam

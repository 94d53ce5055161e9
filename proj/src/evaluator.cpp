#include "pcam/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pcam/io.hpp"
#include "pcam/learner.hpp"

namespace pcam {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

RunMetrics evaluate(IAgent& av, IAgent& ped, const SimParams& params,
                    Setting setting, double alpha_ped, double alpha_av,
                    std::uint64_t train_seed, int n_episodes,
                    std::uint64_t eval_seed) {
  if (n_episodes <= 0) throw std::invalid_argument("n_episodes must be positive");
  RunMetrics metrics;
  metrics.setting = setting;
  metrics.alpha_ped = alpha_ped;
  metrics.seed = train_seed;
  metrics.n_episodes = n_episodes;

  int collisions = 0;
  double av_duration_sum = 0.0;
  double ped_duration_sum = 0.0;
  for (int i = 0; i < n_episodes; ++i) {
    const auto index = static_cast<std::uint64_t>(i);
    RandomSource scenario_rng =
        RandomSource::derive(eval_seed, seed_purpose::kEvalScenario, index);
    RandomSource noise_av =
        RandomSource::derive(eval_seed, seed_purpose::kEvalNoiseAv, index);
    RandomSource noise_ped =
        RandomSource::derive(eval_seed, seed_purpose::kEvalNoisePed, index);

    ScenarioConfig cfg = sample_scenario(scenario_rng, params);
    cfg.eta = params.eta_eval;

    EpisodeOptions options;
    options.alpha_av = alpha_av;
    options.alpha_ped = alpha_ped;
    const EpisodeResult ep = run_episode(cfg, av, ped, noise_av, noise_ped, options);
    collisions += ep.collided ? 1 : 0;
    av_duration_sum += ep.t_end_av;
    ped_duration_sum += ep.t_end_ped;
  }
  metrics.collision_rate_pct =
      100.0 * static_cast<double>(collisions) / static_cast<double>(n_episodes);
  metrics.av_duration_s = av_duration_sum / static_cast<double>(n_episodes);
  metrics.ped_duration_s = ped_duration_sum / static_cast<double>(n_episodes);
  return metrics;
}

EvalPolicies make_policies(Setting setting, const std::string& ckpt_dir,
                           const SimParams& params, const HyperParams& hyper) {
  EvalPolicies policies;
  const RuleAvParams rule_av{params.v_limit, params.l_nominal, params.dt, 1.5};
  const std::uint64_t expect_hash = config_hash(params, hyper);
  if (setting == Setting::kSX) {
    policies.av = std::make_unique<RuleAvAgent>(rule_av);
    policies.ped = std::make_unique<RulePedestrianAgent>();
    return policies;
  }
  const Checkpoint av_ckpt = load_checkpoint(ckpt_dir + "/av.ckpt", expect_hash);
  policies.av = std::make_unique<GreedyNetAgent>(av_ckpt.decision);
  if (setting == Setting::kS2) {
    const Checkpoint ped_ckpt = load_checkpoint(ckpt_dir + "/ped.ckpt", expect_hash);
    policies.ped = std::make_unique<GreedyNetAgent>(ped_ckpt.decision);
  } else {
    policies.ped = std::make_unique<RulePedestrianAgent>();
  }
  return policies;
}

std::string metrics_csv_header() {
  return "setting,alpha_ped,seed,n_episodes,collision_rate_pct,av_duration_s,ped_duration_s";
}

std::string metrics_csv_row(const RunMetrics& m) {
  std::ostringstream out;
  out << to_string(m.setting) << ',' << fmt_double(m.alpha_ped) << ',' << m.seed
      << ',' << m.n_episodes << ',' << fmt_double(m.collision_rate_pct) << ','
      << fmt_double(m.av_duration_s) << ',' << fmt_double(m.ped_duration_s);
  return out.str();
}

std::string summary_csv_header() {
  return "setting,alpha_ped,metric,q10,median,q90";
}

std::string summary_csv_row(const SummaryRow& r) {
  std::ostringstream out;
  out << to_string(r.setting) << ',' << fmt_double(r.alpha_ped) << ',' << r.metric
      << ',' << fmt_double(r.q10) << ',' << fmt_double(r.median) << ','
      << fmt_double(r.q90);
  return out.str();
}

void write_metrics_csv(const std::string& path, const std::vector<RunMetrics>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << metrics_csv_header() << '\n';
  for (const RunMetrics& m : rows) out << metrics_csv_row(m) << '\n';
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << summary_csv_header() << '\n';
  for (const SummaryRow& r : rows) out << summary_csv_row(r) << '\n';
}

namespace {

struct Cell {
  Setting setting;
  double alpha_ped;
  std::uint64_t seed;
};

std::string cell_file(const std::string& out_root, const Cell& cell) {
  return out_root + "/cells/" + to_string(cell.setting) + "_" +
         fmt_double(cell.alpha_ped) + "_" + std::to_string(cell.seed) + ".csv";
}

bool parse_metrics_row(const std::string& line, RunMetrics& m) {
  std::stringstream ss(line);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (fields.size() != 7) return false;
  try {
    m.setting = setting_from_string(fields[0]);
    m.alpha_ped = std::stod(fields[1]);
    m.seed = std::stoull(fields[2]);
    m.n_episodes = std::stoi(fields[3]);
    m.collision_rate_pct = std::stod(fields[4]);
    m.av_duration_s = std::stod(fields[5]);
    m.ped_duration_s = std::stod(fields[6]);
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

bool load_cached_cell(const std::string& path, RunMetrics& m) {
  std::ifstream in(path);
  if (!in) return false;
  std::string header, row;
  if (!std::getline(in, header) || header != metrics_csv_header()) return false;
  if (!std::getline(in, row)) return false;
  return parse_metrics_row(row, m);
}

// Ensures checkpoints exist for a learning cell, training them if allowed.
void ensure_checkpoints(const Cell& cell, const SweepGrid& grid,
                        const SimParams& params, const HyperParams& hyper,
                        const std::string& out_root) {
  const std::string dir =
      checkpoint_dir(out_root, cell.setting, cell.alpha_ped, cell.seed);
  const bool need_ped = cell.setting == Setting::kS2;
  const bool have = std::filesystem::exists(dir + "/av.ckpt") &&
                    (!need_ped || std::filesystem::exists(dir + "/ped.ckpt"));
  if (have) return;
  if (!grid.train_missing)
    throw std::runtime_error("missing checkpoint for cell " + dir);

  RunSpec spec;
  spec.setting = cell.setting;
  spec.seed = cell.seed;
  spec.episodes = grid.train_episodes;
  spec.alpha_av = grid.alpha_av;
  spec.alpha_ped = cell.alpha_ped;
  spec.eta_train = params.eta_train;
  spec.eta_eval = params.eta_eval;
  TrainResult result = run_training(spec, params, hyper);

  ensure_dir(dir);
  const std::uint64_t hash = config_hash(params, hyper);
  Checkpoint av_ckpt{"av", grid.train_episodes, hash, hyper,
                     result.av->decision_net(), result.av->target_net()};
  save_checkpoint(dir + "/av.ckpt", av_ckpt);
  if (result.ped) {
    Checkpoint ped_ckpt{"ped", grid.train_episodes, hash, hyper,
                        result.ped->decision_net(), result.ped->target_net()};
    save_checkpoint(dir + "/ped.ckpt", ped_ckpt);
  }
  write_trainlog(dir + "/trainlog.jsonl", result.log);
  nlohmann::json run{{"command", "train"},
                     {"setting", to_string(cell.setting)},
                     {"seed", cell.seed},
                     {"episodes", grid.train_episodes},
                     {"alpha_ped", cell.alpha_ped},
                     {"alpha_av", grid.alpha_av}};
  write_manifest(dir, params, hyper, run);
}

}  // namespace

SweepResult run_sweep(const SweepGrid& grid, const SimParams& params,
                      const HyperParams& hyper, const std::string& out_root) {
  if (grid.settings.empty() || grid.alphas.empty() || grid.seeds.empty())
    throw std::invalid_argument("sweep grid must not be empty");

  ensure_dir(out_root);
  ensure_dir(out_root + "/cells");

  std::vector<Cell> cells;
  for (const Setting setting : grid.settings)
    for (const double alpha : grid.alphas)
      for (const std::uint64_t seed : grid.seeds)
        cells.push_back(Cell{setting, alpha, seed});

  std::vector<RunMetrics> results(cells.size());
  std::vector<std::string> errors(cells.size());
  std::vector<char> ok(cells.size(), 0);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      const std::string cache = cell_file(out_root, cell);
      RunMetrics cached;
      if (load_cached_cell(cache, cached)) {
        results[i] = cached;
        ok[i] = 1;
        continue;
      }
      try {
        if (cell.setting != Setting::kSX)
          ensure_checkpoints(cell, grid, params, hyper, out_root);
        const std::string dir =
            checkpoint_dir(out_root, cell.setting, cell.alpha_ped, cell.seed);
        EvalPolicies policies = make_policies(cell.setting, dir, params, hyper);
        results[i] = evaluate(*policies.av, *policies.ped, params, cell.setting,
                              cell.alpha_ped, grid.alpha_av, cell.seed,
                              grid.eval_episodes, grid.eval_seed);
        write_metrics_csv(cache, {results[i]});
        ok[i] = 1;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(grid.jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  SweepResult sweep;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (ok[i]) {
      sweep.cells.push_back(results[i]);
    } else {
      sweep.all_ok = false;
      sweep.gaps.push_back("cell setting=" + to_string(cells[i].setting) +
                           " alpha_ped=" + fmt_double(cells[i].alpha_ped) +
                           " seed=" + std::to_string(cells[i].seed) +
                           " skipped: " + errors[i]);
    }
  }

  for (const Setting setting : grid.settings) {
    for (const double alpha : grid.alphas) {
      std::vector<double> rate, av_dur, ped_dur;
      for (const RunMetrics& m : sweep.cells) {
        if (m.setting != setting || m.alpha_ped != alpha) continue;
        rate.push_back(m.collision_rate_pct);
        av_dur.push_back(m.av_duration_s);
        ped_dur.push_back(m.ped_duration_s);
      }
      if (rate.empty()) continue;
      const auto add_row = [&](const char* name, const std::vector<double>& v) {
        SummaryRow row;
        row.setting = setting;
        row.alpha_ped = alpha;
        row.metric = name;
        row.q10 = quantile(v, 0.10);
        row.median = quantile(v, 0.50);
        row.q90 = quantile(v, 0.90);
        sweep.summary.push_back(row);
      };
      add_row("collision_rate_pct", rate);
      add_row("av_duration_s", av_dur);
      add_row("ped_duration_s", ped_dur);
    }
  }

  write_metrics_csv(out_root + "/metrics.csv", sweep.cells);
  write_summary_csv(out_root + "/summary.csv", sweep.summary);
  if (!sweep.gaps.empty()) {
    std::ofstream gaps(out_root + "/gaps.txt", std::ios::trunc);
    for (const std::string& g : sweep.gaps) gaps << g << '\n';
  }
  return sweep;
}

}  // namespace pcam

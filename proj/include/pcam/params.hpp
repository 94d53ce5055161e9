#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pcam {

// AV action set, index = action id.
inline constexpr std::array<double, 6> kAvActions{-9.8, -5.8, -3.8, 0.0, 1.0, 3.0};
inline constexpr int kNumAvActions = 6;
inline constexpr int kNumPedActions = 2;

// Environment constants. Defaults reproduce the reference scenario
// distributions; all keys can be overridden from a config file.
struct SimParams {
  double dt = 0.1;              // s
  double timeout = 15.0;        // s
  double zeta_av = 10.0;        // m past the crossing line to the AV goal
  double zeta_ped = 0.5;        // m outside the curb (start and goal offset)
  double eta_eval = 0.5;        // m collision half-extent, evaluation
  double eta_train = 1.5;       // m collision half-extent, training
  double v_limit = 13.889;      // m/s (50 km/h)
  double l_nominal = 4.5;       // m nominal vehicle length (rule AV only)
  std::vector<double> street_widths{6.0, 7.5};
  std::vector<double> walk_speeds{1.16, 1.38, 1.47, 1.53, 1.55};
  double ttc_init_min = 1.0;    // s
  double ttc_init_max = 5.0;    // s
  double v_init_min = 30.0 / 3.6;  // m/s
  double v_init_max = 50.0 / 3.6;  // m/s
};

// Learner constants. None of these are scenario-dependent.
struct HyperParams {
  double gamma = 0.99;
  int n_step = 3;
  int batch_size = 64;
  double lr = 1e-4;
  int hidden = 128;
  int target_sync = 1000;       // learner steps between target refreshes
  int replay_capacity = 50000;
  double eps_start = 1.0;
  double eps_end = 0.02;
  int random_episodes = 250;
  int exploration_episodes = 800;
  double grad_clip = 10.0;      // global gradient norm bound
  double huber_delta = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::array<double, kNumAvActions> av_explore_probs{0.05, 0.05, 0.10,
                                                     0.20, 0.25, 0.35};
};

// Applies `key = value` overrides from a plain-text file. Lines starting
// with '#' are comments. Lists are comma-separated; ranges are "lo,hi".
// Unknown keys throw std::invalid_argument.
void apply_config_file(const std::string& path, SimParams& sim, HyperParams& hyper);
void apply_config_line(const std::string& key, const std::string& value,
                       SimParams& sim, HyperParams& hyper);

// Canonical text form of every effective value; also the hash input.
std::string canonical_config(const SimParams& sim, const HyperParams& hyper);
std::uint64_t config_hash(const SimParams& sim, const HyperParams& hyper);

// Shortest round-trip decimal form of a double (used for CSV and paths).
std::string fmt_double(double value);

}  // namespace pcam

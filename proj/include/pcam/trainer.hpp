#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pcam/episode.hpp"
#include "pcam/learner.hpp"
#include "pcam/params.hpp"

namespace pcam {

enum class Setting { kS1, kS2, kSX };

std::string to_string(Setting setting);
Setting setting_from_string(const std::string& text);

// Disjoint per-purpose random streams derived from one master seed, so that
// adding draws to one consumer never shifts another.
namespace seed_purpose {
inline constexpr std::uint64_t kScenario = 1;
inline constexpr std::uint64_t kNoiseAv = 2;
inline constexpr std::uint64_t kNoisePed = 3;
inline constexpr std::uint64_t kExploreAv = 4;
inline constexpr std::uint64_t kExplorePed = 5;
inline constexpr std::uint64_t kBatchAv = 6;
inline constexpr std::uint64_t kBatchPed = 7;
inline constexpr std::uint64_t kInitAv = 8;
inline constexpr std::uint64_t kInitPed = 9;
}  // namespace seed_purpose

struct RunSpec {
  Setting setting = Setting::kS1;
  std::uint64_t seed = 0;
  int episodes = 8000;
  double alpha_av = 0.05;
  double alpha_ped = 0.0;
  double eta_train = 1.5;
  double eta_eval = 0.5;
  int probe_every = 0;  // greedy-probe hook cadence; 0 disables
};

struct EpisodeRecord {
  int episode = 0;
  bool collision = false;
  double av_duration_s = 0.0;
  double ped_duration_s = 0.0;
  double av_return = 0.0;
  double ped_return = 0.0;
  double epsilon = 0.0;
  double eta = 0.0;  // collision half-extent active during the episode
};

using TrainLog = std::vector<EpisodeRecord>;

using ProbeHook = std::function<void(int episode, const DqnLearner* av,
                                     const DqnLearner* ped)>;

struct TrainResult {
  TrainLog log;
  std::unique_ptr<DqnLearner> av;   // always set
  std::unique_ptr<DqnLearner> ped;  // set for setting 2 only
};

// Trains the learning agents of the given setting: setting 1 pairs a
// learning AV with the rule pedestrian; setting 2 trains two independent
// learners, each treating the other as part of the environment. Setting X
// has nothing to train and is rejected. Collision detection uses eta_train.
TrainResult run_training(const RunSpec& spec, const SimParams& params,
                         const HyperParams& hyper, const ProbeHook& probe = {});

void write_trainlog(const std::string& path, const TrainLog& log);

std::string checkpoint_dir(const std::string& out_root, Setting setting,
                           double alpha_ped, std::uint64_t seed);

}  // namespace pcam

#include "pcam/trainer.hpp"

#include <fstream>
#include <iostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pcam {

std::string to_string(Setting setting) {
  switch (setting) {
    case Setting::kS1: return "1";
    case Setting::kS2: return "2";
    case Setting::kSX: return "X";
  }
  throw std::logic_error("unreachable setting");
}

Setting setting_from_string(const std::string& text) {
  if (text == "1" || text == "s1" || text == "S1") return Setting::kS1;
  if (text == "2" || text == "s2" || text == "S2") return Setting::kS2;
  if (text == "X" || text == "x" || text == "sX" || text == "SX") return Setting::kSX;
  throw std::invalid_argument("unknown setting: " + text);
}

TrainResult run_training(const RunSpec& spec, const SimParams& params,
                         const HyperParams& hyper, const ProbeHook& probe) {
  if (spec.setting == Setting::kSX)
    throw std::invalid_argument("setting X has no learning agent to train");
  if (spec.episodes <= 0) throw std::invalid_argument("episodes must be positive");
  if (spec.alpha_av < 0.0 || spec.alpha_ped < 0.0)
    throw std::invalid_argument("noise levels must be nonnegative");
  if (spec.episodes <= hyper.exploration_episodes)
    std::cerr << "warning: " << spec.episodes
              << " episodes do not outlast the exploration schedule ("
              << hyper.exploration_episodes << "); treating as a smoke run\n";

  const std::uint64_t master = spec.seed;
  RandomSource scenario_rng = RandomSource::derive(master, seed_purpose::kScenario);
  RandomSource noise_av = RandomSource::derive(master, seed_purpose::kNoiseAv);
  RandomSource noise_ped = RandomSource::derive(master, seed_purpose::kNoisePed);

  TrainResult result;
  result.av = std::make_unique<DqnLearner>(
      AgentKind::kAv, hyper, mix_seed(master, seed_purpose::kInitAv),
      mix_seed(master, seed_purpose::kExploreAv),
      mix_seed(master, seed_purpose::kBatchAv));
  if (spec.setting == Setting::kS2)
    result.ped = std::make_unique<DqnLearner>(
        AgentKind::kPed, hyper, mix_seed(master, seed_purpose::kInitPed),
        mix_seed(master, seed_purpose::kExplorePed),
        mix_seed(master, seed_purpose::kBatchPed));

  LearnerAgent av_agent(*result.av);
  std::unique_ptr<IAgent> ped_agent;
  if (spec.setting == Setting::kS1) {
    ped_agent = std::make_unique<RulePedestrianAgent>();
  } else {
    ped_agent = std::make_unique<LearnerAgent>(*result.ped);
  }

  const ExplorationSchedule schedule{hyper.eps_start, hyper.eps_end,
                                     hyper.random_episodes,
                                     hyper.exploration_episodes};

  result.log.reserve(static_cast<std::size_t>(spec.episodes));
  for (int episode = 0; episode < spec.episodes; ++episode) {
    ScenarioConfig cfg = sample_scenario(scenario_rng, params);
    cfg.eta = spec.eta_train;

    const double eps = epsilon(schedule, episode);
    result.av->set_epsilon(eps);
    if (result.ped) result.ped->set_epsilon(eps);

    EpisodeOptions options;
    options.alpha_av = spec.alpha_av;
    options.alpha_ped = spec.alpha_ped;
    const EpisodeResult ep =
        run_episode(cfg, av_agent, *ped_agent, noise_av, noise_ped, options);

    EpisodeRecord rec;
    rec.episode = episode;
    rec.collision = ep.collided;
    rec.av_duration_s = ep.t_end_av;
    rec.ped_duration_s = ep.t_end_ped;
    rec.av_return = ep.return_av;
    rec.ped_return = ep.return_ped;
    rec.epsilon = eps;
    rec.eta = cfg.eta;
    result.log.push_back(rec);

    if (probe && spec.probe_every > 0 && (episode + 1) % spec.probe_every == 0)
      probe(episode, result.av.get(), result.ped.get());
  }
  return result;
}

void write_trainlog(const std::string& path, const TrainLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write train log: " + path);
  for (const EpisodeRecord& rec : log) {
    nlohmann::json j{{"episode", rec.episode},
                     {"collision", rec.collision},
                     {"av_duration_s", rec.av_duration_s},
                     {"ped_duration_s", rec.ped_duration_s},
                     {"av_return", rec.av_return},
                     {"ped_return", rec.ped_return},
                     {"epsilon", rec.epsilon},
                     {"eta", rec.eta}};
    out << j.dump() << '\n';
  }
}

std::string checkpoint_dir(const std::string& out_root, Setting setting,
                           double alpha_ped, std::uint64_t seed) {
  return out_root + "/" + to_string(setting) + "/" + fmt_double(alpha_ped) +
         "/" + std::to_string(seed);
}

}  // namespace pcam

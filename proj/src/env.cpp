#include "pcam/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pcam {

ScenarioConfig sample_scenario(RandomSource& rng, const SimParams& params) {
  ScenarioConfig cfg;
  cfg.v_av_init = rng.uniform(params.v_init_min, params.v_init_max);
  cfg.ttc_init = rng.uniform(params.ttc_init_min, params.ttc_init_max);
  cfg.b_street = rng.pick(params.street_widths);
  cfg.side = rng.uniform_index(2) == 0 ? Side::kLeft : Side::kRight;
  cfg.v_walk = rng.pick(params.walk_speeds);
  cfg.dt = params.dt;
  cfg.timeout = params.timeout;
  cfg.zeta_av = params.zeta_av;
  cfg.zeta_ped = params.zeta_ped;
  cfg.v_limit = params.v_limit;
  cfg.eta = params.eta_eval;
  return cfg;
}

void validate_config(const ScenarioConfig& config) {
  auto bad = [](const char* what) {
    throw std::invalid_argument(std::string("invalid scenario: ") + what);
  };
  if (!(config.v_av_init > 0.0)) bad("v_av_init must be positive");
  if (!(config.ttc_init > 0.0)) bad("ttc_init must be positive");
  if (!(config.b_street > 0.0)) bad("b_street must be positive");
  if (!(config.v_walk > 0.0)) bad("v_walk must be positive");
  if (!(config.dt > 0.0)) bad("dt must be positive");
  if (!(config.timeout > 0.0)) bad("timeout must be positive");
  if (!(config.eta > 0.0)) bad("eta must be positive");
  if (!(config.zeta_av > 0.0)) bad("zeta_av must be positive");
  if (!(config.zeta_ped >= 0.0)) bad("zeta_ped must be nonnegative");
}

double ped_goal_lateral(const ScenarioConfig& config) {
  return config.side == Side::kLeft ? config.b_street + config.zeta_ped
                                    : -config.zeta_ped;
}

double ped_walk_direction(const ScenarioConfig& config) {
  return config.side == Side::kLeft ? 1.0 : -1.0;
}

int timeout_steps(const ScenarioConfig& config) {
  return static_cast<int>(std::ceil(config.timeout / config.dt - 1e-9));
}

WorldState reset(const ScenarioConfig& config) {
  validate_config(config);
  WorldState world;
  world.x_av = {0.75 * config.b_street, -config.ttc_init * config.v_av_init};
  world.v_av = config.v_av_init;
  world.a_av = 0.0;
  const double start_lateral = config.side == Side::kLeft
                                   ? -config.zeta_ped
                                   : config.b_street + config.zeta_ped;
  world.x_ped = {start_lateral, 0.0};
  world.v_ped = 0.0;
  return world;
}

bool check_collision(const WorldState& world, double eta) {
  return eta > std::abs(world.x_av[0] - world.x_ped[0]) &&
         eta > std::abs(world.x_av[1] - world.x_ped[1]);
}

double compute_ttc(const WorldState& world) {
  const double gap = -world.x_av[1];  // crossing line at 0
  if (world.v_av < kTtcStandstill || gap < 0.0) return kTtcSentinel;
  return std::clamp(gap / world.v_av, 0.0, kTtcSentinel);
}

double compute_pdtc(const WorldState& world, const ScenarioConfig& config) {
  const double goal = ped_goal_lateral(config);
  const double remaining = (goal - world.x_ped[0]) * ped_walk_direction(config);
  return std::max(0.0, remaining);
}

StepEvents step(WorldState& world, const ScenarioConfig& config, double u_av,
                PedAction u_ped) {
  if (world.done_av && world.done_ped)
    throw std::logic_error("step called on a finished episode");

  if (!world.done_av) {
    world.v_av = std::max(0.0, world.v_av + u_av * config.dt);
    world.x_av[1] += world.v_av * config.dt;
    world.a_av = u_av;
  }
  if (!world.done_ped) {
    world.v_ped = u_ped == PedAction::kWalk
                      ? ped_walk_direction(config) * config.v_walk
                      : 0.0;
    world.x_ped[0] += world.v_ped * config.dt;
  }
  world.t += 1;

  StepEvents events;
  events.av_speeding = !world.done_av && world.v_av > config.v_limit;

  if (check_collision(world, config.eta)) {
    events.collided = true;
    world.collided = true;
    world.done_av = true;
    world.done_ped = true;
    return events;
  }

  if (!world.done_av && world.x_av[1] >= config.zeta_av) {
    events.av_reached_goal = true;
    world.done_av = true;
  }
  if (!world.done_ped && compute_pdtc(world, config) <= 0.0) {
    events.ped_reached_goal = true;
    world.done_ped = true;
  }
  if ((!world.done_av || !world.done_ped) && world.t >= timeout_steps(config)) {
    events.timed_out = true;
    world.done_av = true;
    world.done_ped = true;
  }
  return events;
}

StateVector build_state(const WorldState& world, const ScenarioConfig& config) {
  StateVector s;
  s[StateVector::kTtc] = compute_ttc(world);
  s[StateVector::kPedSpeed] = std::abs(world.v_ped);
  s[StateVector::kWalkSpeed] = std::abs(config.v_walk);
  s[StateVector::kAvSpeed] = std::abs(world.v_av);
  s[StateVector::kAvAccel] = std::abs(world.a_av);
  s[StateVector::kRelX1] = world.x_ped[0] - world.x_av[0];
  s[StateVector::kRelX2] = world.x_ped[1] - world.x_av[1];
  s[StateVector::kPdtc] = compute_pdtc(world, config);
  s[StateVector::kStreetWidth] = config.b_street;
  s[StateVector::kSideCode] = config.side == Side::kLeft ? -1.0 : 1.0;
  return s;
}

StateVector observe(const StateVector& state, double alpha, RandomSource& rng) {
  if (alpha < 0.0) throw std::invalid_argument("observe: alpha must be nonnegative");
  if (alpha == 0.0) return state;
  StateVector z = state;
  for (int i = 0; i < StateVector::kSize; ++i) {
    if (i == StateVector::kSideCode) continue;
    z[i] = (1.0 + alpha * rng.normal()) * state[i];
  }
  return z;
}

double reward_ped(const StepEvents& events) {
  return -0.01 - (events.collided ? 10.0 : 0.0);
}

double reward_av(const StepEvents& events, double v_av, double v_limit) {
  return -0.01 - (events.collided ? 10.0 : 0.0) - (v_av > v_limit ? 0.05 : 0.0);
}

std::array<float, StateVector::kSize> normalize_state(const StateVector& state) {
  std::array<float, StateVector::kSize> out;
  for (int i = 0; i < StateVector::kSize; ++i)
    out[static_cast<std::size_t>(i)] =
        static_cast<float>(state[i] / kStateScale[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace pcam

#include "pcam/episode.hpp"

namespace pcam {

namespace {

Termination classify(const StepEvents& events, bool reached_goal) {
  if (events.collided) return Termination::kCollision;
  if (reached_goal) return Termination::kGoal;
  if (events.timed_out) return Termination::kTimeout;
  return Termination::kNone;
}

}  // namespace

EpisodeResult run_episode(const ScenarioConfig& config, IAgent& av, IAgent& ped,
                          RandomSource& noise_av, RandomSource& noise_ped,
                          const EpisodeOptions& options) {
  WorldState world = reset(config);
  av.begin_episode();
  ped.begin_episode();

  EpisodeResult result;

  StateVector obs_av = observe(build_state(world, config), options.alpha_av, noise_av);
  StateVector obs_ped = observe(build_state(world, config), options.alpha_ped, noise_ped);

  if (options.trajectory) {
    StepRecord rec;
    rec.t = 0;
    rec.world = world;
    rec.ttc = compute_ttc(world);
    options.trajectory(rec);
  }

  while (!(world.done_av && world.done_ped)) {
    const bool av_active = !world.done_av;
    const bool ped_active = !world.done_ped;

    const int a_av = av_active ? av.act(obs_av) : 3;  // accel id 3 = hold
    const int a_ped = ped_active ? ped.act(obs_ped) : 0;
    const double u_av = kAvActions[static_cast<std::size_t>(a_av)];
    const auto u_ped = static_cast<PedAction>(a_ped);

    const StepEvents events = step(world, config, u_av, u_ped);
    const double now = world.t * config.dt;

    const double r_av = reward_av(events, world.v_av, config.v_limit);
    const double r_ped = reward_ped(events);

    if (av_active) {
      result.return_av += r_av;
      const StateVector next_obs_av =
          observe(build_state(world, config), options.alpha_av, noise_av);
      av.on_transition(obs_av, a_av, r_av, next_obs_av,
                       classify(events, events.av_reached_goal));
      obs_av = next_obs_av;
      if (world.done_av)
        result.t_end_av = events.timed_out ? config.timeout : now;
    }
    if (ped_active) {
      result.return_ped += r_ped;
      const StateVector next_obs_ped =
          observe(build_state(world, config), options.alpha_ped, noise_ped);
      ped.on_transition(obs_ped, a_ped, r_ped, next_obs_ped,
                        classify(events, events.ped_reached_goal));
      obs_ped = next_obs_ped;
      if (world.done_ped)
        result.t_end_ped = events.timed_out ? config.timeout : now;
    }

    if (options.trajectory) {
      StepRecord rec;
      rec.t = world.t;
      rec.world = world;
      rec.u_av = av_active ? std::optional<double>(u_av) : std::nullopt;
      rec.u_ped = ped_active ? std::optional<PedAction>(u_ped) : std::nullopt;
      rec.ttc = compute_ttc(world);
      rec.collided = events.collided;
      options.trajectory(rec);
    }

    result.collided |= events.collided;
    result.timed_out |= events.timed_out;
  }

  result.steps = world.t;
  return result;
}

}  // namespace pcam

#include "pcam/rule_policies.hpp"

#include <cmath>
#include <limits>

namespace pcam {

PedAction level1_ped_policy(double ttc, double av_passed_by, Level1PedState& state) {
  if (state.committed_walking || ttc >= 3.0 || av_passed_by > 4.0) {
    state.committed_walking = true;
    return PedAction::kWalk;
  }
  return PedAction::kWait;
}

PedAction level1_ped_policy_obs(const StateVector& obs, Level1PedState& state) {
  // rel_x2 = ped longitudinal (0) minus AV center, so passed-by = -rel_x2.
  return level1_ped_policy(obs[StateVector::kTtc], -obs[StateVector::kRelX2], state);
}

double level1_av_best_velocity(double d_low, double pdtc, double v_walk,
                               bool ped_walking, bool corridor_cleared,
                               double v_limit) {
  if (!ped_walking || corridor_cleared) return v_limit;
  const double crossing_time = pdtc / std::max(v_walk, 1e-9);
  if (crossing_time <= 0.0) return v_limit;
  return std::max(0.0, d_low / crossing_time);
}

int level1_av_policy(double v_av, double v_best, double dt) {
  int best_id = 0;
  double best_err = std::numeric_limits<double>::infinity();
  double best_mag = std::numeric_limits<double>::infinity();
  for (int id = 0; id < kNumAvActions; ++id) {
    const double a = kAvActions[static_cast<std::size_t>(id)];
    const double v_next = std::max(0.0, v_av + a * dt);
    const double err = std::abs(v_best - v_next);
    const double mag = std::abs(a);
    if (err < best_err || (err == best_err && mag < best_mag)) {
      best_id = id;
      best_err = err;
      best_mag = mag;
    }
  }
  return best_id;
}

bool corridor_cleared(double rel_x1, double side_code, double margin) {
  // A left-start pedestrian walks toward +1; it is past the vehicle once
  // rel_x1 exceeds the margin. Mirrored for a right start.
  return side_code < 0.0 ? rel_x1 > margin : rel_x1 < -margin;
}

int level1_av_policy_obs(const StateVector& obs, const RuleAvParams& params) {
  // Multiplicative noise preserves zero, so a nonzero observed pedestrian
  // speed is an exact walking indicator.
  const bool walking = std::abs(obs[StateVector::kPedSpeed]) > 1e-12;
  const bool cleared = corridor_cleared(obs[StateVector::kRelX1],
                                        obs[StateVector::kSideCode],
                                        params.corridor_margin);
  const double d_low = obs[StateVector::kRelX2] - 0.5 * params.l_nominal;
  const double v_best =
      level1_av_best_velocity(d_low, obs[StateVector::kPdtc],
                              obs[StateVector::kWalkSpeed], walking, cleared,
                              params.v_limit);
  return level1_av_policy(obs[StateVector::kAvSpeed], v_best, params.dt);
}

}  // namespace pcam

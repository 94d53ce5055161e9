#pragma once

#include "pcam/env.hpp"
#include "pcam/params.hpp"

namespace pcam {

// Crossing-decision state of the rule pedestrian. Once the walk decision is
// taken it is kept for the rest of the episode.
struct Level1PedState {
  bool committed_walking = false;
};

// Threshold policy: walk once the observed time-to-collision allows it or
// once the AV has passed the crossing by more than 4 m; latches on walk.
PedAction level1_ped_policy(double ttc, double av_passed_by, Level1PedState& state);

// Target speed from the gap-closing analysis: while the pedestrian crosses,
// pace the vehicle front to arrive at the crossing line together with the
// pedestrian's crossing completion; otherwise drive at the limit.
// Inputs are observed quantities; d_low is measured from the vehicle front
// (center + l_nominal / 2) to the crossing line.
double level1_av_best_velocity(double d_low, double pdtc, double v_walk,
                               bool ped_walking, bool corridor_cleared,
                               double v_limit);

// Greedy one-step tracking of the best velocity over the discrete action
// set; ties go to the smaller acceleration magnitude. Returns an action id.
int level1_av_policy(double v_av, double v_best, double dt);

// Observed-state adapters used by the episode loop.

PedAction level1_ped_policy_obs(const StateVector& obs, Level1PedState& state);

struct RuleAvParams {
  double v_limit = 13.889;
  double l_nominal = 4.5;
  double dt = 0.1;
  // Lateral clearance beyond which the pedestrian counts as past the
  // vehicle's corridor (measured from the AV center, direction-aware).
  double corridor_margin = 1.5;
};

int level1_av_policy_obs(const StateVector& obs, const RuleAvParams& params);

// True once the pedestrian has crossed past the AV's lateral position by
// more than the margin, in its direction of travel.
bool corridor_cleared(double rel_x1, double side_code, double margin);

}  // namespace pcam

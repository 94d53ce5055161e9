#pragma once

#include <array>
#include <cstdint>

#include "pcam/params.hpp"
#include "pcam/rng.hpp"

namespace pcam {

enum class Side : int { kLeft = 0, kRight = 1 };

enum class PedAction : int { kWait = 0, kWalk = 1 };

// Sampled and fixed constants for one episode.
//
// Coordinate frame: axis 1 runs along the pedestrian's crossing direction
// with the left curb at 0 and the right curb at b_street; axis 2 runs along
// the AV's travel direction with the crossing line at 0.
struct ScenarioConfig {
  double v_av_init = 0.0;   // m/s
  double ttc_init = 0.0;    // s
  double b_street = 0.0;    // m
  Side side = Side::kLeft;  // pedestrian start side
  double v_walk = 0.0;      // m/s
  double dt = 0.1;          // s
  double timeout = 15.0;    // s
  double zeta_av = 10.0;    // m
  double zeta_ped = 0.5;    // m
  double v_limit = 13.889;  // m/s
  double eta = 0.5;         // m collision half-extent
};

struct WorldState {
  std::array<double, 2> x_av{};   // [lateral, longitudinal] of the AV center
  double v_av = 0.0;              // longitudinal speed, never negative
  double a_av = 0.0;              // last applied acceleration command
  std::array<double, 2> x_ped{};  // [lateral, longitudinal]
  double v_ped = 0.0;             // signed lateral speed
  int t = 0;                      // step index
  bool done_av = false;
  bool done_ped = false;
  bool collided = false;
};

struct StepEvents {
  bool collided = false;
  bool av_reached_goal = false;
  bool ped_reached_goal = false;
  bool timed_out = false;
  bool av_speeding = false;
};

// Ten-number agent state, identical content for both agents.
struct StateVector {
  enum Index {
    kTtc = 0,
    kPedSpeed,
    kWalkSpeed,
    kAvSpeed,
    kAvAccel,
    kRelX1,
    kRelX2,
    kPdtc,
    kStreetWidth,
    kSideCode,
    kSize
  };

  std::array<double, kSize> v{};

  double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
};

inline constexpr double kTtcSentinel = 15.0;  // stopped or passed-by value
inline constexpr double kTtcStandstill = 0.01;  // m/s, below this the AV counts as stopped

// Per-component divisors applied before the value network.
inline constexpr std::array<double, StateVector::kSize> kStateScale{
    15.0, 15.0, 15.0, 15.0, 10.0, 75.0, 75.0, 10.0, 10.0, 1.0};

ScenarioConfig sample_scenario(RandomSource& rng, const SimParams& params);

// Throws std::invalid_argument on out-of-domain constants.
void validate_config(const ScenarioConfig& config);

WorldState reset(const ScenarioConfig& config);

// Advances one step: semi-implicit velocity/position update for the AV,
// lateral walk/wait update for the pedestrian, then termination logic.
// Agents whose done flag is set are frozen. Requires an unfinished episode.
StepEvents step(WorldState& world, const ScenarioConfig& config, double u_av,
                PedAction u_ped);

bool check_collision(const WorldState& world, double eta);

double compute_ttc(const WorldState& world);

double compute_pdtc(const WorldState& world, const ScenarioConfig& config);

StateVector build_state(const WorldState& world, const ScenarioConfig& config);

// Multiplicative observation disturbance: every component except the side
// code becomes (1 + n) * s with n ~ Normal(0, alpha^2), drawn per component.
StateVector observe(const StateVector& state, double alpha, RandomSource& rng);

double reward_ped(const StepEvents& events);
double reward_av(const StepEvents& events, double v_av, double v_limit);

std::array<float, StateVector::kSize> normalize_state(const StateVector& state);

// +1 past the crossing for the step limit: timeout / dt rounded up.
int timeout_steps(const ScenarioConfig& config);

double ped_goal_lateral(const ScenarioConfig& config);
double ped_walk_direction(const ScenarioConfig& config);  // +1 left start, -1 right

}  // namespace pcam

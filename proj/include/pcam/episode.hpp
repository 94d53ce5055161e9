#pragma once

#include <functional>
#include <optional>

#include "pcam/env.hpp"
#include "pcam/learner.hpp"
#include "pcam/rule_policies.hpp"

namespace pcam {

enum class Termination { kNone, kGoal, kCollision, kTimeout };

// Decision-maker for one agent. Both agents observe the same underlying
// world before either acts; actions are applied jointly.
class IAgent {
 public:
  virtual ~IAgent() = default;
  virtual void begin_episode() {}
  virtual int act(const StateVector& observation) = 0;
  virtual void on_transition(const StateVector& observation, int action,
                             double reward, const StateVector& next_observation,
                             Termination termination) {
    (void)observation;
    (void)action;
    (void)reward;
    (void)next_observation;
    (void)termination;
  }
};

class RulePedestrianAgent final : public IAgent {
 public:
  void begin_episode() override { state_ = Level1PedState{}; }
  int act(const StateVector& obs) override {
    return static_cast<int>(level1_ped_policy_obs(obs, state_));
  }
  const Level1PedState& state() const { return state_; }

 private:
  Level1PedState state_;
};

class RuleAvAgent final : public IAgent {
 public:
  explicit RuleAvAgent(RuleAvParams params) : params_(params) {}
  int act(const StateVector& obs) override {
    return level1_av_policy_obs(obs, params_);
  }

 private:
  RuleAvParams params_;
};

// Frozen network; greedy action selection only.
class GreedyNetAgent final : public IAgent {
 public:
  explicit GreedyNetAgent(DuelingNet<float> net) : net_(std::move(net)) {}
  int act(const StateVector& obs) override {
    const auto x = normalize_state(obs);
    return greedy_action(net_, std::span<const float>(x.data(), x.size()));
  }
  const DuelingNet<float>& net() const { return net_; }

 private:
  DuelingNet<float> net_;
};

// Adapter that lets a live learner participate in episodes.
class LearnerAgent final : public IAgent {
 public:
  explicit LearnerAgent(DqnLearner& learner) : learner_(learner) {}
  int act(const StateVector& obs) override { return learner_.act(obs); }
  void on_transition(const StateVector& obs, int action, double reward,
                     const StateVector& next_obs, Termination term) override {
    learner_.record(obs, action, reward, next_obs,
                    term == Termination::kGoal || term == Termination::kCollision,
                    term == Termination::kTimeout);
  }

 private:
  DqnLearner& learner_;
};

struct StepRecord {
  int t = 0;
  WorldState world;
  std::optional<double> u_av;        // applied acceleration
  std::optional<PedAction> u_ped;
  double ttc = 0.0;
  bool collided = false;
};

using TrajectorySink = std::function<void(const StepRecord&)>;

struct EpisodeResult {
  bool collided = false;
  bool timed_out = false;
  double t_end_av = 0.0;   // seconds until the AV goal (or episode end)
  double t_end_ped = 0.0;
  double return_av = 0.0;
  double return_ped = 0.0;
  int steps = 0;
};

struct EpisodeOptions {
  double alpha_av = 0.0;
  double alpha_ped = 0.0;
  TrajectorySink trajectory;  // optional per-step sink (includes t = 0)
};

// Runs one episode to completion. Both agents receive observations of the
// same pre-step world, act simultaneously, and the world advances once per
// step. Finished agents are frozen and stop receiving transitions.
EpisodeResult run_episode(const ScenarioConfig& config, IAgent& av, IAgent& ped,
                          RandomSource& noise_av, RandomSource& noise_ped,
                          const EpisodeOptions& options);

}  // namespace pcam

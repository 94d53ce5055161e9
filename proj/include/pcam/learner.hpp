#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcam/env.hpp"
#include "pcam/net.hpp"
#include "pcam/params.hpp"
#include "pcam/replay.hpp"
#include "pcam/rng.hpp"

namespace pcam {

struct ExplorationSchedule {
  double eps_start = 1.0;
  double eps_end = 0.02;
  int random_episodes = 250;
  int exploration_episodes = 800;
};

// Fully random up to random_episodes, exponential decay to eps_end at
// exploration_episodes, constant afterwards.
double epsilon(const ExplorationSchedule& schedule, int episode);

enum class AgentKind { kAv, kPed };

// Random action for the exploration phase: the pedestrian draws uniformly;
// the AV draws from a distribution shifted toward acceleration so purely
// random rollouts keep moving.
int explore_action(RandomSource& rng, AgentKind agent,
                   std::span<const double> av_probs);

// Bootstrapped batch targets: action selected by the decision network,
// evaluated by the target network; terminal windows use the plain return.
template <typename T>
std::vector<double> ddqn_targets(const std::vector<const Experience*>& batch,
                                 const DuelingNet<T>& decision,
                                 const DuelingNet<T>& target, double gamma) {
  std::vector<double> out;
  out.reserve(batch.size());
  ForwardCache<T> dec_cache, tgt_cache;
  for (const Experience* e : batch) {
    double y = e->n_step_return;
    if (!e->terminal) {
      const auto next = normalize_state(e->next_state);
      std::vector<T> x(next.begin(), next.end());
      forward(decision, std::span<const T>(x), dec_cache);
      forward(target, std::span<const T>(x), tgt_cache);
      const int a_star = greedy_action<T>(dec_cache.q);
      y += std::pow(gamma, static_cast<double>(e->n_actual)) *
           static_cast<double>(tgt_cache.q[static_cast<std::size_t>(a_star)]);
    }
    out.push_back(y);
  }
  return out;
}

// Raised when an optimize step produces a non-finite loss or gradient.
struct DivergenceError : std::runtime_error {
  DivergenceError(std::string agent_name, std::int64_t learner_step)
      : std::runtime_error("training diverged (non-finite loss/gradient) for " +
                           agent_name + " at learner step " +
                           std::to_string(learner_step)),
        agent(std::move(agent_name)),
        step(learner_step) {}
  std::string agent;
  std::int64_t step = 0;
};

// One independent deep-Q learner: decision and target network, replay,
// n-step window, adaptive-moment optimizer and its exploration stream.
class DqnLearner {
 public:
  DqnLearner(AgentKind kind, const HyperParams& hyper, std::uint64_t init_seed,
             std::uint64_t explore_seed, std::uint64_t batch_seed);

  AgentKind kind() const { return kind_; }
  int num_actions() const { return decision_.num_actions(); }

  const DuelingNet<float>& decision_net() const { return decision_; }
  const DuelingNet<float>& target_net() const { return target_; }
  DuelingNet<float>& mutable_decision_net() { return decision_; }
  const ReplayBuffer& buffer() const { return buffer_; }

  void set_epsilon(double eps) { epsilon_ = eps; }
  double current_epsilon() const { return epsilon_; }

  // Epsilon-greedy on the normalized observation.
  int act(const StateVector& observation);

  // Greedy action only (used for probes and evaluation of a live learner).
  int act_greedy(const StateVector& observation) const;

  // Records a transition; may emit experiences and run one optimize step.
  void record(const StateVector& obs, int action, double reward,
              const StateVector& next_obs, bool terminal, bool truncated);

  // One batch update: combined sample, double-Q targets, Huber loss,
  // global-norm clipping, adaptive-moment update. Throws DivergenceError
  // on a non-finite loss or gradient.
  void optimize_step();

  void sync_target() { target_ = decision_; }

  std::int64_t learner_steps() const { return learner_steps_; }
  double last_loss() const { return last_loss_; }

  // Restores networks from a checkpoint snapshot.
  void load_networks(const DuelingNet<float>& decision,
                     const DuelingNet<float>& target);

 private:
  AgentKind kind_;
  HyperParams hyper_;
  DuelingNet<float> decision_, target_;
  NetGradients<float> grads_;
  AdamOptimizer<float> adam_;
  ReplayBuffer buffer_;
  NStepAccumulator nstep_;
  RandomSource explore_rng_;
  RandomSource batch_rng_;
  double epsilon_ = 0.0;
  std::int64_t learner_steps_ = 0;
  double last_loss_ = 0.0;
  std::vector<Experience> emit_scratch_;
  ForwardCache<float> cache_;
};

// Checkpoint container: little-endian float32 tensors plus a manifest with
// shapes, hyperparameters, config hash and the episode counter.
struct Checkpoint {
  std::string agent;        // "av" or "ped"
  int episode = 0;
  std::uint64_t config_hash = 0;
  HyperParams hyper;
  DuelingNet<float> decision;
  DuelingNet<float> target;
};

struct CorruptCheckpoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

// Throws CorruptCheckpoint on truncation or malformed contents. When the
// stored config hash differs from `expected_config_hash` (if nonzero), a
// warning is emitted on stderr and `hash_mismatch` is set.
Checkpoint load_checkpoint(const std::string& path,
                           std::uint64_t expected_config_hash = 0,
                           bool* hash_mismatch = nullptr);

}  // namespace pcam

#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "pcam/env.hpp"
#include "pcam/rng.hpp"

namespace pcam {

// One stored transition. `n_step_return` already contains the discounted
// reward sum over the window; `next_state` is the observation n_actual
// steps ahead of `state`.
struct Experience {
  StateVector state;
  int action = 0;
  double n_step_return = 0.0;
  StateVector next_state;
  bool terminal = false;
  int n_actual = 1;
};

// Fixed-capacity ring; oldest experiences are evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Experience experience);

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

  const Experience& operator[](std::size_t i) const { return data_[i]; }
  const Experience& latest() const;

  // Combined sampling: batch_size - 1 uniform draws plus the most recent
  // experience, which is always included (as the last element).
  // Throws std::runtime_error when fewer than batch_size are stored.
  std::vector<const Experience*> sample_batch(RandomSource& rng,
                                              std::size_t batch_size) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write slot once full
  std::vector<Experience> data_;
  std::size_t latest_ = 0;
};

// Discounted n-step window over one agent's episode stream. Emits a full
// n-reward experience as soon as its bootstrap state is known; on episode
// end the remaining partial windows are flushed with their actual length.
class NStepAccumulator {
 public:
  NStepAccumulator(int n, double gamma);

  // Feeds one transition. Appends every experience that became complete to
  // `out`. `terminal` marks a real end state (goal or collision): flushed
  // windows then carry terminal = true and are not bootstrapped.
  // `truncated` marks a timeout cut: windows flush with terminal = false so
  // the learner still bootstraps from the final observation.
  void push(const StateVector& state, int action, double reward,
            const StateVector& next_state, bool terminal, bool truncated,
            std::vector<Experience>& out);

  void clear() { pending_.clear(); }
  std::size_t pending() const { return pending_.size(); }

  int n() const { return n_; }
  double gamma() const { return gamma_; }

 private:
  struct Window {
    StateVector state;
    int action;
    double discounted_sum;
    double next_discount;
    int count;
  };

  int n_;
  double gamma_;
  std::deque<Window> pending_;
};

// Plain discounted sum of up to n rewards: sum_k gamma^k r_k.
double n_step_return(const std::vector<double>& rewards, double gamma);

}  // namespace pcam

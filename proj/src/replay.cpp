#include "pcam/replay.hpp"

namespace pcam {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  data_.reserve(capacity);
}

void ReplayBuffer::push(Experience experience) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(experience));
    latest_ = data_.size() - 1;
  } else {
    data_[head_] = std::move(experience);
    latest_ = head_;
    head_ = (head_ + 1) % capacity_;
  }
}

const Experience& ReplayBuffer::latest() const {
  if (data_.empty()) throw std::runtime_error("replay buffer is empty");
  return data_[latest_];
}

std::vector<const Experience*> ReplayBuffer::sample_batch(
    RandomSource& rng, std::size_t batch_size) const {
  if (data_.size() < batch_size)
    throw std::runtime_error("replay buffer holds fewer experiences than the batch size");
  std::vector<const Experience*> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i + 1 < batch_size; ++i)
    batch.push_back(&data_[static_cast<std::size_t>(rng.uniform_index(data_.size()))]);
  batch.push_back(&data_[latest_]);
  return batch;
}

NStepAccumulator::NStepAccumulator(int n, double gamma) : n_(n), gamma_(gamma) {
  if (n < 1) throw std::invalid_argument("n-step window must be at least 1");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("gamma must lie in (0, 1]");
}

void NStepAccumulator::push(const StateVector& state, int action, double reward,
                            const StateVector& next_state, bool terminal,
                            bool truncated, std::vector<Experience>& out) {
  pending_.push_back(Window{state, action, 0.0, 1.0, 0});
  for (Window& w : pending_) {
    w.discounted_sum += w.next_discount * reward;
    w.next_discount *= gamma_;
    w.count += 1;
  }
  if (terminal || truncated) {
    for (const Window& w : pending_) {
      Experience e;
      e.state = w.state;
      e.action = w.action;
      e.n_step_return = w.discounted_sum;
      e.next_state = next_state;
      e.terminal = terminal;
      e.n_actual = w.count;
      out.push_back(std::move(e));
    }
    pending_.clear();
    return;
  }
  if (pending_.front().count == n_) {
    const Window& w = pending_.front();
    Experience e;
    e.state = w.state;
    e.action = w.action;
    e.n_step_return = w.discounted_sum;
    e.next_state = next_state;
    e.terminal = false;
    e.n_actual = n_;
    out.push_back(std::move(e));
    pending_.pop_front();
  }
}

double n_step_return(const std::vector<double>& rewards, double gamma) {
  if (rewards.empty()) throw std::invalid_argument("n_step_return: empty reward list");
  double sum = 0.0;
  double discount = 1.0;
  for (const double r : rewards) {
    sum += discount * r;
    discount *= gamma;
  }
  return sum;
}

}  // namespace pcam

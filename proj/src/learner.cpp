#include "pcam/learner.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

namespace pcam {

double epsilon(const ExplorationSchedule& schedule, int episode) {
  if (episode < 0) throw std::invalid_argument("episode index must be nonnegative");
  if (episode < schedule.random_episodes) return schedule.eps_start;
  if (episode >= schedule.exploration_episodes) return schedule.eps_end;
  const double progress =
      static_cast<double>(episode - schedule.random_episodes) /
      static_cast<double>(schedule.exploration_episodes - schedule.random_episodes);
  return schedule.eps_start *
         std::pow(schedule.eps_end / schedule.eps_start, progress);
}

int explore_action(RandomSource& rng, AgentKind agent,
                   std::span<const double> av_probs) {
  if (agent == AgentKind::kPed)
    return static_cast<int>(rng.uniform_index(kNumPedActions));
  return rng.categorical(av_probs);
}

DqnLearner::DqnLearner(AgentKind kind, const HyperParams& hyper,
                       std::uint64_t init_seed, std::uint64_t explore_seed,
                       std::uint64_t batch_seed)
    : kind_(kind),
      hyper_(hyper),
      adam_(hyper.lr, hyper.adam_beta1, hyper.adam_beta2, hyper.adam_eps),
      buffer_(static_cast<std::size_t>(hyper.replay_capacity)),
      nstep_(hyper.n_step, hyper.gamma),
      explore_rng_(init_seed),  // reseeded below; keeps members in order
      batch_rng_(batch_seed) {
  RandomSource init_rng(init_seed);
  const int actions = kind == AgentKind::kAv ? kNumAvActions : kNumPedActions;
  decision_.init(StateVector::kSize, hyper.hidden, actions, init_rng);
  target_ = decision_;
  grads_.match(decision_);
  adam_.match(decision_);
  explore_rng_ = RandomSource(explore_seed);
  emit_scratch_.reserve(static_cast<std::size_t>(hyper.n_step));
}

int DqnLearner::act(const StateVector& observation) {
  if (epsilon_ > 0.0 && explore_rng_.uniform01() < epsilon_)
    return explore_action(explore_rng_, kind_, hyper_.av_explore_probs);
  return act_greedy(observation);
}

int DqnLearner::act_greedy(const StateVector& observation) const {
  const auto x = normalize_state(observation);
  return greedy_action(decision_, std::span<const float>(x.data(), x.size()));
}

void DqnLearner::record(const StateVector& obs, int action, double reward,
                        const StateVector& next_obs, bool terminal,
                        bool truncated) {
  emit_scratch_.clear();
  nstep_.push(obs, action, reward, next_obs, terminal, truncated, emit_scratch_);
  for (Experience& e : emit_scratch_) buffer_.push(std::move(e));
  if (!emit_scratch_.empty() &&
      buffer_.size() >= static_cast<std::size_t>(hyper_.batch_size))
    optimize_step();
}

void DqnLearner::optimize_step() {
  const auto batch =
      buffer_.sample_batch(batch_rng_, static_cast<std::size_t>(hyper_.batch_size));
  const std::vector<double> targets =
      ddqn_targets(batch, decision_, target_, hyper_.gamma);

  grads_.zero();
  double loss_sum = 0.0;
  const auto batch_count = static_cast<double>(batch.size());
  std::array<float, StateVector::kSize> x;
  std::vector<float> dq;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    x = normalize_state(batch[j]->state);
    forward(decision_, std::span<const float>(x.data(), x.size()), cache_);
    const int a = batch[j]->action;
    const double err =
        static_cast<double>(cache_.q[static_cast<std::size_t>(a)]) - targets[j];
    loss_sum += huber_loss(err, hyper_.huber_delta);
    dq.assign(cache_.q.size(), 0.0f);
    dq[static_cast<std::size_t>(a)] = static_cast<float>(
        huber_grad(err, hyper_.huber_delta) / batch_count);
    backward(decision_, cache_, std::span<const float>(dq.data(), dq.size()), grads_);
  }
  last_loss_ = loss_sum / batch_count;

  const double grad_norm = clip_global_norm(grads_, hyper_.grad_clip);
  if (!std::isfinite(last_loss_) || !std::isfinite(grad_norm))
    throw DivergenceError(kind_ == AgentKind::kAv ? "av" : "ped", learner_steps_);

  adam_.update(decision_, grads_);
  ++learner_steps_;
  if (learner_steps_ % hyper_.target_sync == 0) sync_target();
}

void DqnLearner::load_networks(const DuelingNet<float>& decision,
                               const DuelingNet<float>& target) {
  decision_ = decision;
  target_ = target;
  grads_.match(decision_);
  adam_.match(decision_);
}

namespace {

constexpr char kMagic[8] = {'P', 'C', 'A', 'M', 'C', 'K', 'P', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

nlohmann::json layer_manifest(const DuelingNet<float>& net, const std::string& prefix) {
  nlohmann::json layers = nlohmann::json::array();
  net.for_each_tensor([&](const char* name, const std::vector<float>& t) {
    layers.push_back({{"name", prefix + "." + name},
                      {"count", t.size()}});
  });
  return layers;
}

void write_tensors(std::ofstream& out, const DuelingNet<float>& net) {
  net.for_each_tensor([&](const char*, const std::vector<float>& t) {
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  });
}

void read_tensors(std::ifstream& in, DuelingNet<float>& net) {
  net.for_each_tensor([&](const char*, std::vector<float>& t) {
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
    if (!in) throw CorruptCheckpoint("checkpoint truncated while reading tensors");
  });
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json manifest;
  manifest["agent"] = ckpt.agent;
  manifest["episode"] = ckpt.episode;
  manifest["config_hash"] = ckpt.config_hash;
  manifest["input"] = ckpt.decision.input_dim();
  manifest["hidden"] = ckpt.decision.hidden_dim();
  manifest["actions"] = ckpt.decision.num_actions();
  manifest["hyper"] = {{"gamma", ckpt.hyper.gamma},
                       {"n_step", ckpt.hyper.n_step},
                       {"batch_size", ckpt.hyper.batch_size},
                       {"lr", ckpt.hyper.lr},
                       {"hidden", ckpt.hyper.hidden},
                       {"target_sync", ckpt.hyper.target_sync},
                       {"replay_capacity", ckpt.hyper.replay_capacity}};
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& l : layer_manifest(ckpt.decision, "decision")) manifest["tensors"].push_back(l);
  for (const auto& l : layer_manifest(ckpt.target, "target")) manifest["tensors"].push_back(l);

  const std::string text = manifest.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_tensors(out, ckpt.decision);
  write_tensors(out, ckpt.target);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path,
                           std::uint64_t expected_config_hash,
                           bool* hash_mismatch) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptCheckpoint("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CorruptCheckpoint("bad checkpoint magic: " + path);
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in) throw CorruptCheckpoint("checkpoint truncated in header: " + path);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw CorruptCheckpoint("checkpoint truncated in manifest: " + path);

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw CorruptCheckpoint("checkpoint manifest is not valid JSON: " + path);
  }

  Checkpoint ckpt;
  try {
    ckpt.agent = manifest.at("agent").get<std::string>();
    ckpt.episode = manifest.at("episode").get<int>();
    ckpt.config_hash = manifest.at("config_hash").get<std::uint64_t>();
    const int input = manifest.at("input").get<int>();
    const int hidden = manifest.at("hidden").get<int>();
    const int actions = manifest.at("actions").get<int>();
    if (input != StateVector::kSize)
      throw CorruptCheckpoint("checkpoint input width mismatch: " + path);
    const auto& h = manifest.at("hyper");
    ckpt.hyper.gamma = h.at("gamma").get<double>();
    ckpt.hyper.n_step = h.at("n_step").get<int>();
    ckpt.hyper.batch_size = h.at("batch_size").get<int>();
    ckpt.hyper.lr = h.at("lr").get<double>();
    ckpt.hyper.hidden = h.at("hidden").get<int>();
    ckpt.hyper.target_sync = h.at("target_sync").get<int>();
    ckpt.hyper.replay_capacity = h.at("replay_capacity").get<int>();

    RandomSource dummy(0);
    ckpt.decision.init(input, hidden, actions, dummy);
    ckpt.target.init(input, hidden, actions, dummy);
  } catch (const nlohmann::json::exception&) {
    throw CorruptCheckpoint("checkpoint manifest is missing fields: " + path);
  }

  read_tensors(in, ckpt.decision);
  read_tensors(in, ckpt.target);
  // The file must end exactly after the tensors.
  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0)
    throw CorruptCheckpoint("checkpoint has trailing bytes: " + path);

  bool mismatch = expected_config_hash != 0 && ckpt.config_hash != expected_config_hash;
  if (mismatch)
    std::cerr << "warning: checkpoint " << path
              << " was produced under a different configuration\n";
  if (hash_mismatch) *hash_mismatch = mismatch;
  return ckpt;
}

}  // namespace pcam

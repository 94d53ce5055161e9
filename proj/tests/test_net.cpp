#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "pcam/learner.hpp"
#include "pcam/net.hpp"

using namespace pcam;

namespace {

// Hand-built two-action net: zero weights, adjustable head biases. All
// values dyadic so the head arithmetic is exact.
DuelingNet<double> biased_net(double value_bias, std::vector<double> adv_bias) {
  DuelingNet<double> net;
  RandomSource rng(0);
  net.init(3, 4, static_cast<int>(adv_bias.size()), rng);
  net.for_each_tensor([](const char*, std::vector<double>& t) {
    std::fill(t.begin(), t.end(), 0.0);
  });
  net.value.b[0] = value_bias;
  for (std::size_t i = 0; i < adv_bias.size(); ++i) net.advantage.b[i] = adv_bias[i];
  return net;
}

}  // namespace

TEST_CASE("dueling aggregation") {
  const std::vector<double> x{0.0, 0.0, 0.0};
  SUBCASE("value plus centered advantages") {
    const auto net = biased_net(1.0, {2.0, 0.0});
    const auto q = forward(net, std::span<const double>(x));
    CHECK(q[0] == 2.0);
    CHECK(q[1] == 0.0);
  }
  SUBCASE("constant advantage shift leaves Q unchanged") {
    const auto base = forward(biased_net(1.0, {2.0, 0.0}), std::span<const double>(x));
    const auto shifted =
        forward(biased_net(1.0, {2.0 + 4.0, 0.0 + 4.0}), std::span<const double>(x));
    CHECK(base[0] == shifted[0]);
    CHECK(base[1] == shifted[1]);
  }
  SUBCASE("zero parameters give a zero vector") {
    const auto q = forward(biased_net(0.0, {0.0, 0.0}), std::span<const double>(x));
    CHECK(q[0] == 0.0);
    CHECK(q[1] == 0.0);
  }
  SUBCASE("non-finite input rejected") {
    const auto net = biased_net(0.0, {0.0, 0.0});
    const std::vector<double> bad{0.0, std::nan(""), 0.0};
    CHECK_THROWS_AS(forward(net, std::span<const double>(bad)), std::invalid_argument);
  }
}

TEST_CASE("greedy action argmax with low-id tie break") {
  const std::vector<double> q1{1.0, 2.0, 3.0, 0.0, -1.0, -2.0};
  CHECK(greedy_action<double>(q1) == 2);
  const std::vector<double> q2{0.0, 0.0};
  CHECK(greedy_action<double>(q2) == 0);
  std::vector<double> q3{1.0, 2.0, 3.0, 0.0, -1.0, -2.0};
  for (auto& v : q3) v *= 7.5;
  CHECK(greedy_action<double>(q3) == 2);
}

TEST_CASE("exploration schedule") {
  const ExplorationSchedule schedule;
  CHECK(epsilon(schedule, 0) == 1.0);
  CHECK(epsilon(schedule, 100) == 1.0);
  CHECK(epsilon(schedule, 249) == 1.0);
  CHECK(epsilon(schedule, 800) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(epsilon(schedule, 5000) == 0.02);
  // closed form: 0.02^((525-250)/550) = 0.02^0.5
  CHECK(epsilon(schedule, 525) == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
  // nonincreasing
  double prev = 2.0;
  for (int e = 0; e < 2000; e += 5) {
    const double eps = epsilon(schedule, e);
    CHECK(eps <= prev + 1e-15);
    prev = eps;
  }
  CHECK_THROWS_AS(epsilon(schedule, -1), std::invalid_argument);
}

TEST_CASE("exploration action distributions") {
  HyperParams hyper;
  SUBCASE("probabilities sum to one") {
    double sum = 0.0;
    for (const double p : hyper.av_explore_probs) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("biased AV draw accelerates in expectation") {
    double expected = 0.0;
    for (int i = 0; i < kNumAvActions; ++i)
      expected += hyper.av_explore_probs[i] * kAvActions[i];
    CHECK(expected == doctest::Approx(0.14).epsilon(1e-9));
    CHECK(expected > 0.0);
  }
  SUBCASE("empirical AV frequencies match the weights") {
    RandomSource rng(77);
    std::array<int, kNumAvActions> counts{};
    const int kDraws = 200000;
    for (int i = 0; i < kDraws; ++i)
      counts[explore_action(rng, AgentKind::kAv, hyper.av_explore_probs)]++;
    for (int a = 0; a < kNumAvActions; ++a)
      CHECK(static_cast<double>(counts[a]) / kDraws ==
            doctest::Approx(hyper.av_explore_probs[a]).epsilon(0.05));
  }
  SUBCASE("pedestrian draw is uniform") {
    RandomSource rng(78);
    int walks = 0;
    const int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i)
      walks += explore_action(rng, AgentKind::kPed, hyper.av_explore_probs);
    CHECK(static_cast<double>(walks) / kDraws == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_CASE("huber loss branches") {
  CHECK(huber_loss(0.5, 1.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(huber_loss(2.0, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(huber_loss(-3.0, 1.0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(huber_grad(0.5, 1.0) == 0.5);
  CHECK(huber_grad(2.0, 1.0) == 1.0);
  CHECK(huber_grad(-3.0, 1.0) == -1.0);
}

TEST_CASE("backprop matches central finite differences") {
  // double-precision toy networks; dominates the tolerance budget at 1e-4
  const auto started = std::chrono::steady_clock::now();
  RandomSource rng(2024);
  for (int trial = 0; trial < 4; ++trial) {
    const int in = 3 + trial;
    const int hidden = 4;
    const int actions = 2 + (trial % 2);
    DuelingNet<double> net;
    net.init(in, hidden, actions, rng);

    const int batch = 5;
    std::vector<std::vector<double>> states(batch);
    std::vector<int> act_ids(batch);
    std::vector<double> targets(batch);
    for (int j = 0; j < batch; ++j) {
      states[j].resize(in);
      for (auto& s : states[j]) s = rng.uniform(-1.0, 1.0);
      act_ids[j] = static_cast<int>(rng.uniform_index(actions));
      targets[j] = rng.uniform(-2.0, 2.0);
    }

    const double delta = 1.0;
    auto batch_loss = [&](const DuelingNet<double>& n) {
      double sum = 0.0;
      for (int j = 0; j < batch; ++j) {
        const auto q = forward(n, std::span<const double>(states[j]));
        sum += huber_loss(q[act_ids[j]] - targets[j], delta);
      }
      return sum / batch;
    };

    NetGradients<double> grads;
    grads.match(net);
    grads.zero();
    ForwardCache<double> cache;
    for (int j = 0; j < batch; ++j) {
      forward(net, std::span<const double>(states[j]), cache);
      std::vector<double> dq(actions, 0.0);
      dq[act_ids[j]] =
          huber_grad(cache.q[act_ids[j]] - targets[j], delta) / batch;
      backward(net, cache, std::span<const double>(dq), grads);
    }

    const double h = 1e-6;
    double worst = 0.0;
    auto check_tensor = [&](std::vector<double>& params, std::vector<double>& grad) {
      for (std::size_t i = 0; i < params.size(); i += 1) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = batch_loss(net);
        params[i] = saved - h;
        const double down = batch_loss(net);
        params[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
        worst = std::max(worst, std::abs(fd - grad[i]) / denom);
      }
    };
    check_tensor(net.fc1.w, grads.g.fc1.w);
    check_tensor(net.fc1.b, grads.g.fc1.b);
    check_tensor(net.fc2.w, grads.g.fc2.w);
    check_tensor(net.fc2.b, grads.g.fc2.b);
    check_tensor(net.value.w, grads.g.value.w);
    check_tensor(net.value.b, grads.g.value.b);
    check_tensor(net.advantage.w, grads.g.advantage.w);
    check_tensor(net.advantage.b, grads.g.advantage.b);
    CHECK(worst < 1e-4);
  }
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  CHECK(elapsed < 10.0);
}

TEST_CASE("global norm clipping") {
  DuelingNet<float> net;
  RandomSource rng(1);
  net.init(4, 4, 2, rng);
  NetGradients<float> grads;
  grads.match(net);
  grads.zero();
  // synthetic gradient of norm 100 on one tensor
  const double target_norm = 100.0;
  const double per = target_norm / std::sqrt(static_cast<double>(grads.g.fc1.w.size()));
  for (auto& g : grads.g.fc1.w) g = static_cast<float>(per);
  const double before = clip_global_norm(grads, 10.0);
  CHECK(before == doctest::Approx(100.0).epsilon(1e-4));
  double after_sq = 0.0;
  grads.g.for_each_tensor([&](const char*, std::vector<float>& t) {
    for (const float v : t) after_sq += static_cast<double>(v) * v;
  });
  CHECK(std::sqrt(after_sq) == doctest::Approx(10.0).epsilon(1e-4));
}

TEST_CASE("adam leaves parameters unchanged on a zero gradient") {
  DuelingNet<float> net;
  RandomSource rng(5);
  net.init(4, 8, 3, rng);
  const DuelingNet<float> before = net;
  AdamOptimizer<float> adam(1e-3, 0.9, 0.999, 1e-8);
  adam.match(net);
  NetGradients<float> grads;
  grads.match(net);
  grads.zero();
  for (int i = 0; i < 5; ++i) adam.update(net, grads);
  bool identical = true;
  net.for_each_tensor([&](const char* name, std::vector<float>& t) {
    const float* reference = nullptr;
    before.for_each_tensor([&](const char* other, const std::vector<float>& u) {
      if (std::string(name) == other) reference = u.data();
    });
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] != reference[i]) identical = false;
  });
  CHECK(identical);
}

TEST_CASE("parameters stay finite through sustained random updates") {
  DuelingNet<float> net;
  RandomSource rng(9);
  net.init(10, 32, 6, rng);
  AdamOptimizer<float> adam(1e-4, 0.9, 0.999, 1e-8);
  adam.match(net);
  NetGradients<float> grads;
  grads.match(net);
  ForwardCache<float> cache;
  std::vector<float> x(10);
  std::vector<float> dq(6);
  for (int step = 0; step < 10000; ++step) {
    grads.zero();
    for (auto& v : x) v = static_cast<float>(rng.uniform(-2.0, 2.0));
    forward(net, std::span<const float>(x), cache);
    const int a = static_cast<int>(rng.uniform_index(6));
    std::fill(dq.begin(), dq.end(), 0.0f);
    const double err = cache.q[a] - rng.uniform(-5.0, 5.0);
    dq[a] = static_cast<float>(huber_grad(err, 1.0));
    backward(net, cache, std::span<const float>(dq), grads);
    clip_global_norm(grads, 10.0);
    adam.update(net, grads);
  }
  bool finite = true;
  net.for_each_tensor([&](const char*, std::vector<float>& t) {
    for (const float v : t)
      if (!std::isfinite(v)) finite = false;
  });
  CHECK(finite);
}

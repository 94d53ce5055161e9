#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "pcam/replay.hpp"

using namespace pcam;

namespace {

Experience tagged(int tag) {
  Experience e;
  e.action = tag;
  e.n_step_return = static_cast<double>(tag);
  return e;
}

}  // namespace

TEST_CASE("ring buffer evicts oldest first") {
  ReplayBuffer buffer(100);
  for (int i = 0; i < 100 + 17; ++i) buffer.push(tagged(i));
  CHECK(buffer.size() == 100);
  std::set<int> tags;
  for (std::size_t i = 0; i < buffer.size(); ++i) tags.insert(buffer[i].action);
  for (int i = 0; i < 17; ++i) CHECK(tags.count(i) == 0);  // the k oldest are gone
  for (int i = 17; i < 117; ++i) CHECK(tags.count(i) == 1);
  CHECK(buffer.latest().action == 116);
}

TEST_CASE("combined sampling always injects the latest experience") {
  ReplayBuffer buffer(500);
  RandomSource rng(31);
  for (int i = 0; i < 400; ++i) buffer.push(tagged(i));
  for (int trial = 0; trial < 1000; ++trial) {
    buffer.push(tagged(1000 + trial));
    const auto batch = buffer.sample_batch(rng, 64);
    REQUIRE(batch.size() == 64);
    bool found = false;
    for (const Experience* e : batch) found |= e->action == 1000 + trial;
    CHECK(found);
  }
}

TEST_CASE("batch equals buffer when sizes match") {
  ReplayBuffer buffer(64);
  RandomSource rng(3);
  for (int i = 0; i < 64; ++i) buffer.push(tagged(i));
  const auto batch = buffer.sample_batch(rng, 64);
  CHECK(batch.size() == 64);
  CHECK(batch.back()->action == 63);
}

TEST_CASE("underfilled buffer refuses to sample") {
  ReplayBuffer buffer(100);
  RandomSource rng(3);
  for (int i = 0; i < 10; ++i) buffer.push(tagged(i));
  CHECK_THROWS_AS(buffer.sample_batch(rng, 64), std::runtime_error);
}

TEST_CASE("sampling is deterministic per seed") {
  ReplayBuffer buffer(200);
  for (int i = 0; i < 200; ++i) buffer.push(tagged(i));
  RandomSource a(55), b(55);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ba = buffer.sample_batch(a, 32);
    const auto bb = buffer.sample_batch(b, 32);
    for (std::size_t i = 0; i < ba.size(); ++i) CHECK(ba[i] == bb[i]);
  }
}

TEST_CASE("discounted return helper") {
  CHECK(n_step_return({-0.01, -0.01, -10.01}, 0.99) ==
        doctest::Approx(-9.830701).epsilon(1e-12));
  CHECK(n_step_return({3.5}, 0.99) == 3.5);
  CHECK(n_step_return({0.0, 0.0, 0.0}, 0.99) == 0.0);
  CHECK_THROWS_AS(n_step_return({}, 0.99), std::invalid_argument);
}

TEST_CASE("window accumulator emits full windows with the bootstrap state") {
  NStepAccumulator acc(3, 0.99);
  std::vector<Experience> out;
  StateVector s0, s1, s2, s3;
  s0[0] = 10.0;
  s1[0] = 11.0;
  s2[0] = 12.0;
  s3[0] = 13.0;

  acc.push(s0, 1, -0.01, s1, false, false, out);
  CHECK(out.empty());
  acc.push(s1, 2, -0.01, s2, false, false, out);
  CHECK(out.empty());
  acc.push(s2, 3, -0.01, s3, false, false, out);
  REQUIRE(out.size() == 1);
  CHECK(out[0].action == 1);
  CHECK(out[0].n_actual == 3);
  CHECK_FALSE(out[0].terminal);
  CHECK(out[0].next_state[0] == 13.0);
  CHECK(out[0].n_step_return ==
        doctest::Approx(n_step_return({-0.01, -0.01, -0.01}, 0.99)).epsilon(1e-12));
}

TEST_CASE("terminal flush marks every pending window terminal") {
  NStepAccumulator acc(3, 0.99);
  std::vector<Experience> out;
  StateVector s;
  acc.push(s, 0, -0.01, s, false, false, out);
  acc.push(s, 1, -10.01, s, true, false, out);  // collision ends the episode
  REQUIRE(out.size() == 2);
  CHECK(out[0].n_actual == 2);
  CHECK(out[0].terminal);
  CHECK(out[0].n_step_return ==
        doctest::Approx(n_step_return({-0.01, -10.01}, 0.99)).epsilon(1e-12));
  CHECK(out[1].n_actual == 1);
  CHECK(out[1].terminal);
  CHECK(out[1].n_step_return == -10.01);
  CHECK(acc.pending() == 0);
}

TEST_CASE("timeout flush keeps windows bootstrappable") {
  NStepAccumulator acc(3, 0.99);
  std::vector<Experience> out;
  StateVector s;
  acc.push(s, 0, -0.01, s, false, false, out);
  acc.push(s, 1, -0.01, s, false, true, out);  // cut by the episode clock
  REQUIRE(out.size() == 2);
  CHECK_FALSE(out[0].terminal);
  CHECK(out[0].n_actual == 2);
  CHECK_FALSE(out[1].terminal);
  CHECK(out[1].n_actual == 1);
}

TEST_CASE("stored returns equal the brute-force discounted sums") {
  // property over random episodes: replay the reward stream through the
  // accumulator and check every emitted window against direct summation
  RandomSource rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(4));
    const double gamma = rng.uniform(0.5, 1.0);
    NStepAccumulator acc(n, gamma);
    const int len = 1 + static_cast<int>(rng.uniform_index(30));
    std::vector<double> rewards(len);
    for (auto& r : rewards) r = rng.uniform(-10.0, 1.0);
    const bool ends_terminal = rng.uniform01() < 0.5;

    std::vector<Experience> out;
    std::vector<int> starts;  // start index of each emitted window, in order
    for (int t = 0; t < len; ++t) {
      StateVector s;
      s[0] = static_cast<double>(t);
      const bool last = t == len - 1;
      acc.push(s, t, rewards[t], s, last && ends_terminal, last && !ends_terminal, out);
    }
    REQUIRE(out.size() == static_cast<std::size_t>(len));
    for (const Experience& e : out) {
      const int start = e.action;  // action id doubles as the start index
      std::vector<double> window(rewards.begin() + start,
                                 rewards.begin() + start + e.n_actual);
      CHECK(e.n_step_return ==
            doctest::Approx(n_step_return(window, gamma)).epsilon(1e-12));
      CHECK(e.n_actual <= n);
      CHECK(e.n_actual >= 1);
    }
  }
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "reference.hpp"
#include "treesched/oracle.hpp"
#include "treesched/single_packet.hpp"

using namespace treesched;

namespace {

// Linear costs 2 and 8 for a 1-bit packet.
ChannelModel two_cost_channel() {
  ChannelModel ch;
  ch.states = {ChannelState{0, 1.0, 0.5, 0.0}, ChannelState{1, 1.0, 0.125, 0.0}};
  ch.transition = {{0.6, 0.4}, {0.3, 0.7}};
  ch.initial = {0.5, 0.5};
  return make_channel(ch);
}

const CostModel kLinear{CostKind::linear, 1.0};

}  // namespace

TEST_CASE("myopic thresholds are zero") {
  Packet p{0, 1.0, 10.0, 0, 4, {}};
  auto pol = solve_single(p, two_cost_channel(), kLinear, 0.0, 1.0);
  for (Slot t = p.arrival; t <= p.deadline; ++t) {
    for (ChannelId h = 0; h < 2; ++h) CHECK(pol.threshold(t, h) == 0.0);
  }
}

TEST_CASE("last-slot threshold is zero for any discount") {
  Packet p{0, 1.0, 10.0, 1, 5, {}};
  for (double alpha : {0.0, 0.3, 0.9, 1.0}) {
    auto pol = solve_single(p, two_cost_channel(), kLinear, alpha, 1.0);
    CHECK(pol.threshold(5, 0) == 0.0);
    CHECK(pol.threshold(5, 1) == 0.0);
  }
}

TEST_CASE("two-state instance matches the schedule enumeration") {
  Packet p{0, 1.0, 10.0, 0, 3, {}};
  auto ch = two_cost_channel();
  auto pol = solve_single(p, ch, kLinear, 1.0, 1.0);
  CHECK(pol.immediate(0) == doctest::Approx(8.0));
  CHECK(pol.immediate(1) == doctest::Approx(2.0));
  auto ref = enumerate_single_schedules(p, ch, kLinear, 1.0, 1.0);
  for (ChannelId h = 0; h < 2; ++h) {
    CHECK(std::abs(pol.value(0, h) - ref.value[static_cast<std::size_t>(h)]) < 1e-12);
    // An open-loop slot choice can never beat the adaptive rule.
    CHECK(ref.fixed_value[static_cast<std::size_t>(h)] <= pol.value(0, h) + 1e-12);
  }
  for (Slot t = 0; t <= 3; ++t) {
    for (ChannelId h = 0; h < 2; ++h) {
      CHECK(pol.value(t, h) == std::max(pol.immediate(h), pol.threshold(t, h)));
    }
  }
}

TEST_CASE("threshold policy equals schedule enumeration on random instances") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int round = 0; round < 60; ++round) {
    auto ch = testing::random_channel(rng, 2 + round % 3);
    Packet p{0, 0.5 + u(rng), 0.5 + 5 * u(rng), static_cast<Slot>(round % 3), static_cast<Slot>(round % 3 + 1 + round % 6), {}};
    CostModel cost{round % 2 ? CostKind::convex : CostKind::linear, 2.0};
    double alpha = u(rng);
    double lambda = 0.2 + u(rng);
    auto pol = solve_single(p, ch, cost, alpha, lambda);
    auto ref = enumerate_single_schedules(p, ch, cost, alpha, lambda);
    for (std::size_t h = 0; h < ch.size(); ++h) {
      double v = pol.value(p.arrival, static_cast<ChannelId>(h));
      CHECK(testing::relative_close(v, ref.value[h], 1e-9));
      CHECK(ref.fixed_value[h] <= v + 1e-12);
    }
  }
}

TEST_CASE("never worth sending gives value zero") {
  Packet p{0, 1.0, 1.0, 0, 4, {}};
  auto ch = two_cost_channel();
  auto pol = solve_single(p, ch, kLinear, 0.7, 1.0);
  auto ref = enumerate_single_schedules(p, ch, kLinear, 0.7, 1.0);
  for (ChannelId h = 0; h < 2; ++h) {
    CHECK(pol.value(0, h) == 0.0);
    CHECK(ref.value[static_cast<std::size_t>(h)] == 0.0);
    CHECK(ref.best_fixed_slot[static_cast<std::size_t>(h)] == -1);
  }
}

TEST_CASE("deterministic channel: best fixed slot is the discounted argmax") {
  ChannelModel ch;
  ch.states = {ChannelState{0, 1.0, 1.0, 0.0}};
  ch.transition = {{1.0}};
  ch.initial = {1.0};
  Packet p{0, 1.0, 5.0, 2, 6, {}};
  auto ref = enumerate_single_schedules(p, ch, kLinear, 0.8, 1.0);
  CHECK(ref.best_fixed_slot[0] == 2);
  CHECK(ref.fixed_value[0] == doctest::Approx(4.0));
  CHECK(ref.value[0] == doctest::Approx(4.0));
}

TEST_CASE("acting on the threshold") {
  Packet p{0, 1.0, 10.0, 0, 3, {}};
  auto ch = two_cost_channel();
  auto pol = solve_single(p, ch, kLinear, 1.0, 1.0);
  CHECK(act_single(pol, 1, 0, false) == SingleAction::wait);
  CHECK(act_single(pol, 3, 1, true) == SingleAction::transmit);
  CHECK(act_single(pol, 0, 0, true) == (pol.immediate(0) > pol.threshold(0, 0) ? SingleAction::transmit
                                                                                 : SingleAction::wait));
  CHECK_THROWS_AS(act_single(pol, 4, 0, true), Error);
  CHECK_THROWS_AS(act_single(pol, -1, 0, true), Error);
}

TEST_CASE("a tie at the threshold waits") {
  // Constant channel: immediate 2, one slot later worth alpha * 2 = 2.
  ChannelModel ch;
  ch.states = {ChannelState{0, 1.0, 1.0, 0.0}};
  ch.transition = {{1.0}};
  ch.initial = {1.0};
  Packet p{0, 1.0, 3.0, 0, 1, {}};
  auto pol = solve_single(p, ch, kLinear, 1.0, 1.0);
  REQUIRE(pol.immediate(0) == pol.threshold(0, 0));
  CHECK(act_single(pol, 0, 0, true) == SingleAction::wait);
  // Waiting is also optimal.
  auto ref = enumerate_single_schedules(p, ch, kLinear, 1.0, 1.0);
  CHECK(ref.value[0] == pol.value(0, 0));
}

TEST_CASE("thresholds fall over time and grow with the discount") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 20; ++round) {
    auto ch = testing::random_channel(rng, 3);
    Packet p{0, 1.0, 4.0, 0, 7, {}};
    std::vector<ThresholdPolicy> pols;
    for (int a = 1; a <= 10; ++a) pols.push_back(solve_single(p, ch, kLinear, a / 10.0, 1.0));
    for (std::size_t a = 0; a < pols.size(); ++a) {
      for (Slot t = 0; t <= 7; ++t) {
        for (ChannelId h = 0; h < 3; ++h) {
          double cur = pols[a].threshold(t, h);
          double next = t < 7 ? pols[a].threshold(t + 1, h) : 0.0;
          CHECK(cur >= next - 1e-12);
          CHECK(next >= 0.0);
          if (a > 0) CHECK(cur >= pols[a - 1].threshold(t, h) - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("marginal utility is nondecreasing in distortion") {
  auto ch = two_cost_channel();
  double prev = -1.0;
  for (double q = 0.0; q <= 20.0; q += 0.5) {
    Packet p{0, 1.0, q, 0, 4, {}};
    auto pol = solve_single(p, ch, kLinear, 0.9, 1.0);
    double du = std::max(pol.immediate(0) - pol.threshold(0, 0), 0.0);
    CHECK(du >= prev - 1e-12);
    prev = du;
  }
}

TEST_CASE("an earlier deadline never lowers the marginal utility") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 10; ++round) {
    auto ch = testing::random_channel(rng, 3);
    for (int shift = 1; shift <= 3; ++shift) {
      Packet early{0, 1.0, 3.0, 0, 4, {}};
      Packet late{0, 1.0, 3.0, 0, 4 + shift, {}};
      auto pe = solve_single(early, ch, kLinear, 0.9, 1.0);
      auto pl = solve_single(late, ch, kLinear, 0.9, 1.0);
      for (Slot z = 0; z <= 4; ++z) {
        for (ChannelId h = 0; h < 3; ++h) {
          double de = std::max(pe.immediate(h) - pe.threshold(z, h), 0.0);
          double dl = std::max(pl.immediate(h) - pl.threshold(z, h), 0.0);
          CHECK(de >= dl - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("value seen before arrival") {
  Packet p{0, 1.0, 10.0, 2, 4, {}};
  auto ch = two_cost_channel();
  auto pol = solve_single(p, ch, kLinear, 0.9, 1.0);
  double expect = 0.0;
  for (int h2 = 0; h2 < 2; ++h2) expect += ch.transition[0][h2] * pol.value(2, h2);
  CHECK(value_from(pol, ch, 1, 0) == doctest::Approx(0.9 * expect));
  CHECK(value_from(pol, ch, 3, 1) == pol.value(3, 1));
  CHECK(value_from(pol, ch, 5, 1) == 0.0);
}

TEST_CASE("bad discount or multiplier is rejected") {
  Packet p{0, 1.0, 10.0, 0, 3, {}};
  CHECK_THROWS_AS(solve_single(p, two_cost_channel(), kLinear, 1.5, 1.0), Error);
  CHECK_THROWS_AS(solve_single(p, two_cost_channel(), kLinear, 0.5, 0.0), Error);
  CHECK_THROWS_AS(solve_single(p, two_cost_channel(), kLinear, -0.1, 1.0), Error);
}

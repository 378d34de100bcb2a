#include <doctest.h>

#include <cmath>
#include <random>

#include "reference.hpp"
#include "treesched/channel_model.hpp"

using namespace treesched;

namespace {

ChannelModel two_state(std::vector<std::vector<double>> p, std::vector<double> init = {1.0, 0.0}) {
  ChannelModel ch;
  ch.states = {ChannelState{0, 1.0, 1.0, 0.0}, ChannelState{1, 3.0, 2.0, 0.5}};
  ch.transition = std::move(p);
  ch.initial = std::move(init);
  return ch;
}

}  // namespace

TEST_CASE("channel validation") {
  ChannelModel ok;
  ok.states = {ChannelState{0, 1, 1, 0}, ChannelState{1, 1, 1, 0}, ChannelState{2, 1, 1, 0}};
  ok.transition = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  ok.initial = {1.0 / 3, 1.0 / 3, 1.0 - 2.0 / 3};
  CHECK(validate_channel(ok).empty());

  auto short_row = ok;
  short_row.transition[1] = {0.0, 0.9, 0.0};
  CHECK(validate_channel(short_row).size() == 1);

  auto negative = ok;
  negative.transition[0] = {1.5, -0.5, 0.0};
  CHECK_FALSE(validate_channel(negative).empty());

  auto bad_state = ok;
  bad_state.states[0].gain = 0.0;
  bad_state.states[1].loss_prob = 1.0;
  CHECK(validate_channel(bad_state).size() == 2);
}

TEST_CASE("channel file parsing") {
  auto ch = load_channel(std::string_view(R"({"states": [{"id": 0, "gain": 1, "rate": 2, "loss_prob": 0.1}],
    "transition": [[1.0]], "initial": [1.0]})"));
  CHECK(ch.size() == 1);
  CHECK(ch.states[0].rate == 2.0);
  CHECK_THROWS_AS(load_channel(std::string_view(R"({"states": [], "transition": [], "initial": [], "extra": 1})")),
                  ParseError);
  CHECK_THROWS_AS(load_channel(std::string_view(R"({"states": [{"id": 0, "gain": 1, "rate": 2, "loss_prob": 0.1}],
    "transition": [[0.5]], "initial": [1.0]})")),
                  ValidationError);
  auto again = load_channel(std::string_view(channel_to_json(ch)));
  CHECK(again.states[0].loss_prob == 0.1);
}

TEST_CASE("sample paths") {
  ChannelModel ident;
  ident.states = {ChannelState{0, 1, 1, 0}, ChannelState{1, 1, 1, 0}, ChannelState{2, 1, 1, 0}};
  ident.transition = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  ident.initial = {0, 0, 1};
  auto path = sample_path(ident, 6, 42);
  CHECK(path.size() == 7);
  for (auto h : path) CHECK(h == 2);

  auto alt = two_state({{0, 1}, {1, 0}});
  auto p2 = sample_path(alt, 5, 1);
  CHECK(p2 == std::vector<ChannelId>{0, 1, 0, 1, 0, 1});

  auto noisy = two_state({{0.3, 0.7}, {0.6, 0.4}}, {0.5, 0.5});
  CHECK(sample_path(noisy, 50, 9) == sample_path(noisy, 50, 9));
  CHECK_THROWS_AS(sample_path(noisy, -1, 0), Error);
}

TEST_CASE("empirical occupancy approaches the stationary distribution") {
  ChannelModel ch;
  for (int i = 0; i < 5; ++i) ch.states.push_back(ChannelState{i, 1, 1, 0});
  ch.transition = {{0.5, 0.5, 0, 0, 0}, {0.2, 0.3, 0.5, 0, 0}, {0, 0.2, 0.3, 0.5, 0}, {0, 0, 0.2, 0.3, 0.5},
                   {0, 0, 0, 0.6, 0.4}};
  ch.initial = {1, 0, 0, 0, 0};
  // Eigenvector by power iteration.
  std::vector<double> pi(5, 0.2);
  for (int it = 0; it < 5000; ++it) {
    std::vector<double> next(5, 0.0);
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) next[b] += pi[a] * ch.transition[a][b];
    pi = next;
  }
  auto analytic = stationary_distribution(ch);
  for (int i = 0; i < 5; ++i) CHECK(analytic[i] == doctest::Approx(pi[i]).epsilon(1e-9));

  auto path = sample_path(ch, 100000, 5);
  std::vector<double> freq(5, 0.0);
  for (auto h : path) freq[static_cast<std::size_t>(h)] += 1.0 / static_cast<double>(path.size());
  for (int i = 0; i < 5; ++i) CHECK(std::abs(freq[i] - pi[i]) < 0.01);

  auto avg = averaged_channel(ch);
  CHECK(avg.size() == 1);
  CHECK(avg.transition == std::vector<std::vector<double>>{{1.0}});
}

TEST_CASE("linear cost") {
  ChannelState s{0, 1.0, 100.0, 0.0};
  CHECK(cost_linear(0.0, s) == 0.0);
  CHECK(cost_linear(50.0, s) == doctest::Approx(0.5));
  s.loss_prob = 0.5;
  CHECK(cost_linear(50.0, s) == doctest::Approx(1.0));
  for (double a : {0.5, 3.0, 17.25}) {
    for (double b : {0.25, 9.0}) {
      double sum = cost_linear(a, s) + cost_linear(b, s);
      CHECK(std::abs(cost_linear(a + b, s) - sum) <= 1e-12 * sum);
    }
  }
}

TEST_CASE("convex cost") {
  ChannelState s{0, 1.0, 1.0, 0.0};
  CHECK(cost_convex(0.0, s, 2.0) == 0.0);
  CHECK(cost_convex(1.0, s, 2.0) == doctest::Approx(1.0));
  s.gain = 0.5;
  CHECK(cost_convex(2.0, s, 2.0) == doctest::Approx(6.0));
  for (double a = 0.0; a < 4.0; a += 0.37) {
    for (double b = a; b < 4.0; b += 0.53) {
      double m = 0.5 * (a + b);
      CHECK(cost_convex(m, s, 2.0) <= 0.5 * (cost_convex(a, s, 2.0) + cost_convex(b, s, 2.0)) + 1e-12);
    }
  }
}

TEST_CASE("marginal cost") {
  ChannelState s{0, 1.0, 4.0, 0.2};
  CostModel lin{CostKind::linear, 1.0};
  for (int k = 1; k <= 5; ++k) CHECK(marginal_cost(lin, k, 3.0, s) == doctest::Approx(cost_linear(3.0, s)));

  CostModel cvx{CostKind::convex, 2.0};
  ChannelState unit{0, 1.0, 1.0, 0.0};
  CHECK(marginal_cost(cvx, 1, 1.0, unit) == doctest::Approx(1.0));
  CHECK(marginal_cost(cvx, 2, 1.0, unit) == doctest::Approx(2.0));
  CHECK_THROWS_AS(marginal_cost(cvx, 0, 1.0, unit), Error);

  std::mt19937_64 rng(3);
  for (int round = 0; round < 20; ++round) {
    auto ch = testing::random_channel(rng, 3);
    for (const auto& st : ch.states) {
      double total = 0.0;
      for (int k = 1; k <= 20; ++k) {
        double m = marginal_cost(cvx, k, 0.3, st);
        if (k > 1) CHECK(m >= marginal_cost(cvx, k - 1, 0.3, st));
        total += m;
      }
      double direct = cost_convex(20 * 0.3, st, 2.0);
      CHECK(std::abs(total - direct) <= 1e-9 * direct);
    }
  }
}

TEST_CASE("averaged channel") {
  ChannelModel one;
  one.states = {ChannelState{0, 2.0, 3.0, 0.1}};
  one.transition = {{1.0}};
  one.initial = {1.0};
  auto same = averaged_channel(one);
  CHECK(same.states[0].gain == doctest::Approx(2.0));
  CHECK(same.states[0].rate == doctest::Approx(3.0));

  auto sym = two_state({{0.4, 0.6}, {0.6, 0.4}});
  auto avg = averaged_channel(sym);
  CHECK(avg.states[0].gain == doctest::Approx(2.0));
  CHECK(avg.initial == std::vector<double>{1.0});

  // Deterministic alternation still has a unique stationary distribution.
  auto alt = averaged_channel(two_state({{0, 1}, {1, 0}}));
  CHECK(alt.states[0].gain == doctest::Approx(2.0));

  auto reducible = two_state({{1, 0}, {0, 1}});
  CHECK_THROWS_AS(averaged_channel(reducible), Error);
}

TEST_CASE("cost kind parsing") {
  CHECK(parse_cost_kind("linear") == CostKind::linear);
  CHECK(parse_cost_kind("convex") == CostKind::convex);
  CHECK_THROWS_AS(parse_cost_kind("quadratic"), Error);
}

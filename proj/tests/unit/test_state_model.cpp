#include <doctest.h>

#include "treesched/state_model.hpp"

using namespace treesched;

namespace {

Packet packet(PacketId id, Slot a, Slot d, std::vector<PacketId> parents = {}) {
  return Packet{id, 1.0, 1.0, a, d, std::move(parents)};
}

}  // namespace

TEST_CASE("live, arrival and dependency sets") {
  auto trace = make_trace({packet(0, 0, 2), packet(1, 1, 5, {0}), packet(2, 3, 6, {1})});
  TransitionModel m(trace);
  CHECK(m.live(0) == std::vector<PacketId>{0});
  CHECK(m.live(2) == std::vector<PacketId>{0, 1});
  CHECK(m.arrivals(3) == std::vector<PacketId>{2});
  CHECK(m.dependency_set(2).empty());
  CHECK(m.dependency_set(3) == std::vector<PacketId>{0});
  CHECK(m.dependency_set(6) == std::vector<PacketId>{1});
  CHECK(m.dependency_set(7).empty());
  CHECK(m.initial_key() == StateKey{{0}, {}});
}

TEST_CASE("idle slot leaves traffic unchanged") {
  auto trace = make_trace({packet(0, 0, 5), packet(1, 0, 5)});
  TransitionModel m(trace);
  JointState s{1, StateKey{{0, 1}, {}}, 0};
  auto next = advance_state(s, {}, 1, m);
  CHECK(next.t == 2);
  CHECK(next.key == s.key);
  CHECK(next.channel == 1);
}

TEST_CASE("sending everything empties the post state") {
  auto trace = make_trace({packet(0, 0, 5), packet(1, 0, 5), packet(2, 3, 6)});
  TransitionModel m(trace);
  std::vector<PacketId> all{0, 1};
  auto post = m.post_key(0, m.initial_key(), all);
  CHECK(post.pending.empty());
  CHECK(m.reward(all) == 2.0);
  CHECK(m.bits(all) == 2.0);
}

TEST_CASE("expiring packets leave the state") {
  auto trace = make_trace({packet(0, 0, 1), packet(1, 0, 3)});
  TransitionModel m(trace);
  auto next = advance_state(JointState{1, StateKey{{0, 1}, {}}, 0}, {}, 0, m);
  CHECK(next.key.pending == std::vector<PacketId>{1});
}

TEST_CASE("a child whose parent expired undelivered is dead") {
  // 1 depends on 0; 0 expires at slot 1 without being sent.
  auto trace = make_trace({packet(0, 0, 1), packet(1, 0, 4, {0})});
  TransitionModel m(trace);
  JointState s{0, m.initial_key(), 0};
  CHECK(s.key.pending == std::vector<PacketId>{0, 1});
  CHECK(m.decodable(0, s.key) == std::vector<PacketId>{0});
  s = advance_state(s, {}, 0, m);
  s = advance_state(s, {}, 0, m);
  CHECK(s.t == 2);
  CHECK(s.key.pending.empty());
  CHECK(s.key.lost == std::vector<PacketId>{0});
  CHECK(m.dead(2, StateKey{{1}, {0}}, 1));
}

TEST_CASE("a delivered parent makes its child decodable") {
  auto trace = make_trace({packet(0, 0, 1), packet(1, 0, 4, {0})});
  TransitionModel m(trace);
  JointState s{0, m.initial_key(), 0};
  std::vector<PacketId> send{0};
  s = advance_state(s, send, 0, m);
  CHECK(s.key.pending == std::vector<PacketId>{1});
  CHECK(m.delivered(1, s.key, 0));
  CHECK(m.decodable(1, s.key) == std::vector<PacketId>{1});
  s = advance_state(s, {}, 0, m);
  CHECK(s.key.lost.empty());
  CHECK(m.dependency_set(2) == std::vector<PacketId>{0});
  CHECK(m.decodable(2, s.key) == std::vector<PacketId>{1});
}

TEST_CASE("dead packets are never re-added on arrival") {
  auto trace = make_trace({packet(0, 0, 1), packet(1, 2, 4, {0})});
  TransitionModel m(trace);
  JointState s{0, m.initial_key(), 0};
  s = advance_state(s, {}, 0, m);
  s = advance_state(s, {}, 0, m);
  CHECK(s.t == 2);
  CHECK(s.key.pending.empty());
  CHECK(s.key.lost == std::vector<PacketId>{0});
}

TEST_CASE("illegal transmissions are rejected") {
  auto trace = make_trace({packet(0, 0, 3), packet(1, 0, 4, {0}), packet(2, 2, 4)});
  TransitionModel m(trace);
  JointState s{0, m.initial_key(), 0};
  std::vector<PacketId> child{1};
  std::vector<PacketId> together{0, 1};
  std::vector<PacketId> absent{2};
  std::vector<PacketId> twice{0, 0};
  CHECK_THROWS_AS(advance_state(s, child, 0, m), Error);
  CHECK_THROWS_AS(advance_state(s, together, 0, m), Error);
  CHECK_THROWS_AS(advance_state(s, absent, 0, m), Error);
  CHECK_THROWS_AS(advance_state(s, twice, 0, m), Error);
}

TEST_CASE("state key hashing and printing") {
  StateKey a{{1, 2}, {0}};
  StateKey b{{1, 2}, {0}};
  StateKey c{{1}, {0, 2}};
  CHECK(StateKeyHash{}(a) == StateKeyHash{}(b));
  CHECK_FALSE(a == c);
  CHECK(to_string(a) == "pending={1,2} lost={0}");
}

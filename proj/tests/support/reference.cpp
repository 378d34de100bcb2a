#include "reference.hpp"

#include <algorithm>
#include <cmath>

namespace treesched::testing {

ChannelModel random_channel(std::mt19937_64& rng, int n_states) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ChannelModel ch;
  for (int h = 0; h < n_states; ++h) {
    ch.states.push_back(ChannelState{h, 0.2 + 2.0 * u(rng), 0.5 + 1.5 * u(rng), 0.3 * u(rng)});
  }
  auto random_row = [&] {
    std::vector<double> row(static_cast<std::size_t>(n_states));
    double sum = 0.0;
    for (auto& x : row) sum += x = 0.05 + u(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < row.size(); ++i) acc += row[i] /= sum;
    row.back() = 1.0 - acc;
    return row;
  };
  for (int h = 0; h < n_states; ++h) ch.transition.push_back(random_row());
  ch.initial = random_row();
  return make_channel(std::move(ch));
}

MediaTrace random_trace(std::mt19937_64& rng, int n_packets, int horizon, bool dependencies, double edge_prob,
                        bool uniform_size) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Packet> packets;
  for (int i = 0; i < n_packets; ++i) {
    Packet p;
    p.arrival = std::uniform_int_distribution<int>(0, horizon - 1)(rng);
    p.deadline = std::uniform_int_distribution<int>(p.arrival + 1, horizon)(rng);
    p.distortion = 0.5 + 4.5 * u(rng);
    p.size_bits = uniform_size ? 1.0 : 0.5 + 1.5 * u(rng);
    packets.push_back(p);
  }
  // Horizon fixed by the last deadline.
  packets[0].deadline = horizon;
  std::stable_sort(packets.begin(), packets.end(), [](const Packet& a, const Packet& b) { return a.arrival < b.arrival; });
  for (int i = 0; i < n_packets; ++i) {
    auto& p = packets[static_cast<std::size_t>(i)];
    p.id = i;
    if (!dependencies) continue;
    for (int k = 0; k < i; ++k) {
      const auto& q = packets[static_cast<std::size_t>(k)];
      if (q.arrival <= p.arrival && q.deadline <= p.deadline && u(rng) < edge_prob) p.parents.push_back(k);
    }
  }
  return make_trace(std::move(packets));
}

Instance random_instance(std::mt19937_64& rng, const InstanceShape& shape, CostKind kind, double alpha) {
  std::uniform_int_distribution<int> n(shape.min_packets, shape.max_packets);
  std::uniform_int_distribution<int> hz(shape.min_horizon, shape.max_horizon);
  std::uniform_int_distribution<int> hs(shape.min_states, shape.max_states);
  std::uniform_real_distribution<double> lam(0.2, 2.0);
  Instance inst;
  int packets = n(rng);
  int horizon = hz(rng);
  int states = hs(rng);
  inst.trace = random_trace(rng, packets, horizon, shape.dependencies, shape.edge_prob,
                            kind == CostKind::convex || shape.dependencies);
  inst.channel = random_channel(rng, states);
  inst.cost = CostModel{kind, 2.0};
  inst.alpha = alpha;
  inst.lambda = lam(rng);
  return inst;
}

std::vector<std::pair<PacketId, PacketId>> random_dag_edges(std::mt19937_64& rng, int n, double edge_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::pair<PacketId, PacketId>> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (u(rng) < edge_prob) edges.emplace_back(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
    }
  }
  return edges;
}

namespace {

// reach[i][k]: path from nodes[i] to nodes[k].
std::vector<std::vector<bool>> closure(const PriorityGraph& pg) {
  const std::size_t n = pg.nodes.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  auto index = [&](PacketId v) {
    return static_cast<std::size_t>(std::lower_bound(pg.nodes.begin(), pg.nodes.end(), v) - pg.nodes.begin());
  };
  for (const auto& [a, b] : pg.edges) reach[index(a)][index(b)] = true;
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (reach[i][m] && reach[m][k]) reach[i][k] = true;
  return reach;
}

}  // namespace

std::size_t count_leftover_sets(const PriorityGraph& pg) {
  const std::size_t n = pg.nodes.size();
  auto reach = closure(pg);
  std::size_t count = 0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    bool closed = true;
    for (std::size_t i = 0; i < n && closed; ++i) {
      if (!(mask >> i & 1U)) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (reach[i][k] && !(mask >> k & 1U)) {
          closed = false;
          break;
        }
      }
    }
    count += closed ? 1 : 0;
  }
  return count;
}

std::size_t count_antichains(const PriorityGraph& pg) {
  const std::size_t n = pg.nodes.size();
  auto reach = closure(pg);
  std::size_t count = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    bool anti = true;
    for (std::size_t i = 0; i < n && anti; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if ((mask >> i & 1U) && (mask >> k & 1U) && reach[i][k]) anti = false;
    count += anti ? 1 : 0;
  }
  return count;
}

double policy_tree_value(const TransitionModel& model, const ChannelModel& channel, const CostModel& cost,
                         double alpha, double lambda, const JointState& state) {
  if (state.t > model.horizon()) return 0.0;
  const auto& pending = state.key.pending;
  double best = -1e300;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pending.size()); ++mask) {
    std::vector<PacketId> send;
    for (std::size_t i = 0; i < pending.size(); ++i)
      if (mask >> i & 1U) send.push_back(pending[i]);
    if (!model.legal(state.t, state.key, send)) continue;
    const auto& ch = channel.states[static_cast<std::size_t>(state.channel)];
    double v = model.reward(send) - (send.empty() ? 0.0 : lambda * transmission_cost(cost, model.bits(send), ch));
    if (state.t < model.horizon()) {
      for (std::size_t h2 = 0; h2 < channel.size(); ++h2) {
        double p = channel.transition[static_cast<std::size_t>(state.channel)][h2];
        if (p == 0.0) continue;
        JointState next = advance_state(state, send, static_cast<ChannelId>(h2), model);
        v += alpha * p * policy_tree_value(model, channel, cost, alpha, lambda, next);
      }
    }
    best = std::max(best, v);
  }
  return best;
}

double best_subset_value(const SolvedPolicy& policy, const JointState& state) {
  const auto& model = policy.model();
  const auto& pending = state.key.pending;
  const auto& ch = policy.channel().states[static_cast<std::size_t>(state.channel)];
  double best = -1e300;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pending.size()); ++mask) {
    std::vector<PacketId> send;
    for (std::size_t i = 0; i < pending.size(); ++i)
      if (mask >> i & 1U) send.push_back(pending[i]);
    if (!model.legal(state.t, state.key, send)) continue;
    double v = model.reward(send) -
               (send.empty() ? 0.0 : policy.lambda() * transmission_cost(policy.cost(), model.bits(send), ch)) +
               policy.table().post_value(state.t, model.post_key(state.t, state.key, send), state.channel);
    best = std::max(best, v);
  }
  return best;
}

bool relative_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace treesched::testing

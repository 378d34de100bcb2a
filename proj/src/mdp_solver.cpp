#include "treesched/mdp_solver.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <json.hpp>

namespace treesched {

using nlohmann::json;

std::string to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::linear_decomposed:
      return "linear_decomposed";
    case SolveMode::convex_independent:
      return "convex_independent";
    case SolveMode::convex_interdependent:
      return "convex_interdependent";
  }
  return "unknown";
}

double ValueTable::post_value(Slot t, const StateKey& key, ChannelId h) const {
  if (t < 0 || static_cast<std::size_t>(t) >= post.size()) return 0.0;
  auto it = post[static_cast<std::size_t>(t)].find(key);
  if (it == post[static_cast<std::size_t>(t)].end()) {
    throw Error("slot " + std::to_string(t) + ": no post-state value for " + to_string(key));
  }
  return it->second.at(static_cast<std::size_t>(h));
}

double ValueTable::state_value(Slot t, const StateKey& key, ChannelId h) const {
  if (t < 0) throw Error("negative slot");
  if (static_cast<std::size_t>(t) >= state.size()) return 0.0;
  auto it = state[static_cast<std::size_t>(t)].find(key);
  if (it == state[static_cast<std::size_t>(t)].end()) {
    throw Error("slot " + std::to_string(t) + ": state " + to_string(key) + " was never reached by the solver");
  }
  return it->second.at(static_cast<std::size_t>(h));
}

bool ValueTable::has_state(Slot t, const StateKey& key) const {
  return t >= 0 && static_cast<std::size_t>(t) < state.size() && state[static_cast<std::size_t>(t)].contains(key);
}

SolvedPolicy::SolvedPolicy(SolveMode mode, const MediaTrace& trace, ChannelModel channel, CostModel cost,
                           double alpha, double lambda)
    : mode_(mode),
      model_(trace),
      channel_(std::move(channel)),
      cost_(cost),
      alpha_(alpha),
      lambda_(lambda),
      order_(trace) {}

double SolvedPolicy::value(const JointState& state) const {
  if (state.t > trace().horizon()) return 0.0;
  if (mode_ != SolveMode::linear_decomposed) return table_.state_value(state.t, state.key, state.channel);
  double sum = 0.0;
  for (const auto& pol : packet_policies_) {
    const Packet& p = pol.packet();
    if (p.deadline < state.t) continue;
    bool waiting = p.arrival > state.t ||
                   std::binary_search(state.key.pending.begin(), state.key.pending.end(), p.id);
    if (waiting) sum += value_from(pol, channel_, state.t, state.channel);
  }
  return sum;
}

double SolvedPolicy::initial_value() const {
  double v = 0.0;
  const StateKey key = model_.initial_key();
  for (std::size_t h = 0; h < channel_.size(); ++h) {
    if (channel_.initial[h] == 0.0) continue;
    v += channel_.initial[h] * value(JointState{0, key, static_cast<ChannelId>(h)});
  }
  return v;
}

std::vector<SlotCounters> SolvedPolicy::counters() const {
  if (mode_ != SolveMode::linear_decomposed) return table_.counters;
  // One binary traffic state per live packet and channel state.
  std::vector<SlotCounters> out;
  const std::size_t nh = channel_.size();
  for (Slot t = 0; t <= trace().horizon(); ++t) {
    SlotCounters c;
    c.t = t;
    std::size_t live = model_.live(t).size();
    std::size_t carried = 0;
    for (PacketId j : model_.live(t)) carried += trace().packet(j).deadline > t ? 1 : 0;
    c.state_keys = live;
    c.visited_states = nh * live;
    c.evaluated_states = nh * live;
    c.post_keys = carried;
    c.stored_post_states = nh * carried;
    c.comparisons = nh * live;
    out.push_back(c);
  }
  return out;
}

namespace {

void check_common(const MediaTrace& trace, const ChannelModel& channel, double alpha, double lambda,
                  TraceChecks checks) {
  check_alpha_lambda(alpha, lambda);
  auto violations = validate_trace(trace, checks);
  auto channel_violations = validate_channel(channel);
  violations.insert(violations.end(), channel_violations.begin(), channel_violations.end());
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

double step_cost(const SolvedPolicy& policy, int k, PacketId j, ChannelId h) {
  const ChannelState& state = policy.channel().states[static_cast<std::size_t>(h)];
  double bits = policy.trace().packet(j).size_bits;
  if (policy.cost().kind == CostKind::linear) return cost_linear(bits, state);
  return marginal_cost(policy.cost(), k, bits, state);
}

std::vector<PacketId> without(const std::vector<PacketId>& ids, PacketId drop) {
  std::vector<PacketId> out;
  out.reserve(ids.size());
  for (PacketId id : ids) {
    if (id != drop) out.push_back(id);
  }
  return out;
}

std::vector<PacketId> with(std::vector<PacketId> ids, PacketId add) {
  ids.insert(std::upper_bound(ids.begin(), ids.end(), add), add);
  return ids;
}

// Every set reachable from `pending` by deleting priority roots one at a time.
std::vector<std::vector<PacketId>> removal_sets(const std::vector<PacketId>& pending, const PriorityOrder& order) {
  std::set<std::vector<PacketId>> seen{{}};
  std::deque<std::vector<PacketId>> queue{{}};
  std::vector<std::vector<PacketId>> out;
  while (!queue.empty()) {
    std::vector<PacketId> removed = std::move(queue.front());
    queue.pop_front();
    std::vector<PacketId> remaining;
    std::set_difference(pending.begin(), pending.end(), removed.begin(), removed.end(),
                        std::back_inserter(remaining));
    for (PacketId r : order.minimal(remaining)) {
      auto next = with(removed, r);
      if (seen.insert(next).second) queue.push_back(next);
    }
    out.push_back(std::move(removed));
  }
  return out;
}

// Every subset of the decodable packets.
std::vector<std::vector<PacketId>> legal_sets(const std::vector<PacketId>& ready) {
  if (ready.size() > 24) throw Error("loss-tolerant solve: too many decodable packets to enumerate");
  std::vector<std::vector<PacketId>> out;
  const std::uint64_t count = std::uint64_t{1} << ready.size();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    std::vector<PacketId> send;
    for (std::size_t i = 0; i < ready.size(); ++i) {
      if (mask >> i & 1U) send.push_back(ready[i]);
    }
    out.push_back(std::move(send));
  }
  return out;
}

std::size_t nonempty_keys(const ValueMap& map) {
  return static_cast<std::size_t>(
      std::count_if(map.begin(), map.end(), [](const auto& kv) { return !kv.first.pending.empty(); }));
}

}  // namespace

TravelResult travel_state_tree(const SolvedPolicy& policy, const JointState& state) {
  TravelResult out;
  const Slot t = state.t;
  const ChannelId h = state.channel;
  const auto& model = policy.model();
  const auto& table = policy.table();

  std::vector<PacketId> remaining = model.decodable(t, state.key);
  std::vector<PacketId> sent;  // sorted
  double current = table.post_value(t, model.post_key(t, state.key, sent), h);
  out.wait_value = current;
  out.value = current;
  for (int k = 1; !remaining.empty(); ++k) {
    TravelStep step;
    step.roots = policy.order().minimal(remaining);
    double best_next = 0.0;
    for (PacketId j : step.roots) {
      double next = table.post_value(t, model.post_key(t, state.key, with(sent, j)), h);
      double marginal = policy.trace().packet(j).distortion - policy.lambda() * step_cost(policy, k, j, h) + next -
                        current;
      ++out.comparisons;
      if (step.best < 0 || marginal > step.marginal) {
        step.best = j;
        step.marginal = marginal;
        best_next = next;
      }
    }
    out.steps.push_back(step);
    if (!(step.marginal > 0.0)) break;
    out.transmit.push_back(step.best);
    sent = with(std::move(sent), step.best);
    remaining = without(remaining, step.best);
    out.value += step.marginal;
    current = best_next;
  }
  return out;
}

std::vector<PacketId> act_travelling(const SolvedPolicy& policy, const JointState& state) {
  if (state.t > policy.trace().horizon()) return {};
  if (policy.mode() != SolveMode::linear_decomposed) return travel_state_tree(policy, state).transmit;
  std::vector<PacketId> out;
  for (PacketId j : state.key.pending) {
    const auto& pol = policy.packet_policies()[static_cast<std::size_t>(j)];
    if (act_single(pol, state.t, state.channel, true) == SingleAction::transmit) out.push_back(j);
  }
  return out;
}

SolvedPolicy solve_linear(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost, double alpha,
                          double lambda) {
  if (cost.kind != CostKind::linear) throw Error("solve_linear needs a linear cost model");
  if (trace.has_dependencies()) {
    throw Error(
        "solve_linear: the trace has dependency edges and cannot be decomposed; "
        "use solve_convex with interdependent=true (linear marginal costs are supported there)");
  }
  check_common(trace, channel, alpha, lambda, {});
  SolvedPolicy policy(SolveMode::linear_decomposed, trace, channel, cost, alpha, lambda);
  for (const auto& p : trace.packets()) policy.packet_policies_.push_back(solve_single(p, channel, cost, alpha, lambda));
  return policy;
}

SolvedPolicy solve_convex(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost, double alpha,
                          double lambda, bool interdependent, SolveOptions options) {
  if (interdependent != trace.has_dependencies()) {
    throw Error(interdependent ? "interdependent solve requested but the trace has no dependency edges"
                               : "the trace has dependency edges; solve with interdependent=true");
  }
  check_common(trace, channel, alpha, lambda, TraceChecks{true});
  if (cost.kind == CostKind::convex && !(cost.slot_duration > 0.0)) throw Error("slot_duration must be positive");

  SolvedPolicy policy(interdependent ? SolveMode::convex_interdependent : SolveMode::convex_independent, trace,
                      channel, cost, alpha, lambda);
  const auto& model = policy.model_;
  const std::size_t nh = channel.size();
  const Slot horizon = trace.horizon();
  const auto slots = static_cast<std::size_t>(horizon) + 1;
  ValueTable& table = policy.table_;
  table.post.assign(slots, {});
  table.state.assign(slots, {});
  table.counters.assign(slots, {});

  // Forward: every traffic/dependency key reachable from the initial state.
  table.state[0].emplace(model.initial_key(), std::vector<double>(nh, 0.0));
  for (Slot t = 0; t <= horizon; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    for (const auto& [key, unused] : table.state[ti]) {
      auto ready = model.decodable(t, key);
      auto sets = options.loss_tolerant ? legal_sets(ready) : removal_sets(ready, policy.order_);
      for (const auto& send : sets) table.post[ti].try_emplace(model.post_key(t, key, send), nh, 0.0);
    }
    if (t < horizon) {
      for (const auto& [post, unused] : table.post[ti]) {
        table.state[ti + 1].try_emplace(model.augment(t + 1, post), nh, 0.0);
      }
    }
  }

  // Backward induction.
  for (Slot t = horizon; t >= 0; --t) {
    const auto ti = static_cast<std::size_t>(t);
    if (t < horizon) {
      for (auto& [post, values] : table.post[ti]) {
        const auto& next = table.state[ti + 1].at(model.augment(t + 1, post));
        for (std::size_t h = 0; h < nh; ++h) {
          double expected = 0.0;
          for (std::size_t h2 = 0; h2 < nh; ++h2) expected += channel.transition[h][h2] * next[h2];
          values[h] = alpha * expected;
        }
      }
    }
    SlotCounters& c = table.counters[ti];
    c.t = t;
    for (auto& [key, values] : table.state[ti]) {
      for (std::size_t h = 0; h < nh; ++h) {
        TravelResult r = travel_state_tree(policy, JointState{t, key, static_cast<ChannelId>(h)});
        values[h] = r.value;
        c.comparisons += r.comparisons;
      }
    }
    c.state_keys = table.state[ti].size();
    c.evaluated_states = nh * c.state_keys;
    const auto& arriving = model.arrivals(t);
    c.visited_states = nh * static_cast<std::size_t>(std::count_if(
                                table.state[ti].begin(), table.state[ti].end(), [&](const auto& kv) {
                                  return std::any_of(kv.first.pending.begin(), kv.first.pending.end(), [&](PacketId j) {
                                    return std::find(arriving.begin(), arriving.end(), j) == arriving.end();
                                  });
                                }));
    c.post_keys = table.post[ti].size();
    c.stored_post_states = nh * nonempty_keys(table.post[ti]);
  }
  return policy;
}

SolvedPolicy solve(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost, double alpha,
                   double lambda, SolveOptions options) {
  if (cost.kind == CostKind::linear && !trace.has_dependencies() && !options.loss_tolerant) {
    return solve_linear(trace, channel, cost, alpha, lambda);
  }
  return solve_convex(trace, channel, cost, alpha, lambda, trace.has_dependencies(), options);
}

namespace {

std::uint64_t saturating_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > UINT64_MAX / base) return UINT64_MAX;
    out *= base;
  }
  return out;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

}  // namespace

std::vector<ComplexityRow> complexity_report(const SolvedPolicy& policy) {
  std::vector<ComplexityRow> rows;
  const auto& model = policy.model();
  const std::uint64_t nh = policy.channel().size();
  auto counters = policy.counters();
  for (const auto& c : counters) {
    ComplexityRow row;
    row.t = c.t;
    row.visited_states = c.visited_states;
    row.stored_post_states = c.stored_post_states;
    row.comparisons = c.comparisons;
    auto reach = reachable_states(policy.trace(), policy.order(), c.t);
    row.aux_nodes = reach.aux_graph.size();
    row.aux_phi = disconnection_degree(reach.aux_graph);
    row.dependency_packets = model.dependency_set(c.t).size();
    row.predicted_visited = static_cast<std::size_t>(nh) * (std::size_t{1} << row.dependency_packets) *
                            (row.aux_nodes + row.aux_phi);

    std::size_t live = model.live(c.t).size();
    std::size_t carried = 0;
    for (PacketId j : model.live(c.t)) carried += policy.trace().packet(j).deadline > c.t ? 1 : 0;
    std::uint64_t dep_now = saturating_pow(2, row.dependency_packets);
    std::uint64_t dep_next = saturating_pow(2, model.dependency_set(c.t + 1).size());
    row.standard_states = saturating_mul(nh, saturating_mul(saturating_pow(2, live), dep_now));
    row.standard_post_states = saturating_mul(nh, saturating_mul(saturating_pow(2, carried), dep_next));
    row.standard_comparisons = saturating_mul(nh, saturating_mul(saturating_pow(3, live), dep_now));
    rows.push_back(row);
  }
  return rows;
}

std::string complexity_csv(const std::vector<ComplexityRow>& rows) {
  std::string out =
      "t,visited_states,stored_post_states,comparisons,aux_nodes,aux_phi,dependency_packets,predicted_visited,"
      "standard_states,standard_post_states,standard_comparisons\n";
  for (const auto& r : rows) {
    out += std::to_string(r.t) + "," + std::to_string(r.visited_states) + "," + std::to_string(r.stored_post_states) +
           "," + std::to_string(r.comparisons) + "," + std::to_string(r.aux_nodes) + "," + std::to_string(r.aux_phi) +
           "," + std::to_string(r.dependency_packets) + "," + std::to_string(r.predicted_visited) + "," +
           std::to_string(r.standard_states) + "," + std::to_string(r.standard_post_states) + "," +
           std::to_string(r.standard_comparisons) + "\n";
  }
  return out;
}

namespace {

json deps_json(const TransitionModel& model, Slot t, const StateKey& key) {
  json deps = json::array();
  for (PacketId k : model.dependency_set(t)) {
    bool lost = std::binary_search(key.lost.begin(), key.lost.end(), k);
    deps.push_back({k, lost ? 0 : 1});
  }
  return deps;
}

json value_map_json(const TransitionModel& model, Slot dep_slot, const ValueMap& map) {
  std::vector<const ValueMap::value_type*> entries;
  for (const auto& kv : map) entries.push_back(&kv);
  std::sort(entries.begin(), entries.end(), [](const auto* a, const auto* b) {
    return std::tie(a->first.pending, a->first.lost) < std::tie(b->first.pending, b->first.lost);
  });
  json out = json::array();
  for (const auto* kv : entries) {
    out.push_back({{"pending", kv->first.pending}, {"deps", deps_json(model, dep_slot, kv->first)},
                   {"values", kv->second}});
  }
  return out;
}

}  // namespace

std::string policy_to_json(const SolvedPolicy& policy) {
  json doc;
  doc["engine"] = "proposed";
  doc["mode"] = to_string(policy.mode());
  doc["alpha"] = policy.alpha();
  doc["lambda"] = policy.lambda();
  doc["cost"] = to_string(policy.cost().kind);
  doc["horizon"] = policy.trace().horizon();
  doc["channel_states"] = policy.channel().size();
  doc["initial_value"] = policy.initial_value();
  json slots = json::array();
  for (const auto& c : policy.counters()) {
    json slot;
    slot["t"] = c.t;
    slot["counters"] = {{"visited_states", c.visited_states},
                        {"evaluated_states", c.evaluated_states},
                        {"stored_post_states", c.stored_post_states},
                        {"comparisons", c.comparisons}};
    if (policy.mode() != SolveMode::linear_decomposed) {
      const auto ti = static_cast<std::size_t>(c.t);
      slot["states"] = value_map_json(policy.model(), c.t, policy.table().state[ti]);
      slot["post_states"] = value_map_json(policy.model(), c.t + 1, policy.table().post[ti]);
    }
    slots.push_back(std::move(slot));
  }
  doc["slots"] = std::move(slots);
  if (policy.mode() == SolveMode::linear_decomposed) {
    json packets = json::array();
    for (const auto& pol : policy.packet_policies()) {
      packets.push_back({{"id", pol.packet().id},
                         {"first_slot", pol.first_slot()},
                         {"thresholds", pol.thresholds()},
                         {"values", pol.values()}});
    }
    doc["packets"] = std::move(packets);
  }
  return doc.dump(2) + "\n";
}

}  // namespace treesched

#include "treesched/oracle.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

namespace treesched {

using nlohmann::json;

double ExhaustiveSolution::value(const JointState& state) const {
  if (state.t < 0) throw Error("negative slot");
  if (static_cast<std::size_t>(state.t) >= values.size()) return 0.0;
  const auto& map = values[static_cast<std::size_t>(state.t)];
  auto it = map.find(state.key);
  if (it == map.end()) throw Error("oracle has no entry for " + to_string(state.key));
  return it->second.at(static_cast<std::size_t>(state.channel));
}

double ExhaustiveSolution::initial_value() const {
  double v = 0.0;
  const StateKey key = model.initial_key();
  for (std::size_t h = 0; h < channel.size(); ++h) {
    if (channel.initial[h] != 0.0) v += channel.initial[h] * value(JointState{0, key, static_cast<ChannelId>(h)});
  }
  return v;
}

namespace {

std::vector<PacketId> pick(const std::vector<PacketId>& ids, std::uint64_t mask) {
  std::vector<PacketId> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (mask >> i & 1U) out.push_back(ids[i]);
  }
  return out;
}

}  // namespace

ExhaustiveSolution solve_exhaustive(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost,
                                    double alpha, double lambda) {
  if (trace.size() > kExhaustiveMaxPackets) {
    throw Error("exhaustive solver refuses " + std::to_string(trace.size()) + " packets (limit " +
                std::to_string(kExhaustiveMaxPackets) + ")");
  }
  check_alpha_lambda(alpha, lambda);
  auto violations = validate_trace(trace, {});
  auto channel_violations = validate_channel(channel);
  violations.insert(violations.end(), channel_violations.begin(), channel_violations.end());
  if (!violations.empty()) throw ValidationError(std::move(violations));

  ExhaustiveSolution sol{TransitionModel(trace), channel, cost, alpha, lambda, {}, {}, {}, {}, 0, 0};
  const auto& model = sol.model;
  const std::size_t nh = channel.size();
  const Slot horizon = trace.horizon();
  const auto slots = static_cast<std::size_t>(horizon) + 1;
  sol.values.assign(slots, {});
  sol.best_actions.assign(slots, {});
  sol.state_counts.assign(slots, 0);
  sol.comparison_counts.assign(slots, 0);

  for (Slot t = horizon; t >= 0; --t) {
    const auto ti = static_cast<std::size_t>(t);
    const auto& live = model.live(t);
    const auto& deps = model.dependency_set(t);
    const std::uint64_t traffic_count = std::uint64_t{1} << live.size();
    const std::uint64_t dep_count = std::uint64_t{1} << deps.size();
    sol.state_counts[ti] = nh * traffic_count * dep_count;

    for (std::uint64_t dmask = 0; dmask < dep_count; ++dmask) {
      for (std::uint64_t bmask = 0; bmask < traffic_count; ++bmask) {
        StateKey key{pick(live, bmask), pick(deps, dmask)};
        // Keys listing a dead packet as pending are never produced by the
        // dynamics; their canonical twin without it is evaluated instead.
        if (std::any_of(key.pending.begin(), key.pending.end(),
                        [&](PacketId j) { return model.dead(t, key, j); })) {
          continue;
        }
        std::vector<double> best(nh, 0.0);
        std::vector<std::vector<PacketId>> best_send(nh);
        std::vector<bool> seen(nh, false);
        const std::uint64_t subsets = std::uint64_t{1} << key.pending.size();
        for (std::uint64_t smask = 0; smask < subsets; ++smask) {
          auto send = pick(key.pending, smask);
          if (!model.legal(t, key, send)) continue;
          const double reward = model.reward(send);
          const double bits = model.bits(send);
          const std::vector<double>* next = nullptr;
          if (t < horizon) next = &sol.values[ti + 1].at(model.augment(t + 1, model.post_key(t, key, send)));
          for (std::size_t h = 0; h < nh; ++h) {
            double v = reward - (send.empty() ? 0.0 : lambda * transmission_cost(cost, bits, channel.states[h]));
            if (next != nullptr) {
              double expected = 0.0;
              for (std::size_t h2 = 0; h2 < nh; ++h2) expected += channel.transition[h][h2] * (*next)[h2];
              v += alpha * expected;
            }
            ++sol.comparison_counts[ti];
            if (!seen[h] || v > best[h]) {
              seen[h] = true;
              best[h] = v;
              best_send[h] = send;
            }
          }
        }
        sol.values[ti].emplace(key, std::move(best));
        sol.best_actions[ti].emplace(std::move(key), std::move(best_send));
      }
    }
    sol.state_count += sol.state_counts[ti];
    sol.comparison_count += sol.comparison_counts[ti];
  }
  return sol;
}

std::string exhaustive_to_json(const ExhaustiveSolution& solution) {
  const auto& model = solution.model;
  json doc;
  doc["engine"] = "oracle";
  doc["alpha"] = solution.alpha;
  doc["lambda"] = solution.lambda;
  doc["cost"] = to_string(solution.cost.kind);
  doc["horizon"] = model.horizon();
  doc["channel_states"] = solution.channel.size();
  doc["initial_value"] = solution.initial_value();
  json slots = json::array();
  for (std::size_t ti = 0; ti < solution.values.size(); ++ti) {
    const auto t = static_cast<Slot>(ti);
    std::vector<const ValueMap::value_type*> entries;
    for (const auto& kv : solution.values[ti]) entries.push_back(&kv);
    std::sort(entries.begin(), entries.end(), [](const auto* a, const auto* b) {
      return std::tie(a->first.pending, a->first.lost) < std::tie(b->first.pending, b->first.lost);
    });
    json states = json::array();
    for (const auto* kv : entries) {
      json deps = json::array();
      for (PacketId k : model.dependency_set(t)) {
        bool lost = std::binary_search(kv->first.lost.begin(), kv->first.lost.end(), k);
        deps.push_back({k, lost ? 0 : 1});
      }
      states.push_back({{"pending", kv->first.pending},
                        {"deps", deps},
                        {"values", kv->second},
                        {"actions", solution.best_actions[ti].at(kv->first)}});
    }
    slots.push_back({{"t", t},
                     {"counters", {{"states", solution.state_counts[ti]}, {"comparisons", solution.comparison_counts[ti]}}},
                     {"states", std::move(states)}});
  }
  doc["slots"] = std::move(slots);
  return doc.dump(2) + "\n";
}

ScheduleResult enumerate_single_schedules(const Packet& packet, const ChannelModel& channel, const CostModel& cost,
                                          double alpha, double lambda) {
  if (packet.deadline > kScheduleEnumerationMaxHorizon) {
    throw Error("schedule enumeration refuses deadline " + std::to_string(packet.deadline) + " (limit " +
                std::to_string(kScheduleEnumerationMaxHorizon) + ")");
  }
  check_alpha_lambda(alpha, lambda);
  if (!(packet.arrival < packet.deadline)) throw Error("packet needs arrival < deadline");
  auto violations = validate_channel(channel);
  if (!violations.empty()) throw ValidationError(std::move(violations));

  const std::size_t nh = channel.size();
  std::vector<double> immediate(nh);
  for (std::size_t h = 0; h < nh; ++h) {
    immediate[h] = packet.distortion - lambda * transmission_cost(cost, packet.size_bits, channel.states[h]);
  }

  // No memoization: each call is one node of the history tree.
  std::function<double(Slot, std::size_t)> best = [&](Slot t, std::size_t h) {
    double wait = 0.0;
    if (t < packet.deadline) {
      for (std::size_t h2 = 0; h2 < nh; ++h2) {
        if (channel.transition[h][h2] != 0.0) wait += channel.transition[h][h2] * best(t + 1, h2);
      }
      wait *= alpha;
    }
    return std::max(immediate[h], wait);
  };

  ScheduleResult out;
  out.value.resize(nh);
  out.best_fixed_slot.assign(nh, -1);
  out.fixed_value.assign(nh, 0.0);
  for (std::size_t h = 0; h < nh; ++h) {
    out.value[h] = best(packet.arrival, h);
    std::vector<double> dist(nh, 0.0);
    dist[h] = 1.0;
    double discount = 1.0;
    for (Slot s = packet.arrival; s <= packet.deadline; ++s) {
      double v = 0.0;
      for (std::size_t h2 = 0; h2 < nh; ++h2) v += dist[h2] * immediate[h2];
      v *= discount;
      if (v > out.fixed_value[h]) {
        out.fixed_value[h] = v;
        out.best_fixed_slot[h] = s;
      }
      std::vector<double> next(nh, 0.0);
      for (std::size_t a = 0; a < nh; ++a) {
        for (std::size_t b = 0; b < nh; ++b) next[b] += dist[a] * channel.transition[a][b];
      }
      dist = std::move(next);
      discount *= alpha;
    }
  }
  return out;
}

}  // namespace treesched

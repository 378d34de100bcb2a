#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treesched/media_model.hpp"

namespace treesched {

enum class Precedence { j_before_k, k_before_j, incomparable };

// Transmission priority over all packets of a trace, inferred from
// attributes only. The base relation puts j before k when
//   - k depends (transitively) on j, or
//   - q_j >= q_k, d_j <= d_k and descendants(k) is a subset of descendants(j);
//     when both directions hold the lower id goes first.
// The stored relation is the transitive closure of the base relation, so it is
// a strict partial order.
class PriorityOrder {
 public:
  PriorityOrder() = default;
  explicit PriorityOrder(const MediaTrace& trace);

  std::size_t size() const { return n_; }
  bool before(PacketId j, PacketId k) const {
    return before_[static_cast<std::size_t>(j) * n_ + static_cast<std::size_t>(k)] != 0;
  }
  Precedence compare(PacketId j, PacketId k) const;

  // Packets of `ids` with no higher-priority packet inside `ids`.
  std::vector<PacketId> minimal(std::span<const PacketId> ids) const;

 private:
  std::size_t n_ = 0;
  std::vector<char> before_;
};

Precedence higher_priority(const Packet& j, const Packet& k, const MediaTrace& trace);

// Transitive reduction of a priority relation restricted to `nodes`.
// Edge (j, k) means j goes before k with nothing in between.
struct PriorityGraph {
  std::vector<PacketId> nodes;  // sorted
  std::vector<std::pair<PacketId, PacketId>> edges;

  bool empty() const { return nodes.empty(); }
  std::size_t size() const { return nodes.size(); }
  bool operator==(const PriorityGraph&) const = default;
};

using PriorityRelation = std::function<bool(PacketId, PacketId)>;

// Graph over `ids` for an arbitrary strict partial order.
PriorityGraph build_graph(std::span<const PacketId> ids, const PriorityRelation& before);
PriorityGraph build_priority_graph(std::span<const PacketId> ids, const PriorityOrder& order);
PriorityGraph build_priority_graph(std::span<const PacketId> ids, const MediaTrace& trace);

// Graph from explicit edges; the edge list is reduced transitively.
PriorityGraph graph_from_edges(std::vector<PacketId> nodes, std::span<const std::pair<PacketId, PacketId>> edges);

std::vector<PacketId> roots(const PriorityGraph& pg);
// Graph minus `v` and its edges. `v` must be a root to keep the reduction exact.
PriorityGraph remove_node(const PriorityGraph& pg, PacketId v);
// Unordered node pairs with no directed path between them.
std::size_t disconnection_degree(const PriorityGraph& pg);

// Deduplicated tree of graphs reached by deleting roots one at a time.
// nodes[0] is the input graph; the empty graph is the single leaf.
struct StateTree {
  std::vector<PriorityGraph> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // parent -> child

  std::size_t distinct_nonempty() const;
};

StateTree build_state_tree(const PriorityGraph& pg);

std::string to_dot(const PriorityGraph& pg, const std::string& name = "priority_graph");
std::string to_dot(const StateTree& tree, const std::string& name = "state_tree");

// Traffic states that can occur at slot t starting from the initial state,
// ignoring dependency losses. `aux_graph` orders the packets still waiting
// from earlier slots ({j : t_j < t <= d_j}) by priority restricted to pairs
// with t_j <= t_k; each node of its state tree is one possible set of
// leftovers, to which the packets arriving at t are added.
struct ReachableStates {
  PriorityGraph aux_graph;
  std::vector<std::vector<PacketId>> leftovers;  // state-tree nodes, incl. the empty set
  std::vector<std::vector<PacketId>> states;     // leftovers plus arrivals at t
  std::size_t nonempty_leftovers() const;
};

ReachableStates reachable_states(const MediaTrace& trace, const PriorityOrder& order, Slot t);
ReachableStates reachable_states(const MediaTrace& trace, Slot t);

}  // namespace treesched

#include "treesched/priority.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace treesched {

PriorityOrder::PriorityOrder(const MediaTrace& trace) : n_(trace.size()), before_(n_ * n_, 0) {
  std::vector<std::vector<char>> desc(n_, std::vector<char>(n_, 0));
  for (std::size_t j = 0; j < n_; ++j) {
    for (PacketId d : descendants(trace, static_cast<PacketId>(j))) desc[j][static_cast<std::size_t>(d)] = 1;
  }
  auto subset = [&](std::size_t a, std::size_t b) {  // desc(a) within desc(b)
    for (std::size_t i = 0; i < n_; ++i) {
      if (desc[a][i] && !desc[b][i]) return false;
    }
    return true;
  };
  auto dominates = [&](std::size_t j, std::size_t k) {
    const Packet& pj = trace.packet(static_cast<PacketId>(j));
    const Packet& pk = trace.packet(static_cast<PacketId>(k));
    return pj.distortion >= pk.distortion && pj.deadline <= pk.deadline && subset(k, j);
  };

  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t k = 0; k < n_; ++k) {
      if (j == k) continue;
      bool edge = desc[j][k] != 0;
      if (!edge && !desc[k][j] && dominates(j, k)) edge = !dominates(k, j) || j < k;
      before_[j * n_ + k] = edge ? 1 : 0;
    }
  }
  // Warshall closure.
  for (std::size_t m = 0; m < n_; ++m) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (!before_[j * n_ + m]) continue;
      for (std::size_t k = 0; k < n_; ++k) {
        if (before_[m * n_ + k]) before_[j * n_ + k] = 1;
      }
    }
  }
}

Precedence PriorityOrder::compare(PacketId j, PacketId k) const {
  if (before(j, k)) return Precedence::j_before_k;
  if (before(k, j)) return Precedence::k_before_j;
  return Precedence::incomparable;
}

std::vector<PacketId> PriorityOrder::minimal(std::span<const PacketId> ids) const {
  std::vector<PacketId> out;
  for (PacketId k : ids) {
    bool blocked = std::any_of(ids.begin(), ids.end(), [&](PacketId j) { return before(j, k); });
    if (!blocked) out.push_back(k);
  }
  return out;
}

Precedence higher_priority(const Packet& j, const Packet& k, const MediaTrace& trace) {
  if (j.id == k.id) throw Error("higher_priority: packets must differ");
  return PriorityOrder(trace).compare(j.id, k.id);
}

PriorityGraph build_graph(std::span<const PacketId> ids, const PriorityRelation& before) {
  PriorityGraph pg;
  pg.nodes.assign(ids.begin(), ids.end());
  std::sort(pg.nodes.begin(), pg.nodes.end());
  for (PacketId j : pg.nodes) {
    for (PacketId k : pg.nodes) {
      if (j == k || !before(j, k)) continue;
      bool covered = std::any_of(pg.nodes.begin(), pg.nodes.end(), [&](PacketId m) {
        return m != j && m != k && before(j, m) && before(m, k);
      });
      if (!covered) pg.edges.emplace_back(j, k);
    }
  }
  return pg;
}

PriorityGraph build_priority_graph(std::span<const PacketId> ids, const PriorityOrder& order) {
  return build_graph(ids, [&](PacketId j, PacketId k) { return order.before(j, k); });
}

PriorityGraph build_priority_graph(std::span<const PacketId> ids, const MediaTrace& trace) {
  return build_priority_graph(ids, PriorityOrder(trace));
}

namespace {

// reach[a][b]: path from nodes[a] to nodes[b].
std::vector<std::vector<char>> reachability(const PriorityGraph& pg) {
  const std::size_t n = pg.nodes.size();
  std::map<PacketId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[pg.nodes[i]] = i;
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (const auto& [a, b] : pg.edges) reach[index.at(a)][index.at(b)] = 1;
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][m]) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (reach[m][k]) reach[i][k] = 1;
      }
    }
  }
  return reach;
}

}  // namespace

PriorityGraph graph_from_edges(std::vector<PacketId> nodes, std::span<const std::pair<PacketId, PacketId>> edges) {
  PriorityGraph raw;
  raw.nodes = std::move(nodes);
  std::sort(raw.nodes.begin(), raw.nodes.end());
  raw.edges.assign(edges.begin(), edges.end());
  auto reach = reachability(raw);
  for (std::size_t i = 0; i < raw.nodes.size(); ++i) {
    if (reach[i][i]) throw Error("priority graph edges contain a cycle");
  }
  std::map<PacketId, std::size_t> index;
  for (std::size_t i = 0; i < raw.nodes.size(); ++i) index[raw.nodes[i]] = i;
  return build_graph(raw.nodes, [&](PacketId a, PacketId b) { return reach[index.at(a)][index.at(b)] != 0; });
}

std::vector<PacketId> roots(const PriorityGraph& pg) {
  std::vector<PacketId> out;
  for (PacketId v : pg.nodes) {
    bool has_in = std::any_of(pg.edges.begin(), pg.edges.end(), [&](const auto& e) { return e.second == v; });
    if (!has_in) out.push_back(v);
  }
  return out;
}

PriorityGraph remove_node(const PriorityGraph& pg, PacketId v) {
  PriorityGraph out;
  for (PacketId n : pg.nodes) {
    if (n != v) out.nodes.push_back(n);
  }
  for (const auto& e : pg.edges) {
    if (e.first != v && e.second != v) out.edges.push_back(e);
  }
  return out;
}

std::size_t disconnection_degree(const PriorityGraph& pg) {
  auto reach = reachability(pg);
  std::size_t count = 0;
  for (std::size_t i = 0; i < pg.nodes.size(); ++i) {
    for (std::size_t k = i + 1; k < pg.nodes.size(); ++k) {
      if (!reach[i][k] && !reach[k][i]) ++count;
    }
  }
  return count;
}

std::size_t StateTree::distinct_nonempty() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const PriorityGraph& g) { return !g.empty(); }));
}

StateTree build_state_tree(const PriorityGraph& pg) {
  StateTree tree;
  std::map<std::vector<PacketId>, std::size_t> seen;
  std::deque<std::size_t> queue;
  tree.nodes.push_back(pg);
  seen.emplace(pg.nodes, 0);
  queue.push_back(0);
  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    for (PacketId v : roots(tree.nodes[cur])) {
      PriorityGraph child = remove_node(tree.nodes[cur], v);
      auto [it, inserted] = seen.emplace(child.nodes, tree.nodes.size());
      if (inserted) {
        tree.nodes.push_back(std::move(child));
        queue.push_back(it->second);
      }
      tree.edges.emplace_back(cur, it->second);
    }
  }
  return tree;
}

namespace {

std::string set_label(const std::vector<PacketId>& ids) {
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + std::to_string(ids[i]);
  return out + "}";
}

}  // namespace

std::string to_dot(const PriorityGraph& pg, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n";
  for (PacketId v : pg.nodes) os << "  p" << v << " [label=\"" << v << "\"];\n";
  for (const auto& [a, b] : pg.edges) os << "  p" << a << " -> p" << b << ";\n";
  os << "}\n";
  return os.str();
}

std::string to_dot(const StateTree& tree, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    os << "  n" << i << " [label=\"" << set_label(tree.nodes[i].nodes) << "\"];\n";
  }
  for (const auto& [a, b] : tree.edges) os << "  n" << a << " -> n" << b << ";\n";
  os << "}\n";
  return os.str();
}

std::size_t ReachableStates::nonempty_leftovers() const {
  return static_cast<std::size_t>(
      std::count_if(leftovers.begin(), leftovers.end(), [](const auto& s) { return !s.empty(); }));
}

ReachableStates reachable_states(const MediaTrace& trace, const PriorityOrder& order, Slot t) {
  if (t < 0 || t > trace.horizon()) {
    throw Error("slot " + std::to_string(t) + " outside [0, " + std::to_string(trace.horizon()) + "]");
  }
  std::vector<PacketId> waiting;
  std::vector<PacketId> arriving;
  for (const auto& p : trace.packets()) {
    if (p.arrival < t && t <= p.deadline) waiting.push_back(p.id);
    if (p.arrival == t) arriving.push_back(p.id);
  }
  ReachableStates out;
  out.aux_graph = build_graph(waiting, [&](PacketId j, PacketId k) {
    return order.before(j, k) && trace.packet(j).arrival <= trace.packet(k).arrival;
  });
  StateTree tree = build_state_tree(out.aux_graph);
  for (const auto& node : tree.nodes) {
    out.leftovers.push_back(node.nodes);
    std::vector<PacketId> state = node.nodes;
    state.insert(state.end(), arriving.begin(), arriving.end());
    std::sort(state.begin(), state.end());
    out.states.push_back(std::move(state));
  }
  return out;
}

ReachableStates reachable_states(const MediaTrace& trace, Slot t) {
  return reachable_states(trace, PriorityOrder(trace), t);
}

}  // namespace treesched

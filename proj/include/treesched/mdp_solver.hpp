#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "treesched/channel_model.hpp"
#include "treesched/media_model.hpp"
#include "treesched/priority.hpp"
#include "treesched/single_packet.hpp"
#include "treesched/state_model.hpp"

namespace treesched {

enum class SolveMode { linear_decomposed, convex_independent, convex_interdependent };

std::string to_string(SolveMode mode);

struct SolveOptions {
  // Also tabulate post-states reachable when some transmitted packets are
  // lost. Needed to run the policy closed-loop over a lossy link.
  bool loss_tolerant = false;
};

// Work done at one slot. State counts are multiplied by |H|.
struct SlotCounters {
  Slot t = 0;
  std::size_t state_keys = 0;          // distinct traffic/dependency keys
  std::size_t visited_states = 0;      // keys whose leftovers from earlier slots are non-empty
  std::size_t evaluated_states = 0;    // every key
  std::size_t post_keys = 0;           // distinct post keys
  std::size_t stored_post_states = 0;  // post keys with non-empty traffic
  std::size_t comparisons = 0;         // marginal-utility evaluations in root selection
};

using ValueMap = std::unordered_map<StateKey, std::vector<double>, StateKeyHash>;

// Value functions indexed by slot, key and channel state.
//   post[t][key][h]  expected discounted value after slot t's actions
//   state[t][key][h] optimal value at the start of slot t
struct ValueTable {
  std::vector<ValueMap> post;
  std::vector<ValueMap> state;
  std::vector<SlotCounters> counters;

  // Throws on a key the solver never tabulated.
  double post_value(Slot t, const StateKey& key, ChannelId h) const;
  double state_value(Slot t, const StateKey& key, ChannelId h) const;
  bool has_state(Slot t, const StateKey& key) const;
};

class SolvedPolicy {
 public:
  SolvedPolicy(SolveMode mode, const MediaTrace& trace, ChannelModel channel, CostModel cost, double alpha,
               double lambda);

  SolveMode mode() const { return mode_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  const MediaTrace& trace() const { return model_.trace(); }
  const TransitionModel& model() const { return model_; }
  const ChannelModel& channel() const { return channel_; }
  const CostModel& cost() const { return cost_; }
  const PriorityOrder& order() const { return order_; }

  // Linear decomposed mode only.
  const std::vector<ThresholdPolicy>& packet_policies() const { return packet_policies_; }
  // Tree modes only.
  const ValueTable& table() const { return table_; }

  // Optimal expected discounted utility from `state`.
  double value(const JointState& state) const;
  // Expectation of value() over the initial channel distribution at slot 0.
  double initial_value() const;

  std::vector<SlotCounters> counters() const;

 private:
  friend SolvedPolicy solve_linear(const MediaTrace&, const ChannelModel&, const CostModel&, double, double);
  friend SolvedPolicy solve_convex(const MediaTrace&, const ChannelModel&, const CostModel&, double, double, bool,
                                   SolveOptions);

  SolveMode mode_;
  TransitionModel model_;
  ChannelModel channel_;
  CostModel cost_;
  double alpha_;
  double lambda_;
  PriorityOrder order_;
  std::vector<ThresholdPolicy> packet_policies_;
  ValueTable table_;
};

// Independent packets, linear cost: one optimal stopping problem per packet.
SolvedPolicy solve_linear(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost, double alpha,
                          double lambda);

// Backward induction over the reachable priority-ordered states, choosing each
// slot's transmissions with the travelling-state-tree search. `interdependent`
// must match whether the trace has dependency edges. Linear costs are allowed
// (and needed for interdependent linear traces). Every packet must have the
// same size: the attribute-based priority ignores size.
SolvedPolicy solve_convex(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost, double alpha,
                          double lambda, bool interdependent, SolveOptions options = {});

// Picks the mode: decomposed for independent linear traces, tree otherwise.
SolvedPolicy solve(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost, double alpha,
                   double lambda, SolveOptions options = {});

struct TravelStep {
  std::vector<PacketId> roots;  // roots of the remaining priority graph
  PacketId best = -1;           // argmax root, lowest id on ties
  double marginal = 0.0;        // its marginal utility
};

struct TravelResult {
  std::vector<PacketId> transmit;  // in selection order
  std::vector<TravelStep> steps;   // includes the final rejected step, if any
  double wait_value = 0.0;         // post value with nothing sent
  double value = 0.0;              // resulting state value
  std::size_t comparisons = 0;
};

// Root selection and stopping over the state tree of `state`, using the
// post-state values at state.t.
//
//   G_0 = pending packets that are decodable at the start of the slot
//   j_k = argmax_{j in roots(G_{k-1})} q_j - lambda * (rho(k l) - rho((k-1) l))
//                                       + post(G_{k-1} \ {j}) - post(G_{k-1})
//   send j_k while that marginal is strictly positive
//
// The value is post(G_0) plus the accepted marginals, which telescopes to
// sum q - lambda * rho(k_max l) + post(G_kmax).
TravelResult travel_state_tree(const SolvedPolicy& policy, const JointState& state);

// Packets to send in `state`, in selection order. Decomposed mode applies
// each packet's threshold instead.
std::vector<PacketId> act_travelling(const SolvedPolicy& policy, const JointState& state);

struct ComplexityRow {
  Slot t = 0;
  std::size_t visited_states = 0;
  std::size_t stored_post_states = 0;
  std::size_t comparisons = 0;
  // |H| * 2^|K^t| * (N + phi) of the leftover priority graph at t.
  std::size_t aux_nodes = 0;
  std::size_t aux_phi = 0;
  std::size_t dependency_packets = 0;
  std::size_t predicted_visited = 0;
  // Standard dynamic programming over every traffic/dependency bit vector.
  std::uint64_t standard_states = 0;
  std::uint64_t standard_post_states = 0;
  std::uint64_t standard_comparisons = 0;
};

std::vector<ComplexityRow> complexity_report(const SolvedPolicy& policy);
std::string complexity_csv(const std::vector<ComplexityRow>& rows);

// Policy dump: per-slot value maps and counters.
std::string policy_to_json(const SolvedPolicy& policy);

}  // namespace treesched

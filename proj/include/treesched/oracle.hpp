#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "treesched/channel_model.hpp"
#include "treesched/mdp_solver.hpp"
#include "treesched/media_model.hpp"
#include "treesched/state_model.hpp"

namespace treesched {

inline constexpr std::size_t kExhaustiveMaxPackets = 14;
inline constexpr Slot kScheduleEnumerationMaxHorizon = 12;

using ActionMap = std::unordered_map<StateKey, std::vector<std::vector<PacketId>>, StateKeyHash>;

// Standard joint dynamic program over every traffic/dependency key of every
// slot, maximizing over all legal transmit subsets.
struct ExhaustiveSolution {
  TransitionModel model;
  ChannelModel channel;
  CostModel cost;
  double alpha = 0.0;
  double lambda = 0.0;
  std::vector<ValueMap> values;      // [t][key][h]
  std::vector<ActionMap> best_actions;  // [t][key][h], lowest-mask subset among ties
  // Per slot: |H| * 2^|live| * 2^|K^t|, and subsets evaluated.
  std::vector<std::size_t> state_counts;
  std::vector<std::size_t> comparison_counts;
  std::size_t state_count = 0;
  std::size_t comparison_count = 0;

  double value(const JointState& state) const;
  double initial_value() const;
};

ExhaustiveSolution solve_exhaustive(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost,
                                    double alpha, double lambda);

// Same layout as policy_to_json, engine "oracle".
std::string exhaustive_to_json(const ExhaustiveSolution& solution);

struct ScheduleResult {
  // Best history-dependent rule, seen from the arrival slot in each channel state.
  std::vector<double> value;
  // Best fixed transmission slot per starting channel state (open loop), and its value.
  std::vector<Slot> best_fixed_slot;
  std::vector<double> fixed_value;
};

// Recursion over the full channel-history tree between arrival and deadline
// with actions {send now, wait}.
ScheduleResult enumerate_single_schedules(const Packet& packet, const ChannelModel& channel, const CostModel& cost,
                                          double alpha, double lambda);

}  // namespace treesched

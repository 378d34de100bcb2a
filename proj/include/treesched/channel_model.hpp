#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "treesched/media_model.hpp"

namespace treesched {

using ChannelId = int;

struct ChannelState {
  ChannelId id = 0;
  double gain = 1.0;       // normalized gain, used by the power (convex) cost
  double rate = 1.0;       // bits per unit time, used by the retransmission (linear) cost
  double loss_prob = 0.0;  // per-attempt loss probability, linear cost only
};

// Finite-state Markov channel. transition[h][h'] = P(h' | h).
struct ChannelModel {
  std::vector<ChannelState> states;
  std::vector<std::vector<double>> transition;
  std::vector<double> initial;

  std::size_t size() const { return states.size(); }
};

enum class CostKind { linear, convex };

struct CostModel {
  CostKind kind = CostKind::linear;
  double slot_duration = 1.0;  // convex only
};

std::string to_string(CostKind kind);
CostKind parse_cost_kind(std::string_view text);

inline constexpr double kStochasticTolerance = 1e-12;

std::vector<std::string> validate_channel(const ChannelModel& model);
ChannelModel make_channel(ChannelModel model);  // throws ValidationError

ChannelModel load_channel(std::string_view text);
ChannelModel load_channel_file(const std::string& path);
std::string channel_to_json(const ChannelModel& model);

// Channel state ids at slots 0..horizon (horizon + 1 entries).
std::vector<ChannelId> sample_path(const ChannelModel& model, Slot horizon, std::uint64_t seed);

// Expected airtime with retransmissions until success: bits / (R (1 - p_L)).
double cost_linear(double bits, const ChannelState& state);
// Power needed to push `bits` through one slot: (2^(2 bits / dT) - 1) / gain.
double cost_convex(double bits, const ChannelState& state, double slot_duration);
double transmission_cost(const CostModel& cost, double bits, const ChannelState& state);

// Cost increase from sending the k-th packet of `unit_bits` in one slot.
double marginal_cost(const CostModel& cost, int k, double unit_bits, const ChannelState& state);

// Unique stationary distribution; throws if the chain has more than one.
std::vector<double> stationary_distribution(const ChannelModel& model);

// One-state channel whose attributes are the stationary means of `model`.
ChannelModel averaged_channel(const ChannelModel& model);

}  // namespace treesched

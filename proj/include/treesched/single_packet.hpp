#pragma once

#include <vector>

#include "treesched/channel_model.hpp"
#include "treesched/media_model.hpp"

namespace treesched {

// Optimal stopping solution for one packet. Rows cover slots
// arrival..deadline; row r is slot arrival + r.
//
//   threshold[t][h] = alpha * sum_h' P(h'|h) value[t+1][h'],  value[deadline+1] = 0
//   value[t][h]     = max(q - lambda * rho(l, h), threshold[t][h])
//
// The threshold is the expected discounted reward of waiting, so it never
// grows as the deadline approaches and is zero in the last slot.
class ThresholdPolicy {
 public:
  ThresholdPolicy(Packet packet, double alpha, double lambda, std::vector<double> immediate,
                  std::vector<std::vector<double>> threshold, std::vector<std::vector<double>> value);

  const Packet& packet() const { return packet_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  Slot first_slot() const { return packet_.arrival; }
  Slot last_slot() const { return packet_.deadline; }

  // q - lambda * rho(l, h), the reward for sending now in channel state h.
  double immediate(ChannelId h) const { return immediate_.at(static_cast<std::size_t>(h)); }
  double threshold(Slot t, ChannelId h) const;
  double value(Slot t, ChannelId h) const;

  const std::vector<std::vector<double>>& thresholds() const { return threshold_; }
  const std::vector<std::vector<double>>& values() const { return value_; }

 private:
  std::size_t row(Slot t) const;

  Packet packet_;
  double alpha_;
  double lambda_;
  std::vector<double> immediate_;
  std::vector<std::vector<double>> threshold_;
  std::vector<std::vector<double>> value_;
};

ThresholdPolicy solve_single(const Packet& packet, const ChannelModel& channel, const CostModel& cost,
                             double alpha, double lambda);

enum class SingleAction { wait, transmit };

// `pending` is false once the packet has been delivered. Ties wait.
SingleAction act_single(const ThresholdPolicy& policy, Slot t, ChannelId h, bool pending);

// Expected discounted value of the packet seen from a slot before its
// arrival: the value table propagated backwards through the channel chain.
// For t >= arrival this is just value(t, h).
double value_from(const ThresholdPolicy& policy, const ChannelModel& channel, Slot t, ChannelId h);

void check_alpha_lambda(double alpha, double lambda);

}  // namespace treesched

#include "treesched/single_packet.hpp"

#include <algorithm>
#include <cmath>

namespace treesched {

void check_alpha_lambda(double alpha, double lambda) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error("lambda must be positive");
}

ThresholdPolicy::ThresholdPolicy(Packet packet, double alpha, double lambda, std::vector<double> immediate,
                                 std::vector<std::vector<double>> threshold,
                                 std::vector<std::vector<double>> value)
    : packet_(std::move(packet)),
      alpha_(alpha),
      lambda_(lambda),
      immediate_(std::move(immediate)),
      threshold_(std::move(threshold)),
      value_(std::move(value)) {}

std::size_t ThresholdPolicy::row(Slot t) const {
  if (t < packet_.arrival || t > packet_.deadline) {
    throw Error("slot " + std::to_string(t) + " outside [" + std::to_string(packet_.arrival) + ", " +
                std::to_string(packet_.deadline) + "] for packet " + std::to_string(packet_.id));
  }
  return static_cast<std::size_t>(t - packet_.arrival);
}

double ThresholdPolicy::threshold(Slot t, ChannelId h) const {
  return threshold_[row(t)].at(static_cast<std::size_t>(h));
}

double ThresholdPolicy::value(Slot t, ChannelId h) const {
  return value_[row(t)].at(static_cast<std::size_t>(h));
}

ThresholdPolicy solve_single(const Packet& packet, const ChannelModel& channel, const CostModel& cost,
                             double alpha, double lambda) {
  check_alpha_lambda(alpha, lambda);
  if (!(packet.arrival < packet.deadline) || packet.arrival < 0) {
    throw Error("packet " + std::to_string(packet.id) + " has an empty transmission window");
  }
  const std::size_t nh = channel.size();
  const auto rows = static_cast<std::size_t>(packet.deadline - packet.arrival + 1);

  std::vector<double> immediate(nh);
  for (std::size_t h = 0; h < nh; ++h) {
    immediate[h] = packet.distortion - lambda * transmission_cost(cost, packet.size_bits, channel.states[h]);
  }

  std::vector<std::vector<double>> threshold(rows, std::vector<double>(nh, 0.0));
  std::vector<std::vector<double>> value(rows, std::vector<double>(nh, 0.0));
  std::vector<double> next(nh, 0.0);  // value one slot later; zero past the deadline
  for (std::size_t r = rows; r-- > 0;) {
    for (std::size_t h = 0; h < nh; ++h) {
      double wait = 0.0;
      for (std::size_t h2 = 0; h2 < nh; ++h2) wait += channel.transition[h][h2] * next[h2];
      threshold[r][h] = alpha * wait;
      value[r][h] = std::max(immediate[h], threshold[r][h]);
    }
    next = value[r];
  }
  return ThresholdPolicy(packet, alpha, lambda, std::move(immediate), std::move(threshold), std::move(value));
}

SingleAction act_single(const ThresholdPolicy& policy, Slot t, ChannelId h, bool pending) {
  double threshold = policy.threshold(t, h);  // validates t
  if (!pending) return SingleAction::wait;
  return policy.immediate(h) > threshold ? SingleAction::transmit : SingleAction::wait;
}

double value_from(const ThresholdPolicy& policy, const ChannelModel& channel, Slot t, ChannelId h) {
  if (t >= policy.first_slot()) return t > policy.last_slot() ? 0.0 : policy.value(t, h);
  const std::size_t nh = channel.size();
  std::vector<double> cur(nh);
  for (std::size_t i = 0; i < nh; ++i) cur[i] = policy.value(policy.first_slot(), static_cast<ChannelId>(i));
  for (Slot s = policy.first_slot() - 1; s >= t; --s) {
    std::vector<double> prev(nh, 0.0);
    for (std::size_t i = 0; i < nh; ++i) {
      for (std::size_t j = 0; j < nh; ++j) prev[i] += channel.transition[i][j] * cur[j];
      prev[i] *= policy.alpha();
    }
    cur = std::move(prev);
  }
  return cur.at(static_cast<std::size_t>(h));
}

}  // namespace treesched

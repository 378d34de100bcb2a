#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "treesched/channel_model.hpp"
#include "treesched/mdp_solver.hpp"
#include "treesched/media_model.hpp"
#include "treesched/state_model.hpp"

namespace treesched {

// A scheduling rule: which packets to send in a joint state.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual std::vector<PacketId> act(const JointState& state) const = 0;
};

// Travelling-state-tree (or threshold) policy from a solved model.
class SolvedPolicyRule : public Policy {
 public:
  SolvedPolicyRule(std::string name, SolvedPolicy policy, bool ignore_channel = false);
  std::string name() const override { return name_; }
  std::vector<PacketId> act(const JointState& state) const override;
  const SolvedPolicy& solved() const { return policy_; }

 private:
  std::string name_;
  SolvedPolicy policy_;
  bool ignore_channel_;
};

// Sends decodable packets by descending q while the immediate net marginal
// reward stays positive. No lookahead.
class DistortionGreedyRule : public Policy {
 public:
  DistortionGreedyRule(const MediaTrace& trace, ChannelModel channel, CostModel cost, double lambda);
  std::string name() const override { return "greedy"; }
  std::vector<PacketId> act(const JointState& state) const override;

 private:
  TransitionModel model_;
  ChannelModel channel_;
  CostModel cost_;
  double lambda_;
};

// `loss_tolerant` tabulates the states reached after losses; needed when the
// policy is executed with loss_rate > 0.
std::unique_ptr<Policy> make_proposed(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost,
                                      double alpha, double lambda, bool loss_tolerant = false);
std::unique_ptr<Policy> baseline_myopic(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost,
                                        double lambda, bool loss_tolerant = false);
std::unique_ptr<Policy> baseline_distortion_greedy(const MediaTrace& trace, const ChannelModel& channel,
                                                   const CostModel& cost, double lambda);
std::unique_ptr<Policy> baseline_constant_channel(const MediaTrace& trace, const ChannelModel& channel,
                                                  const CostModel& cost, double alpha, double lambda,
                                                  bool loss_tolerant = false);

// Builds a policy by command-line name: proposed, myopic, greedy or constant.
std::unique_ptr<Policy> make_policy(const std::string& name, const MediaTrace& trace, const ChannelModel& channel,
                                    const CostModel& cost, double alpha, double lambda, bool loss_tolerant);

struct SlotLog {
  Slot t = 0;
  StateKey key;
  ChannelId channel = 0;
  std::vector<PacketId> transmitted;
  std::vector<PacketId> delivered;
  double cost = 0.0;     // rho of everything transmitted
  double utility = 0.0;  // sum of delivered q minus lambda * cost, undiscounted
};

struct EpisodeResult {
  std::vector<PacketId> delivered;  // sorted
  double total_distortion_gain = 0.0;
  double total_cost = 0.0;
  double discounted_utility = 0.0;
  std::vector<SlotLog> log;
};

// Runs `policy` along `channel_path` (at least horizon + 1 entries). Each
// transmitted packet is lost independently with probability `loss_rate`; a
// lost packet stays pending and may be retried. Cost is paid for every
// transmission.
EpisodeResult run_episode(const Policy& policy, const MediaTrace& trace, const ChannelModel& channel,
                          const std::vector<ChannelId>& channel_path, const CostModel& cost, double alpha,
                          double lambda, double loss_rate, std::uint64_t seed);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double std_error() const;
};

Summary summarize(const std::vector<double>& xs);

struct EpisodeRow {
  int episode = 0;
  double utility = 0.0;
  double cost = 0.0;
  double distortion_gain = 0.0;
  std::size_t delivered_count = 0;
};

struct SimReport {
  std::string policy;
  int n_episodes = 0;
  double loss_rate = 0.0;
  std::vector<EpisodeRow> episodes;
  Summary utility;
  Summary cost;
  Summary distortion_gain;
};

// Episode i uses channel path seed seed + i and a loss stream derived from it,
// so reports for different policies with the same seed are paired.
SimReport monte_carlo(const Policy& policy, const MediaTrace& trace, const ChannelModel& channel,
                      const CostModel& cost, double alpha, double lambda, double loss_rate, int n_episodes,
                      std::uint64_t seed);

std::uint64_t loss_seed(std::uint64_t seed, int episode);

// Mean and standard error of the per-episode differences a - b.
Summary paired_difference(const SimReport& a, const SimReport& b);

std::string episodes_csv(const std::vector<SimReport>& reports);
std::string summary_csv(const std::vector<SimReport>& reports);

}  // namespace treesched

#include "treesched/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace treesched {

SolvedPolicyRule::SolvedPolicyRule(std::string name, SolvedPolicy policy, bool ignore_channel)
    : name_(std::move(name)), policy_(std::move(policy)), ignore_channel_(ignore_channel) {}

std::vector<PacketId> SolvedPolicyRule::act(const JointState& state) const {
  if (!ignore_channel_) return act_travelling(policy_, state);
  JointState seen = state;
  seen.channel = 0;
  return act_travelling(policy_, seen);
}

DistortionGreedyRule::DistortionGreedyRule(const MediaTrace& trace, ChannelModel channel, CostModel cost,
                                           double lambda)
    : model_(trace), channel_(std::move(channel)), cost_(cost), lambda_(lambda) {}

std::vector<PacketId> DistortionGreedyRule::act(const JointState& state) const {
  if (state.t > model_.horizon()) return {};
  const auto& trace = model_.trace();
  std::vector<PacketId> order = state.key.pending;
  std::stable_sort(order.begin(), order.end(), [&](PacketId a, PacketId b) {
    return trace.packet(a).distortion > trace.packet(b).distortion;
  });
  const ChannelState& ch = channel_.states.at(static_cast<std::size_t>(state.channel));
  std::vector<PacketId> send;
  for (PacketId j : order) {
    std::vector<PacketId> trial = send;
    trial.push_back(j);
    if (!model_.legal(state.t, state.key, trial)) continue;
    const Packet& p = trace.packet(j);
    double marginal = cost_.kind == CostKind::linear
                          ? cost_linear(p.size_bits, ch)
                          : transmission_cost(cost_, model_.bits(trial), ch) - transmission_cost(cost_, model_.bits(send), ch);
    if (p.distortion - lambda_ * marginal > 0.0) send = std::move(trial);
  }
  return send;
}

std::unique_ptr<Policy> make_proposed(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost,
                                      double alpha, double lambda, bool loss_tolerant) {
  return std::make_unique<SolvedPolicyRule>("proposed",
                                            solve(trace, channel, cost, alpha, lambda, SolveOptions{loss_tolerant}));
}

std::unique_ptr<Policy> baseline_myopic(const MediaTrace& trace, const ChannelModel& channel, const CostModel& cost,
                                        double lambda, bool loss_tolerant) {
  return std::make_unique<SolvedPolicyRule>("myopic",
                                            solve(trace, channel, cost, 0.0, lambda, SolveOptions{loss_tolerant}));
}

std::unique_ptr<Policy> baseline_distortion_greedy(const MediaTrace& trace, const ChannelModel& channel,
                                                   const CostModel& cost, double lambda) {
  check_alpha_lambda(0.0, lambda);
  return std::make_unique<DistortionGreedyRule>(trace, channel, cost, lambda);
}

std::unique_ptr<Policy> baseline_constant_channel(const MediaTrace& trace, const ChannelModel& channel,
                                                  const CostModel& cost, double alpha, double lambda,
                                                  bool loss_tolerant) {
  return std::make_unique<SolvedPolicyRule>(
      "constant", solve(trace, averaged_channel(channel), cost, alpha, lambda, SolveOptions{loss_tolerant}), true);
}

std::unique_ptr<Policy> make_policy(const std::string& name, const MediaTrace& trace, const ChannelModel& channel,
                                    const CostModel& cost, double alpha, double lambda, bool loss_tolerant) {
  if (name == "proposed") return make_proposed(trace, channel, cost, alpha, lambda, loss_tolerant);
  if (name == "myopic") return baseline_myopic(trace, channel, cost, lambda, loss_tolerant);
  if (name == "greedy") return baseline_distortion_greedy(trace, channel, cost, lambda);
  if (name == "constant") return baseline_constant_channel(trace, channel, cost, alpha, lambda, loss_tolerant);
  throw Error("unknown policy '" + name + "' (expected proposed, myopic, greedy or constant)");
}

EpisodeResult run_episode(const Policy& policy, const MediaTrace& trace, const ChannelModel& channel,
                          const std::vector<ChannelId>& channel_path, const CostModel& cost, double alpha,
                          double lambda, double loss_rate, std::uint64_t seed) {
  const Slot horizon = trace.horizon();
  if (channel_path.size() < static_cast<std::size_t>(horizon) + 1) {
    throw Error("channel path has " + std::to_string(channel_path.size()) + " entries, need " +
                std::to_string(horizon + 1));
  }
  if (!(loss_rate >= 0.0 && loss_rate < 1.0)) throw Error("loss_rate must lie in [0, 1)");
  check_alpha_lambda(alpha, lambda);

  TransitionModel model(trace);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution lose(loss_rate);
  EpisodeResult out;
  JointState state{0, model.initial_key(), channel_path[0]};
  double discount = 1.0;
  for (Slot t = 0; t <= horizon; ++t) {
    state.channel = channel_path[static_cast<std::size_t>(t)];
    SlotLog entry;
    entry.t = t;
    entry.key = state.key;
    entry.channel = state.channel;
    entry.transmitted = policy.act(state);
    if (!model.legal(t, state.key, entry.transmitted)) {
      throw Error("policy '" + policy.name() + "' chose an illegal action at slot " + std::to_string(t) + " in " +
                  to_string(state.key));
    }

    std::vector<PacketId> failed;
    for (PacketId j : entry.transmitted) {
      if (loss_rate > 0.0 && lose(rng)) failed.push_back(j);
    }
    entry.delivered = entry.transmitted;
    std::erase_if(entry.delivered,
                  [&](PacketId j) { return std::find(failed.begin(), failed.end(), j) != failed.end(); });

    if (!entry.transmitted.empty()) {
      entry.cost = transmission_cost(cost, model.bits(entry.transmitted),
                                     channel.states.at(static_cast<std::size_t>(state.channel)));
    }
    const double gain = model.reward(entry.delivered);
    entry.utility = gain - lambda * entry.cost;
    out.total_cost += entry.cost;
    out.total_distortion_gain += gain;
    out.discounted_utility += discount * entry.utility;
    out.delivered.insert(out.delivered.end(), entry.delivered.begin(), entry.delivered.end());
    discount *= alpha;

    ChannelId next = t < horizon ? channel_path[static_cast<std::size_t>(t) + 1] : state.channel;
    state = advance_state(state, entry.delivered, next, model);
    out.log.push_back(std::move(entry));
  }
  std::sort(out.delivered.begin(), out.delivered.end());
  return out;
}

double Summary::std_error() const { return count > 0 ? stddev / std::sqrt(static_cast<double>(count)) : 0.0; }

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::uint64_t loss_seed(std::uint64_t seed, int episode) {
  return (seed + static_cast<std::uint64_t>(episode)) * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL;
}

SimReport monte_carlo(const Policy& policy, const MediaTrace& trace, const ChannelModel& channel,
                      const CostModel& cost, double alpha, double lambda, double loss_rate, int n_episodes,
                      std::uint64_t seed) {
  if (n_episodes < 1) throw Error("n_episodes must be at least 1");
  SimReport report;
  report.policy = policy.name();
  report.n_episodes = n_episodes;
  report.loss_rate = loss_rate;
  std::vector<double> utility;
  std::vector<double> cost_values;
  std::vector<double> gain;
  for (int i = 0; i < n_episodes; ++i) {
    auto path = sample_path(channel, trace.horizon(), seed + static_cast<std::uint64_t>(i));
    auto ep = run_episode(policy, trace, channel, path, cost, alpha, lambda, loss_rate, loss_seed(seed, i));
    report.episodes.push_back(
        EpisodeRow{i, ep.discounted_utility, ep.total_cost, ep.total_distortion_gain, ep.delivered.size()});
    utility.push_back(ep.discounted_utility);
    cost_values.push_back(ep.total_cost);
    gain.push_back(ep.total_distortion_gain);
  }
  report.utility = summarize(utility);
  report.cost = summarize(cost_values);
  report.distortion_gain = summarize(gain);
  return report;
}

Summary paired_difference(const SimReport& a, const SimReport& b) {
  if (a.episodes.size() != b.episodes.size()) throw Error("paired reports differ in episode count");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.episodes.size(); ++i) diff.push_back(a.episodes[i].utility - b.episodes[i].utility);
  return summarize(diff);
}

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string episodes_csv(const std::vector<SimReport>& reports) {
  std::string out = "episode,policy,utility,cost,distortion_gain,delivered_count\n";
  for (const auto& r : reports) {
    for (const auto& e : r.episodes) {
      out += std::to_string(e.episode) + "," + r.policy + "," + num(e.utility) + "," + num(e.cost) + "," +
             num(e.distortion_gain) + "," + std::to_string(e.delivered_count) + "\n";
    }
  }
  return out;
}

std::string summary_csv(const std::vector<SimReport>& reports) {
  std::string out =
      "policy,episodes,loss_rate,utility_mean,utility_stddev,utility_se,cost_mean,cost_stddev,"
      "distortion_gain_mean,distortion_gain_stddev\n";
  for (const auto& r : reports) {
    double se = r.utility.std_error();
    out += r.policy + "," + std::to_string(r.n_episodes) + "," + num(r.loss_rate) + "," + num(r.utility.mean) + "," +
           num(r.utility.stddev) + "," + num(se) + "," + num(r.cost.mean) + "," + num(r.cost.stddev) + "," +
           num(r.distortion_gain.mean) + "," + num(r.distortion_gain.stddev) + "\n";
  }
  return out;
}

}  // namespace treesched

// treesched: solve, simulate and inspect delay-constrained packet schedules.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "treesched/channel_model.hpp"
#include "treesched/mdp_solver.hpp"
#include "treesched/media_model.hpp"
#include "treesched/oracle.hpp"
#include "treesched/priority.hpp"
#include "treesched/sim_harness.hpp"

namespace {

using namespace treesched;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct ModelFlags {
  std::string trace_path;
  std::string channel_path;
  std::string cost = "linear";
  double slot_duration = 1.0;
  double alpha = 0.9;
  double lambda = 1.0;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--trace", f.trace_path, "Trace JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--channel", f.channel_path, "Channel JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--cost", f.cost, "Transmission cost model")
      ->check(CLI::IsMember({"linear", "convex"}))
      ->capture_default_str();
  cmd->add_option("--slot-duration", f.slot_duration, "Slot length used by the convex cost")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Discount factor in [0, 1]")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--lambda", f.lambda, "Energy/delay trade-off multiplier, > 0")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

CostModel cost_of(const ModelFlags& f) { return CostModel{parse_cost_kind(f.cost), f.slot_duration}; }

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

int cmd_solve(const ModelFlags& f, const std::string& engine, const std::string& out_path,
              const std::string& complexity_path, bool loss_tolerant) {
  MediaTrace trace = load_trace_file(f.trace_path);
  ChannelModel channel = load_channel_file(f.channel_path);
  CostModel cost = cost_of(f);
  if (engine == "oracle") {
    auto sol = solve_exhaustive(trace, channel, cost, f.alpha, f.lambda);
    if (!out_path.empty()) write_text(out_path, exhaustive_to_json(sol));
    std::cout << "engine oracle\ninitial_value " << sol.initial_value() << "\nstates " << sol.state_count
              << "\ncomparisons " << sol.comparison_count << "\n";
    return kExitOk;
  }
  SolvedPolicy policy = solve(trace, channel, cost, f.alpha, f.lambda, SolveOptions{loss_tolerant});
  if (!out_path.empty()) write_text(out_path, policy_to_json(policy));
  auto rows = complexity_report(policy);
  if (!complexity_path.empty()) write_text(complexity_path, complexity_csv(rows));
  std::size_t post = 0;
  std::size_t comparisons = 0;
  std::uint64_t standard_post = 0;
  for (const auto& r : rows) {
    post += r.stored_post_states;
    comparisons += r.comparisons;
    standard_post += r.standard_post_states;
  }
  std::cout << "engine proposed\nmode " << to_string(policy.mode()) << "\ninitial_value " << policy.initial_value()
            << "\nstored_post_states " << post << "\ncomparisons " << comparisons << "\nstandard_post_states "
            << standard_post << "\n";
  return kExitOk;
}

struct SimFlags {
  int episodes = 1000;
  double loss_rate = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string summary;
};

void add_sim_flags(CLI::App* cmd, SimFlags& s) {
  cmd->add_option("--episodes", s.episodes, "Number of Monte Carlo episodes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--loss-rate", s.loss_rate, "Per-packet loss probability in [0, 1)")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  cmd->add_option("--seed", s.seed, "Seed for channel paths and losses")->capture_default_str();
  cmd->add_option("--out", s.out, "Per-episode CSV output (default: none)");
  cmd->add_option("--summary", s.summary, "Summary CSV output (default: stdout)");
}

int cmd_simulate(const ModelFlags& f, const SimFlags& s, const std::string& policy_name) {
  MediaTrace trace = load_trace_file(f.trace_path);
  ChannelModel channel = load_channel_file(f.channel_path);
  CostModel cost = cost_of(f);
  auto policy = make_policy(policy_name, trace, channel, cost, f.alpha, f.lambda, s.loss_rate > 0.0);
  auto report = monte_carlo(*policy, trace, channel, cost, f.alpha, f.lambda, s.loss_rate, s.episodes, s.seed);
  if (!s.out.empty()) write_text(s.out, episodes_csv({report}));
  write_text(s.summary, summary_csv({report}));
  return kExitOk;
}

int cmd_compare(const ModelFlags& f, const SimFlags& s) {
  MediaTrace trace = load_trace_file(f.trace_path);
  ChannelModel channel = load_channel_file(f.channel_path);
  CostModel cost = cost_of(f);
  std::vector<SimReport> reports;
  for (const char* name : {"proposed", "constant", "greedy", "myopic"}) {
    auto policy = make_policy(name, trace, channel, cost, f.alpha, f.lambda, s.loss_rate > 0.0);
    reports.push_back(monte_carlo(*policy, trace, channel, cost, f.alpha, f.lambda, s.loss_rate, s.episodes, s.seed));
  }
  if (!s.out.empty()) write_text(s.out, episodes_csv(reports));
  std::string text = summary_csv(reports);
  if (trace.size() <= kExhaustiveMaxPackets) {
    // Expected value from the exhaustive program, no sampling.
    auto sol = solve_exhaustive(trace, channel, cost, f.alpha, f.lambda);
    std::ostringstream row;
    row.precision(17);
    row << "oracle_expected,0," << s.loss_rate << "," << sol.initial_value() << ",0,0,,,,\n";
    text += row.str();
  }
  write_text(s.summary, text);
  return kExitOk;
}

int cmd_inspect(const std::string& trace_path, std::optional<Slot> slot, const std::string& out_dir) {
  MediaTrace trace = load_trace_file(trace_path);
  PriorityOrder order(trace);
  std::vector<PacketId> ids;
  if (slot) {
    if (*slot < 0 || *slot > trace.horizon()) {
      throw Error("slot " + std::to_string(*slot) + " outside [0, " + std::to_string(trace.horizon()) + "]");
    }
    for (const auto& p : trace.packets()) {
      if (p.arrival <= *slot && *slot <= p.deadline) ids.push_back(p.id);
    }
  } else {
    for (const auto& p : trace.packets()) ids.push_back(p.id);
  }
  PriorityGraph pg = build_priority_graph(ids, order);
  StateTree tree = build_state_tree(pg);
  std::size_t phi = disconnection_degree(pg);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text((std::filesystem::path(out_dir) / "priority_graph.dot").string(), to_dot(pg));
    write_text((std::filesystem::path(out_dir) / "state_tree.dot").string(), to_dot(tree));
  } else {
    std::cout << to_dot(pg) << to_dot(tree);
  }
  std::cout << "nodes " << pg.size() << "\nedges " << pg.edges.size() << "\nphi " << phi << "\nn_plus_phi "
            << pg.size() + phi << "\ntree_nonempty_nodes " << tree.distinct_nonempty() << "\n";
  return kExitOk;
}

int cmd_synth(int gops, int frames, int slots_per_frame, std::vector<double> profile, double size_bits,
              std::uint64_t seed, const std::string& out) {
  if (profile.empty()) {
    for (int f = 0; f < frames; ++f) profile.push_back(10.0 / (1.0 + f));
  }
  SynthParams params{gops, frames, slots_per_frame, std::move(profile), size_bits, seed};
  write_text(out, trace_to_json(synth_trace(params)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-constrained packet scheduling over Markov channels"};
  app.require_subcommand(1);

  ModelFlags solve_flags;
  std::string engine = "proposed";
  std::string policy_out;
  std::string complexity_out;
  bool loss_tolerant = false;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a trace and dump the policy and complexity counters");
  add_model_flags(solve_cmd, solve_flags);
  solve_cmd->add_option("--engine", engine, "proposed or oracle")
      ->check(CLI::IsMember({"proposed", "oracle"}))
      ->capture_default_str();
  solve_cmd->add_option("--out", policy_out, "Policy JSON output");
  solve_cmd->add_option("--complexity", complexity_out, "Per-slot complexity CSV output");
  solve_cmd->add_flag("--loss-tolerant", loss_tolerant, "Also tabulate states reached after packet losses");

  ModelFlags sim_model;
  SimFlags sim_flags;
  std::string policy_name = "proposed";
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo evaluation of one policy");
  add_model_flags(sim_cmd, sim_model);
  add_sim_flags(sim_cmd, sim_flags);
  sim_cmd->add_option("--policy", policy_name, "proposed, myopic, greedy or constant")
      ->check(CLI::IsMember({"proposed", "myopic", "greedy", "constant"}))
      ->capture_default_str();

  ModelFlags cmp_model;
  SimFlags cmp_flags;
  auto* cmp_cmd = app.add_subcommand("compare", "Paired Monte Carlo comparison of all policies");
  add_model_flags(cmp_cmd, cmp_model);
  add_sim_flags(cmp_cmd, cmp_flags);

  std::string inspect_trace;
  std::optional<Slot> inspect_slot;
  std::string inspect_dir;
  auto* inspect_cmd = app.add_subcommand("inspect-graph", "Emit DOT for the priority graph and its state tree");
  inspect_cmd->add_option("--trace", inspect_trace, "Trace JSON file")->required()->check(CLI::ExistingFile);
  inspect_cmd->add_option("--slot", inspect_slot, "Restrict to packets live at this slot");
  inspect_cmd->add_option("--out-dir", inspect_dir, "Directory for priority_graph.dot and state_tree.dot");

  int gops = 1;
  int frames = 8;
  int slots_per_frame = 1;
  std::vector<double> profile;
  double size_bits = 1000.0;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a GOP-structured trace");
  synth_cmd->add_option("--gops", gops, "Number of GOPs")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--frames", frames, "Frames per GOP")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--slots-per-frame", slots_per_frame, "Slots per frame")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--profile", profile, "Distortion per frame position, non-increasing (default 10/(1+f))");
  synth_cmd->add_option("--size-bits", size_bits, "Packet size")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed, "Jitter seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output trace JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_flags, engine, policy_out, complexity_out, loss_tolerant);
    if (*sim_cmd) return cmd_simulate(sim_model, sim_flags, policy_name);
    if (*cmp_cmd) return cmd_compare(cmp_model, cmp_flags);
    if (*inspect_cmd) return cmd_inspect(inspect_trace, inspect_slot, inspect_dir);
    if (*synth_cmd) return cmd_synth(gops, frames, slots_per_frame, profile, size_bits, synth_seed, synth_out);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

#include "treesched/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace treesched {

using nlohmann::json;

std::string to_string(CostKind kind) { return kind == CostKind::linear ? "linear" : "convex"; }

CostKind parse_cost_kind(std::string_view text) {
  if (text == "linear") return CostKind::linear;
  if (text == "convex") return CostKind::convex;
  throw Error("unknown cost kind \"" + std::string(text) + "\" (expected linear or convex)");
}

std::vector<std::string> validate_channel(const ChannelModel& model) {
  std::vector<std::string> out;
  const std::size_t n = model.states.size();
  if (n == 0) out.push_back("channel: at least one state is required");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = model.states[i];
    const std::string who = "state " + std::to_string(i);
    if (s.id != static_cast<ChannelId>(i)) out.push_back(who + ": id must equal its position");
    if (!(s.gain > 0.0)) out.push_back(who + ": gain > 0 violated");
    if (!(s.rate > 0.0)) out.push_back(who + ": rate > 0 violated");
    if (!(s.loss_prob >= 0.0 && s.loss_prob < 1.0)) out.push_back(who + ": 0 <= loss_prob < 1 violated");
  }
  if (model.transition.size() != n) {
    out.push_back("transition: expected " + std::to_string(n) + " rows");
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = model.transition[i];
      const std::string who = "transition row " + std::to_string(i);
      if (row.size() != n) {
        out.push_back(who + ": expected " + std::to_string(n) + " entries");
        continue;
      }
      bool negative = false;
      for (double p : row) negative = negative || !(p >= 0.0);
      if (negative) out.push_back(who + ": negative entry");
      double sum = std::accumulate(row.begin(), row.end(), 0.0);
      if (std::abs(sum - 1.0) > kStochasticTolerance) {
        out.push_back(who + ": sums to " + std::to_string(sum) + ", not 1 (row-stochastic)");
      }
    }
  }
  if (model.initial.size() != n) {
    out.push_back("initial: expected " + std::to_string(n) + " entries");
  } else {
    bool negative = false;
    for (double p : model.initial) negative = negative || !(p >= 0.0);
    if (negative) out.push_back("initial: negative entry");
    double sum = std::accumulate(model.initial.begin(), model.initial.end(), 0.0);
    if (std::abs(sum - 1.0) > kStochasticTolerance) out.push_back("initial: does not sum to 1");
  }
  return out;
}

ChannelModel make_channel(ChannelModel model) {
  auto violations = validate_channel(model);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return model;
}

namespace {

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path, "expected a number");
  return v.get<double>();
}

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number_at(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

const json& field(const json& obj, const char* name, const std::string& path) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(path, std::string("missing field \"") + name + "\"");
  return *it;
}

void only_fields(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ParseError(path, "unknown field \"" + it.key() + "\"");
  }
}

}  // namespace

ChannelModel load_channel(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw ParseError("line " + std::to_string(line), e.what());
  }
  if (!doc.is_object()) throw ParseError("$", "expected a JSON object");
  only_fields(doc, {"states", "transition", "initial"}, "$");

  ChannelModel model;
  const json& states = field(doc, "states", "$");
  if (!states.is_array()) throw ParseError("$.states", "expected an array");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string path = "$.states[" + std::to_string(i) + "]";
    const json& s = states[i];
    if (!s.is_object()) throw ParseError(path, "expected an object");
    only_fields(s, {"id", "gain", "rate", "loss_prob"}, path);
    const json& id = field(s, "id", path);
    if (!id.is_number_integer()) throw ParseError(path + ".id", "expected an integer");
    ChannelState st;
    st.id = id.get<ChannelId>();
    st.gain = number_at(field(s, "gain", path), path + ".gain");
    st.rate = number_at(field(s, "rate", path), path + ".rate");
    st.loss_prob = number_at(field(s, "loss_prob", path), path + ".loss_prob");
    model.states.push_back(st);
  }
  const json& rows = field(doc, "transition", "$");
  if (!rows.is_array()) throw ParseError("$.transition", "expected an array");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    model.transition.push_back(number_array(rows[i], "$.transition[" + std::to_string(i) + "]"));
  }
  model.initial = number_array(field(doc, "initial", "$"), "$.initial");
  return make_channel(std::move(model));
}

ChannelModel load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open channel file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return load_channel(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.location(), e.what());
  }
}

std::string channel_to_json(const ChannelModel& model) {
  json states = json::array();
  for (const auto& s : model.states) {
    states.push_back({{"id", s.id}, {"gain", s.gain}, {"rate", s.rate}, {"loss_prob", s.loss_prob}});
  }
  return json{{"states", states}, {"transition", model.transition}, {"initial", model.initial}}.dump(2) + "\n";
}

namespace {

ChannelId draw(const std::vector<double>& weights, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<ChannelId>(i);
  }
  // Rounding left u above the running sum: take the last state with mass.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<ChannelId>(i);
  }
  return 0;
}

}  // namespace

std::vector<ChannelId> sample_path(const ChannelModel& model, Slot horizon, std::uint64_t seed) {
  if (horizon < 0) throw Error("sample_path: horizon must be >= 0");
  std::mt19937_64 rng(seed);
  std::vector<ChannelId> path;
  path.reserve(static_cast<std::size_t>(horizon) + 1);
  path.push_back(draw(model.initial, rng));
  for (Slot t = 0; t < horizon; ++t) {
    path.push_back(draw(model.transition[static_cast<std::size_t>(path.back())], rng));
  }
  return path;
}

double cost_linear(double bits, const ChannelState& state) {
  if (bits <= 0.0) return 0.0;
  return (1.0 / (1.0 - state.loss_prob)) * bits / state.rate;
}

double cost_convex(double bits, const ChannelState& state, double slot_duration) {
  if (bits <= 0.0) return 0.0;
  return std::expm1(std::log(2.0) * 2.0 * bits / slot_duration) / state.gain;
}

double transmission_cost(const CostModel& cost, double bits, const ChannelState& state) {
  return cost.kind == CostKind::linear ? cost_linear(bits, state)
                                       : cost_convex(bits, state, cost.slot_duration);
}

double marginal_cost(const CostModel& cost, int k, double unit_bits, const ChannelState& state) {
  if (k < 1) throw Error("marginal_cost: k must be >= 1");
  if (cost.kind == CostKind::linear) return cost_linear(unit_bits, state);
  return transmission_cost(cost, k * unit_bits, state) - transmission_cost(cost, (k - 1) * unit_bits, state);
}

std::vector<double> stationary_distribution(const ChannelModel& model) {
  // Solve pi (P - I) = 0 by Gaussian elimination on the transposed system.
  const std::size_t n = model.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = model.transition[j][i] - (i == j ? 1.0 : 0.0);
  }
  constexpr double kPivotTolerance = 1e-10;
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_col;
  for (std::size_t col = 0; col < n && rank < n; ++col) {
    std::size_t best = rank;
    for (std::size_t r = rank; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[best][col])) best = r;
    }
    if (std::abs(a[best][col]) < kPivotTolerance) continue;
    std::swap(a[best], a[rank]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == rank) continue;
      double f = a[r][col] / a[rank][col];
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[rank][c];
    }
    pivot_col.push_back(col);
    ++rank;
  }
  if (rank + 1 != n) {
    throw Error("channel has no unique stationary distribution (reducible chain)");
  }
  // One free column; set it to 1 and back-substitute, then normalize.
  std::size_t free_col = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (std::find(pivot_col.begin(), pivot_col.end(), c) == pivot_col.end()) free_col = c;
  }
  std::vector<double> pi(n, 0.0);
  pi[free_col] = 1.0;
  for (std::size_t r = 0; r < rank; ++r) {
    pi[pivot_col[r]] = -a[r][free_col] / a[r][pivot_col[r]];
  }
  double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& p : pi) {
    p /= sum;
    if (p < 0.0 && p > -1e-12) p = 0.0;
  }
  return pi;
}

ChannelModel averaged_channel(const ChannelModel& model) {
  auto pi = stationary_distribution(model);
  ChannelState avg{0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < model.size(); ++i) {
    avg.gain += pi[i] * model.states[i].gain;
    avg.rate += pi[i] * model.states[i].rate;
    avg.loss_prob += pi[i] * model.states[i].loss_prob;
  }
  return ChannelModel{{avg}, {{1.0}}, {1.0}};
}

}  // namespace treesched

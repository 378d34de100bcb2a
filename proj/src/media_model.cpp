#include "treesched/media_model.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <json.hpp>

namespace treesched {

using nlohmann::json;

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::string out = "invalid input (" + std::to_string(violations.size()) + " violation";
  out += violations.size() == 1 ? ")" : "s)";
  for (const auto& v : violations) out += "\n  - " + v;
  return out;
}

bool valid_ref(const MediaTrace& trace, PacketId id) {
  return id >= 0 && static_cast<std::size_t>(id) < trace.size();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

MediaTrace::MediaTrace(std::vector<Packet> packets) : packets_(std::move(packets)) {
  children_.resize(packets_.size());
  for (const auto& p : packets_) {
    horizon_ = std::max(horizon_, p.deadline);
    for (PacketId parent : p.parents) {
      if (parent >= 0 && static_cast<std::size_t>(parent) < packets_.size()) {
        children_[static_cast<std::size_t>(parent)].push_back(p.id);
      }
    }
  }
  for (auto& c : children_) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
}

bool MediaTrace::has_dependencies() const { return edge_count() > 0; }

std::size_t MediaTrace::edge_count() const {
  std::size_t n = 0;
  for (const auto& p : packets_) n += p.parents.size();
  return n;
}

bool MediaTrace::uniform_size() const {
  return std::all_of(packets_.begin(), packets_.end(),
                     [&](const Packet& p) { return p.size_bits == packets_.front().size_bits; });
}

std::vector<std::string> validate_trace(const MediaTrace& trace, TraceChecks checks) {
  std::vector<std::string> out;
  const auto& packets = trace.packets();
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const Packet& p = packets[i];
    const std::string who = "packet " + std::to_string(p.id);
    if (p.id != static_cast<PacketId>(i)) {
      out.push_back(who + ": id must equal its position " + std::to_string(i));
    }
    if (!(p.size_bits > 0.0)) out.push_back(who + ": size_bits > 0 violated");
    if (!(p.distortion >= 0.0)) out.push_back(who + ": distortion >= 0 violated");
    if (p.arrival < 0) out.push_back(who + ": arrival >= 0 violated");
    if (!(p.arrival < p.deadline)) out.push_back(who + ": arrival < deadline violated");
    std::vector<PacketId> seen;
    for (PacketId parent : p.parents) {
      if (std::find(seen.begin(), seen.end(), parent) != seen.end()) {
        out.push_back(who + ": duplicate parent " + std::to_string(parent));
        continue;
      }
      seen.push_back(parent);
      if (!valid_ref(trace, parent)) {
        out.push_back(who + ": parent " + std::to_string(parent) + " does not exist");
        continue;
      }
      const Packet& k = trace.packet(parent);
      if (k.arrival > p.arrival) {
        out.push_back(who + ": depends on packet " + std::to_string(parent) +
                      " which arrives later (arrival ordering rule t_parent <= t_child)");
      }
      if (k.deadline > p.deadline) {
        out.push_back(who + ": depends on packet " + std::to_string(parent) +
                      " which expires later (deadline ordering rule d_parent <= d_child)");
      }
    }
  }

  // Acyclicity: colour DFS, one violation per back edge found.
  std::vector<int> colour(packets.size(), 0);
  std::function<void(PacketId)> visit = [&](PacketId id) {
    colour[static_cast<std::size_t>(id)] = 1;
    for (PacketId parent : trace.packet(id).parents) {
      if (!valid_ref(trace, parent)) continue;
      int c = colour[static_cast<std::size_t>(parent)];
      if (c == 1) {
        out.push_back("packets " + std::to_string(id) + " and " + std::to_string(parent) +
                      ": dependency cycle (dependencies must be acyclic)");
      } else if (c == 0) {
        visit(parent);
      }
    }
    colour[static_cast<std::size_t>(id)] = 2;
  };
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (colour[i] == 0 && packets[i].id == static_cast<PacketId>(i)) visit(static_cast<PacketId>(i));
  }

  if (checks.require_uniform_size && !trace.uniform_size()) {
    out.push_back("trace: convex cost requires every packet to have the same size_bits");
  }
  return out;
}

MediaTrace make_trace(std::vector<Packet> packets, TraceChecks checks) {
  MediaTrace trace(std::move(packets));
  auto violations = validate_trace(trace, checks);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return trace;
}

namespace {

const json& require_field(const json& obj, const char* name, const std::string& path) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(path, std::string("missing field \"") + name + "\"");
  return *it;
}

long long require_int(const json& obj, const char* name, const std::string& path) {
  const json& v = require_field(obj, name, path);
  if (!v.is_number_integer()) throw ParseError(path + "." + name, "expected an integer");
  return v.get<long long>();
}

double require_number(const json& obj, const char* name, const std::string& path) {
  const json& v = require_field(obj, name, path);
  if (!v.is_number()) throw ParseError(path + "." + name, "expected a number");
  return v.get<double>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = std::any_of(allowed.begin(), allowed.end(),
                          [&](const char* a) { return it.key() == a; });
    if (!ok) throw ParseError(path, "unknown field \"" + it.key() + "\"");
  }
}

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

MediaTrace load_trace(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_of(text, e.byte)), e.what());
  }
  if (!doc.is_object()) throw ParseError("$", "expected a JSON object");
  reject_unknown(doc, {"packets"}, "$");
  const json& arr = require_field(doc, "packets", "$");
  if (!arr.is_array()) throw ParseError("$.packets", "expected an array");

  std::vector<Packet> packets;
  packets.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "$.packets[" + std::to_string(i) + "]";
    const json& item = arr[i];
    if (!item.is_object()) throw ParseError(path, "expected an object");
    reject_unknown(item, {"id", "size_bits", "distortion", "arrival", "deadline", "parents"}, path);
    Packet p;
    p.id = static_cast<PacketId>(require_int(item, "id", path));
    p.size_bits = require_number(item, "size_bits", path);
    p.distortion = require_number(item, "distortion", path);
    p.arrival = static_cast<Slot>(require_int(item, "arrival", path));
    p.deadline = static_cast<Slot>(require_int(item, "deadline", path));
    const json& parents = require_field(item, "parents", path);
    if (!parents.is_array()) throw ParseError(path + ".parents", "expected an array");
    for (std::size_t k = 0; k < parents.size(); ++k) {
      if (!parents[k].is_number_integer()) {
        throw ParseError(path + ".parents[" + std::to_string(k) + "]", "expected an integer");
      }
      p.parents.push_back(parents[k].get<PacketId>());
    }
    packets.push_back(std::move(p));
  }
  return make_trace(std::move(packets));
}

MediaTrace load_trace(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  return load_trace(std::string_view(buf.str()));
}

MediaTrace load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file " + path);
  try {
    return load_trace(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.location(), e.what());
  }
}

std::string trace_to_json(const MediaTrace& trace) {
  json arr = json::array();
  for (const auto& p : trace.packets()) {
    arr.push_back({{"id", p.id},
                   {"size_bits", p.size_bits},
                   {"distortion", p.distortion},
                   {"arrival", p.arrival},
                   {"deadline", p.deadline},
                   {"parents", p.parents}});
  }
  return json{{"packets", arr}}.dump(2) + "\n";
}

namespace {

std::vector<PacketId> closure(const MediaTrace& trace, PacketId id, bool downward) {
  if (!valid_ref(trace, id)) throw Error("unknown packet id " + std::to_string(id));
  std::vector<char> seen(trace.size(), 0);
  std::vector<PacketId> stack{id};
  std::vector<PacketId> out;
  while (!stack.empty()) {
    PacketId cur = stack.back();
    stack.pop_back();
    const auto& next = downward ? trace.children(cur) : trace.packet(cur).parents;
    for (PacketId n : next) {
      if (!valid_ref(trace, n) || seen[static_cast<std::size_t>(n)]) continue;
      seen[static_cast<std::size_t>(n)] = 1;
      if (n != id) out.push_back(n);
      stack.push_back(n);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<PacketId> descendants(const MediaTrace& trace, PacketId id) {
  return closure(trace, id, true);
}

std::vector<PacketId> ancestors(const MediaTrace& trace, PacketId id) {
  return closure(trace, id, false);
}

MediaTrace synth_trace(const SynthParams& params) {
  if (params.n_gops < 1 || params.frames_per_gop < 1 || params.slots_per_frame < 1) {
    throw Error("synth_trace: n_gops, frames_per_gop and slots_per_frame must be >= 1");
  }
  if (params.distortion_profile.size() != static_cast<std::size_t>(params.frames_per_gop)) {
    throw Error("synth_trace: distortion_profile length must equal frames_per_gop");
  }
  if (!(params.size_bits > 0.0)) throw Error("synth_trace: size_bits must be positive");
  for (std::size_t i = 0; i < params.distortion_profile.size(); ++i) {
    if (!(params.distortion_profile[i] > 0.0) ||
        (i > 0 && params.distortion_profile[i] > params.distortion_profile[i - 1])) {
      throw Error("synth_trace: distortion_profile must be positive and non-increasing");
    }
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  const int gop_slots = params.frames_per_gop * params.slots_per_frame;
  std::vector<Packet> packets;
  for (int g = 0; g < params.n_gops; ++g) {
    for (int f = 0; f < params.frames_per_gop; ++f) {
      Packet p;
      p.id = static_cast<PacketId>(packets.size());
      p.size_bits = params.size_bits;
      p.distortion = params.distortion_profile[static_cast<std::size_t>(f)] * jitter(rng);
      p.arrival = g * gop_slots;
      p.deadline = (g + 1) * gop_slots;
      if (f > 0) p.parents.push_back(p.id - 1);
      packets.push_back(std::move(p));
    }
  }
  return make_trace(std::move(packets));
}

}  // namespace treesched

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace treesched {

using PacketId = int;
using Slot = int;

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `location` is "line N" or a JSON field path.
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& what)
      : Error(location + ": " + what), location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

// Input parsed but broke one or more model invariants. Carries all of them.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// One media packet (a data unit after packetization).
struct Packet {
  PacketId id = 0;
  double size_bits = 1.0;
  double distortion = 0.0;  // reduction in distortion if decoded in time
  Slot arrival = 0;         // first slot the packet may be sent
  Slot deadline = 1;        // last slot the packet may be sent
  std::vector<PacketId> parents;  // packets this one directly depends on
};

// Immutable collection of packets with dense ids 0..N-1.
class MediaTrace {
 public:
  MediaTrace() = default;
  // Does not validate; call validate_trace() or use make_trace().
  explicit MediaTrace(std::vector<Packet> packets);

  const std::vector<Packet>& packets() const { return packets_; }
  const Packet& packet(PacketId id) const { return packets_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return packets_.size(); }
  bool empty() const { return packets_.empty(); }

  // Largest deadline, 0 for an empty trace.
  Slot horizon() const { return horizon_; }

  // Direct dependents of each packet (reverse of `parents`).
  const std::vector<PacketId>& children(PacketId id) const {
    return children_.at(static_cast<std::size_t>(id));
  }

  bool has_dependencies() const;
  std::size_t edge_count() const;
  bool uniform_size() const;

 private:
  std::vector<Packet> packets_;
  std::vector<std::vector<PacketId>> children_;
  Slot horizon_ = 0;
};

struct TraceChecks {
  // Convex transmission cost needs one common packet size.
  bool require_uniform_size = false;
};

// Every broken invariant, one message each. Empty means valid.
std::vector<std::string> validate_trace(const MediaTrace& trace, TraceChecks checks = {});

// Validates and throws ValidationError listing all violations.
MediaTrace make_trace(std::vector<Packet> packets, TraceChecks checks = {});

MediaTrace load_trace(std::istream& in);
MediaTrace load_trace(std::string_view text);
MediaTrace load_trace_file(const std::string& path);
std::string trace_to_json(const MediaTrace& trace);

// All packets whose decoding requires `id`, excluding `id` itself.
std::vector<PacketId> descendants(const MediaTrace& trace, PacketId id);
// All packets `id` requires, excluding itself.
std::vector<PacketId> ancestors(const MediaTrace& trace, PacketId id);

// GOP-structured synthetic trace. Every frame of GOP g arrives at
// g * frames_per_gop * slots_per_frame and shares the deadline
// (g + 1) * frames_per_gop * slots_per_frame, i.e. one GOP of delay tolerance.
// Frame f depends on frame f - 1 of the same GOP. Distortion is the profile
// entry scaled by a seeded jitter in [0.9, 1.1].
struct SynthParams {
  int n_gops = 1;
  int frames_per_gop = 8;
  int slots_per_frame = 1;
  std::vector<double> distortion_profile;
  double size_bits = 1.0;
  std::uint64_t seed = 0;
};
MediaTrace synth_trace(const SynthParams& params);

}  // namespace treesched

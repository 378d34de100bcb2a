#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "treesched/channel_model.hpp"
#include "treesched/media_model.hpp"

namespace treesched {

// Traffic plus dependency part of a joint state at some slot t.
//
// `pending` holds the packets with t_j <= t <= d_j that are neither delivered
// nor dead. A packet is dead once an ancestor expired undelivered; dead
// packets never re-enter `pending`.
//
// The dependency state covers K^t, the expired packets some unexpired packet
// directly depends on. Only the undelivered members of K^t are listed in
// `lost`; the rest of K^t was delivered.
//
// The same key type is used for post-states: after slot t's transmissions and
// expiries a post key holds the slot-(t+1) view without the t+1 arrivals.
struct StateKey {
  std::vector<PacketId> pending;  // sorted
  std::vector<PacketId> lost;     // sorted, subset of K^t

  bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& key) const noexcept;
};

std::string to_string(const StateKey& key);

struct JointState {
  Slot t = 0;
  StateKey key;
  ChannelId channel = 0;
};

// Per-trace tables plus the deterministic traffic and dependency dynamics.
// Shared by every optimizer so they differ only in how they choose actions.
class TransitionModel {
 public:
  explicit TransitionModel(const MediaTrace& trace);

  const MediaTrace& trace() const { return trace_; }
  Slot horizon() const { return trace_.horizon(); }

  // {j : t_j <= t <= d_j}
  const std::vector<PacketId>& live(Slot t) const;
  // {j : t_j == t}
  const std::vector<PacketId>& arrivals(Slot t) const;
  // K^t, sorted.
  const std::vector<PacketId>& dependency_set(Slot t) const;

  // State at slot 0.
  StateKey initial_key() const;

  // True when `id` (unexpired at t) can never be decoded given `key`.
  bool dead(Slot t, const StateKey& key, PacketId id) const;
  // Unexpired packet that arrived by t and was delivered.
  bool delivered(Slot t, const StateKey& key, PacketId id) const;

  // Pending packets whose parents were all delivered before slot t.
  std::vector<PacketId> decodable(Slot t, const StateKey& key) const;

  // Every packet in `send` is pending, listed once, and decodable.
  bool legal(Slot t, const StateKey& key, std::span<const PacketId> send) const;

  // Key describing slot t+1 before its arrivals are added, after `send` was
  // delivered in slot t. `send` must be legal.
  StateKey post_key(Slot t, const StateKey& key, std::span<const PacketId> send) const;

  // Adds the live packets arriving at slot t to a post key from slot t-1.
  StateKey augment(Slot t, const StateKey& post) const;

  // Sum of q over `send`.
  double reward(std::span<const PacketId> send) const;
  double bits(std::span<const PacketId> send) const;

 private:
  bool dead_impl(Slot t, const StateKey& key, PacketId id, std::vector<signed char>& memo) const;
  bool decodable_impl(Slot t, const StateKey& key, PacketId id) const;

  MediaTrace trace_;
  std::vector<std::vector<PacketId>> live_;
  std::vector<std::vector<PacketId>> arrivals_;
  std::vector<std::vector<PacketId>> deps_;
};

// Next joint state after delivering `transmitted` in `state.t` and observing
// `next_channel`. Throws when `transmitted` is not a legal action.
JointState advance_state(const JointState& state, std::span<const PacketId> transmitted, ChannelId next_channel,
                         const TransitionModel& model);

}  // namespace treesched

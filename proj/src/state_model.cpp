#include "treesched/state_model.hpp"

#include <algorithm>

namespace treesched {

namespace {

bool contains(const std::vector<PacketId>& sorted, PacketId id) {
  return std::binary_search(sorted.begin(), sorted.end(), id);
}

bool contains(std::span<const PacketId> ids, PacketId id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

std::size_t StateKeyHash::operator()(const StateKey& key) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  for (PacketId id : key.pending) mix(static_cast<std::size_t>(id));
  mix(0xffffULL);
  for (PacketId id : key.lost) mix(static_cast<std::size_t>(id));
  return h;
}

std::string to_string(const StateKey& key) {
  auto list = [](const std::vector<PacketId>& ids) {
    std::string out = "{";
    for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + std::to_string(ids[i]);
    return out + "}";
  };
  return "pending=" + list(key.pending) + " lost=" + list(key.lost);
}

TransitionModel::TransitionModel(const MediaTrace& trace) : trace_(trace) {
  const auto slots = static_cast<std::size_t>(trace.horizon()) + 2;
  live_.resize(slots);
  arrivals_.resize(slots);
  deps_.resize(slots);
  for (const auto& p : trace.packets()) {
    arrivals_[static_cast<std::size_t>(p.arrival)].push_back(p.id);
    for (Slot t = p.arrival; t <= p.deadline; ++t) live_[static_cast<std::size_t>(t)].push_back(p.id);
  }
  for (std::size_t t = 0; t < slots; ++t) {
    for (const auto& p : trace.packets()) {
      if (p.deadline >= static_cast<Slot>(t)) continue;
      bool referenced = std::any_of(trace.children(p.id).begin(), trace.children(p.id).end(),
                                    [&](PacketId c) { return trace.packet(c).deadline >= static_cast<Slot>(t); });
      if (referenced) deps_[t].push_back(p.id);
    }
  }
}

const std::vector<PacketId>& TransitionModel::live(Slot t) const {
  static const std::vector<PacketId> none;
  return t >= 0 && static_cast<std::size_t>(t) < live_.size() ? live_[static_cast<std::size_t>(t)] : none;
}

const std::vector<PacketId>& TransitionModel::arrivals(Slot t) const {
  static const std::vector<PacketId> none;
  return t >= 0 && static_cast<std::size_t>(t) < arrivals_.size() ? arrivals_[static_cast<std::size_t>(t)] : none;
}

const std::vector<PacketId>& TransitionModel::dependency_set(Slot t) const {
  static const std::vector<PacketId> none;
  return t >= 0 && static_cast<std::size_t>(t) < deps_.size() ? deps_[static_cast<std::size_t>(t)] : none;
}

StateKey TransitionModel::initial_key() const { return augment(0, StateKey{}); }

bool TransitionModel::dead_impl(Slot t, const StateKey& key, PacketId id, std::vector<signed char>& memo) const {
  auto& slot = memo[static_cast<std::size_t>(id)];
  if (slot >= 0) return slot != 0;
  bool is_dead = false;
  for (PacketId parent : trace_.packet(id).parents) {
    if (trace_.packet(parent).deadline < t) {
      is_dead = contains(key.lost, parent);
    } else {
      is_dead = dead_impl(t, key, parent, memo);
    }
    if (is_dead) break;
  }
  slot = is_dead ? 1 : 0;
  return is_dead;
}

bool TransitionModel::dead(Slot t, const StateKey& key, PacketId id) const {
  std::vector<signed char> memo(trace_.size(), -1);
  return dead_impl(t, key, id, memo);
}

bool TransitionModel::delivered(Slot t, const StateKey& key, PacketId id) const {
  const Packet& p = trace_.packet(id);
  if (p.arrival > t || p.deadline < t) return false;
  return !contains(key.pending, id) && !dead(t, key, id);
}

bool TransitionModel::decodable_impl(Slot t, const StateKey& key, PacketId id) const {
  for (PacketId parent : trace_.packet(id).parents) {
    bool ok = trace_.packet(parent).deadline < t ? !contains(key.lost, parent) : delivered(t, key, parent);
    if (!ok) return false;
  }
  return true;
}

std::vector<PacketId> TransitionModel::decodable(Slot t, const StateKey& key) const {
  std::vector<PacketId> out;
  for (PacketId j : key.pending) {
    if (decodable_impl(t, key, j)) out.push_back(j);
  }
  return out;
}

bool TransitionModel::legal(Slot t, const StateKey& key, std::span<const PacketId> send) const {
  for (std::size_t i = 0; i < send.size(); ++i) {
    PacketId j = send[i];
    if (!contains(key.pending, j)) return false;
    if (std::find(send.begin(), send.begin() + static_cast<long>(i), j) != send.begin() + static_cast<long>(i)) {
      return false;
    }
    if (!decodable_impl(t, key, j)) return false;
  }
  return true;
}

StateKey TransitionModel::post_key(Slot t, const StateKey& key, std::span<const PacketId> send) const {
  StateKey post;
  for (PacketId k : dependency_set(t + 1)) {
    bool lost = trace_.packet(k).deadline < t ? contains(key.lost, k)
                                              : !(contains(send, k) || delivered(t, key, k));
    if (lost) post.lost.push_back(k);
  }
  for (PacketId j : key.pending) {
    if (trace_.packet(j).deadline == t || contains(send, j)) continue;
    post.pending.push_back(j);
  }
  std::vector<signed char> memo(trace_.size(), -1);
  std::erase_if(post.pending, [&](PacketId j) { return dead_impl(t + 1, post, j, memo); });
  return post;
}

StateKey TransitionModel::augment(Slot t, const StateKey& post) const {
  StateKey key = post;
  std::vector<signed char> memo(trace_.size(), -1);
  for (PacketId j : arrivals(t)) {
    if (!dead_impl(t, post, j, memo)) key.pending.push_back(j);
  }
  std::sort(key.pending.begin(), key.pending.end());
  return key;
}

double TransitionModel::reward(std::span<const PacketId> send) const {
  double sum = 0.0;
  for (PacketId j : send) sum += trace_.packet(j).distortion;
  return sum;
}

double TransitionModel::bits(std::span<const PacketId> send) const {
  double sum = 0.0;
  for (PacketId j : send) sum += trace_.packet(j).size_bits;
  return sum;
}

JointState advance_state(const JointState& state, std::span<const PacketId> transmitted, ChannelId next_channel,
                         const TransitionModel& model) {
  if (!model.legal(state.t, state.key, transmitted)) {
    throw Error("slot " + std::to_string(state.t) + ": illegal transmission from state " + to_string(state.key));
  }
  JointState next;
  next.t = state.t + 1;
  next.key = model.augment(next.t, model.post_key(state.t, state.key, transmitted));
  next.channel = next_channel;
  return next;
}

}  // namespace treesched

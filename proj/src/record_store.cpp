#include "memviz/record_store.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace memviz {

namespace {

struct LutKeyHash {
  std::size_t operator()(const LutRecord &r) const noexcept {
    std::size_t h = std::hash<std::uint64_t>{}(r.address.value);
    auto mix = [&h](std::size_t v) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(r.size);
    mix(r.thread);
    mix(static_cast<std::size_t>(r.var.scope));
    mix(std::hash<std::string>{}(r.var.function));
    mix(std::hash<std::string>{}(r.var.structure));
    mix(r.var.element ? std::hash<std::uint64_t>{}(*r.var.element) + 1 : 0);
    return h;
  }
};

// Identity ignores the id itself.
struct LutKeyEq {
  bool operator()(const LutRecord &a, const LutRecord &b) const noexcept {
    return std::tie(a.address, a.size, a.thread, a.var) ==
           std::tie(b.address, b.size, b.thread, b.var);
  }
};

}  // namespace

RecordStore RecordStore::build(std::span<const TraceEvent> events) {
  RecordStore store;
  std::unordered_map<LutRecord, LutId, LutKeyHash, LutKeyEq> index;
  std::unordered_set<std::string> seen_vars;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const TraceEvent &ev = events[i];
    if (i > 0 && ev.timestamp <= events[i - 1].timestamp)
      throw std::invalid_argument("event timestamps must strictly increase");

    LutRecord key{0, ev.address, ev.size, ev.thread, ev.var};
    auto [it, inserted] =
        index.try_emplace(std::move(key), static_cast<LutId>(store.lut_.size()));
    if (inserted) {
      if (store.lut_.size() == UINT32_MAX)
        throw std::length_error("look-up table exceeds 2^32 records");
      LutRecord rec = it->first;
      rec.id = it->second;
      store.lut_.push_back(std::move(rec));
    }
    store.by_address_[ev.address].push_back({ev.op, it->second, ev.timestamp});

    if (!ev.var.structure.empty() && seen_vars.insert(ev.var.structure).second)
      store.variable_order_.push_back(ev.var.structure);
  }
  store.total_events_ = events.size();
  store.time_extent_ = events.empty() ? 0 : events.back().timestamp + 1;
  return store;
}

std::span<const AccessEntry> RecordStore::accesses(Address addr) const {
  auto it = by_address_.find(addr);
  if (it == by_address_.end())
    return {};
  return it->second;
}

const LutRecord &RecordStore::lookup(LutId id) const {
  if (id >= lut_.size())
    throw IdOutOfRange("LUT id " + std::to_string(id) + " out of range (size " +
                       std::to_string(lut_.size()) + ")");
  return lut_[id];
}

std::vector<TraceEvent> RecordStore::reconstruct_events() const {
  std::vector<TraceEvent> out;
  out.reserve(total_events_);
  for (const auto &[addr, list] : by_address_)
    for (const AccessEntry &e : list) {
      const LutRecord &r = lut_[e.lut_id];
      out.push_back({e.op, r.address, r.size, r.thread, r.var, e.timestamp});
    }
  std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
    return a.timestamp < b.timestamp;
  });
  return out;
}

}  // namespace memviz

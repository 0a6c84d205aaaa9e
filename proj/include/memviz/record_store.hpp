#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "memviz/trace_model.hpp"

namespace memviz {

using LutId = std::uint32_t;

/// Static attribution shared by every access that repeats it.
struct LutRecord {
  LutId id = 0;
  Address address;
  std::uint32_t size = 1;
  ThreadId thread = 0;
  VariableInfo var;

  friend bool operator==(const LutRecord &, const LutRecord &) = default;
};

struct AccessEntry {
  OperationKind op = OperationKind::Load;
  LutId lut_id = 0;
  Timestamp timestamp = 0;

  friend bool operator==(const AccessEntry &, const AccessEntry &) = default;
};

class IdOutOfRange : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Deduplicated trace: a look-up table of unique (address, size, thread,
/// variable) tuples plus, for each address, its accesses in time order.
/// Immutable once built.
class RecordStore {
public:
  using AddressMap = std::map<Address, std::vector<AccessEntry>>;

  RecordStore() = default;

  /// Requires strictly increasing timestamps; throws std::invalid_argument
  /// otherwise. LUT ids are assigned in first-appearance order.
  static RecordStore build(std::span<const TraceEvent> events);

  /// Access list for `addr`, empty if the address never appears.
  std::span<const AccessEntry> accesses(Address addr) const;

  /// Throws IdOutOfRange when id >= lut().size().
  const LutRecord &lookup(LutId id) const;

  const std::vector<LutRecord> &lut() const { return lut_; }
  const AddressMap &by_address() const { return by_address_; }
  /// Distinct non-empty structure names in first-appearance order.
  const std::vector<std::string> &variable_order() const {
    return variable_order_;
  }
  std::uint64_t total_events() const { return total_events_; }
  /// Last timestamp + 1, or 0 for an empty store. Equals total_events()
  /// for traces numbered densely from zero.
  Timestamp time_extent() const { return time_extent_; }

  /// Rebuilds the original event sequence in timestamp order.
  std::vector<TraceEvent> reconstruct_events() const;

private:
  std::vector<LutRecord> lut_;
  AddressMap by_address_;
  std::vector<std::string> variable_order_;
  std::uint64_t total_events_ = 0;
  Timestamp time_extent_ = 0;
};

}  // namespace memviz

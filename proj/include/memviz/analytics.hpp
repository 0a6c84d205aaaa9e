#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memviz/record_store.hpp"
#include "memviz/trace_model.hpp"

namespace memviz {

struct AddressStats {
  Address address;
  std::uint64_t loads = 0;
  std::uint64_t stores = 0;
  std::uint64_t modifies = 0;
  std::uint64_t appearances = 0;
  // Resolved name of the address's first access.
  std::string variable;
  Timestamp first_ts = 0;
  Timestamp last_ts = 0;

  friend bool operator==(const AddressStats &, const AddressStats &) = default;
};

struct TimelineEntry {
  Timestamp timestamp = 0;
  Address address;
  OperationKind op = OperationKind::Load;
  std::string variable;

  friend bool operator==(const TimelineEntry &,
                         const TimelineEntry &) = default;
};

inline constexpr Timestamp kEndOfTrace = std::numeric_limits<Timestamp>::max();

/// Stateful name resolution for one trace. Calls must come in timestamp
/// order so unresolved heap regions are numbered by first appearance.
///
/// Global/Stack with a structure -> the structure. Heap -> the label of the
/// latest allocation live at `at` that contains the address; without one,
/// `heap@<function>#<k>` where k numbers distinct (function, structure)
/// pairs left unresolved so far. Anything else -> "?".
class NameResolver {
public:
  explicit NameResolver(std::span<const AllocationRecord> allocs);

  std::string resolve(const VariableInfo &var, Address addr,
                      Timestamp at = kEndOfTrace);

private:
  const AllocationRecord *covering(Address addr, Timestamp at);

  // Stable-sorted by issued_at.
  std::vector<AllocationRecord> allocs_;
  std::map<std::pair<Address, std::size_t>, const AllocationRecord *> cache_;
  std::map<std::pair<std::string, std::string>, std::uint64_t> fallback_;
};

/// One-shot resolution with fresh fallback numbering.
std::string resolve_variable_name(const VariableInfo &var, Address addr,
                                  std::span<const AllocationRecord> allocs,
                                  Timestamp at = kEndOfTrace);

/// Resolved variable name of every event in a store.
class VariableNaming {
public:
  VariableNaming() = default;
  VariableNaming(const RecordStore &store,
                 std::span<const AllocationRecord> allocs);

  /// Distinct resolved names, first appearance first.
  const std::vector<std::string> &names() const { return names_; }
  /// Position in names() of the event at `ts`. Throws std::out_of_range for
  /// a timestamp not in the store.
  std::size_t index_at(Timestamp ts) const;
  const std::string &name_at(Timestamp ts) const {
    return names_[index_at(ts)];
  }

private:
  std::vector<std::string> names_;
  std::vector<Timestamp> timestamps_;
  std::vector<std::uint32_t> name_index_;
};

struct Analysis {
  // Sorted by address ascending.
  std::vector<AddressStats> stats;
  VariableNaming naming;

  const AddressStats *find(Address addr) const;
};

Analysis analyze(const RecordStore &store,
                 std::span<const AllocationRecord> allocs);

std::vector<AddressStats> compute_stats(const RecordStore &store,
                                        std::span<const AllocationRecord> allocs);

/// One entry per event, sorted by timestamp.
std::vector<TimelineEntry> build_timeline(const RecordStore &store,
                                          const VariableNaming &naming);

/// CSV with header
/// address,variable,loads,stores,modifies,appearances,first_ts,last_ts
void write_stats_csv(std::ostream &out, std::span<const AddressStats> stats);

}  // namespace memviz

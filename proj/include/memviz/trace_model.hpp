#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace memviz {

using Timestamp = std::uint64_t;
using ThreadId = std::uint32_t;

enum class OperationKind : std::uint8_t { Load, Store, Modify };

/// Trace letter for an operation: L, S or M.
char op_letter(OperationKind op);
std::optional<OperationKind> op_from_letter(char c);
std::string_view op_name(OperationKind op);

/// A 64-bit byte address. Text form is `0x` followed by lowercase hex.
struct Address {
  std::uint64_t value = 0;

  friend constexpr auto operator<=>(Address, Address) = default;
};

std::string format_address(Address a);
/// Accepts `0x` + 1..16 hex digits (either case). Anything else yields nullopt.
std::optional<Address> parse_address(std::string_view text);

enum class Scope : std::uint8_t { Global, Stack, Heap, Unknown };

char scope_letter(Scope s);
std::optional<Scope> scope_from_letter(char c);

/// Structure name Gleipnir reports for heap blocks it could not name.
inline constexpr std::string_view kHeapSentinel = "?heap";

struct VariableInfo {
  Scope scope = Scope::Unknown;
  std::string function;
  std::string structure;  // empty means no structure
  std::optional<std::uint64_t> element;

  friend bool operator==(const VariableInfo &, const VariableInfo &) = default;
};

/// Checks the field-level constraints (element requires a structure).
bool is_well_formed(const VariableInfo &var);

struct TraceEvent {
  OperationKind op = OperationKind::Load;
  Address address;
  std::uint32_t size = 1;
  ThreadId thread = 0;
  VariableInfo var;
  Timestamp timestamp = 0;

  friend bool operator==(const TraceEvent &, const TraceEvent &) = default;
};

/// A heap block announced by an `A` line. `issued_at` is the timestamp the
/// next event would have received when the line was read, so the block is
/// live for events with timestamp >= issued_at.
struct AllocationRecord {
  Address base;
  std::uint64_t size = 1;
  ThreadId thread = 0;
  std::string function;
  std::string label;
  Timestamp issued_at = 0;

  friend bool operator==(const AllocationRecord &,
                         const AllocationRecord &) = default;
};

/// Half-open intersection of [addr, addr+size) with the allocation.
/// Regions that run past 2^64 are clamped at the top of the address space.
bool overlaps(const AllocationRecord &a, Address addr, std::uint64_t size);

inline bool contains(const AllocationRecord &a, Address addr) {
  return overlaps(a, addr, 1);
}

}  // namespace memviz

template <> struct std::hash<memviz::Address> {
  std::size_t operator()(memviz::Address a) const noexcept {
    return std::hash<std::uint64_t>{}(a.value);
  }
};

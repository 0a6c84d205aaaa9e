#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "memviz/trace_model.hpp"

namespace memviz {

// Text format, one record per line:
//   event: <op> <addr> <size> <thread> <scope> <function> <structure> [<element>]
//   alloc: A <addr> <size> <thread> <function> <label>
// op is L/S/M, scope is G/S/H/U, structure `-` means none, function `-`
// means empty. Lines whose first non-space character is `#` and blank lines
// are skipped. A heap event with structure `-` reads as "?heap".

struct FilterRule {
  bool drop_unattributed = false;
  // Empty sets impose no constraint.
  std::set<std::string> keep_functions;
  std::set<std::string> keep_variables;
  std::set<ThreadId> keep_threads;

  bool accepts(const TraceEvent &ev) const;
};

struct ParseReport {
  std::uint64_t lines_read = 0;
  std::uint64_t events_emitted = 0;
  std::uint64_t events_filtered = 0;
  // Comments, blank lines and allocation lines.
  std::uint64_t lines_skipped = 0;
  std::uint64_t lines_malformed = 0;
  // Informational: allocation lines, already included in lines_skipped.
  std::uint64_t allocations = 0;

  double reduction_ratio() const;
  bool balanced() const {
    return lines_read ==
           events_emitted + events_filtered + lines_skipped + lines_malformed;
  }
};

/// 100 x reduction_ratio.
double reduction_percent(const ParseReport &report);

enum class MalformedReason : std::uint8_t {
  UnknownOperation,
  BadAddress,
  BadSize,
  MissingField,
  // Bad thread, scope, element, or trailing tokens.
  BadField,
};

std::string_view reason_name(MalformedReason r);

struct Skip {
  friend bool operator==(Skip, Skip) = default;
};

struct Malformed {
  MalformedReason reason;
  friend bool operator==(Malformed, Malformed) = default;
};

using LineResult = std::variant<TraceEvent, AllocationRecord, Skip, Malformed>;

/// Parses one line. Events receive `next_timestamp`; allocations record it
/// as their issue point.
LineResult parse_line(std::string_view line, Timestamp next_timestamp);

struct ParsedTrace {
  std::vector<TraceEvent> events;
  std::vector<AllocationRecord> allocs;
  ParseReport report;
  // Line number (1-based) and reason of each malformed line.
  std::vector<std::pair<std::uint64_t, MalformedReason>> malformed;
};

class TraceIoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Streams lines from `in`. Filtered events consume no timestamp. Throws
/// TraceIoError if the stream goes bad.
ParsedTrace parse_trace(std::istream &in, const FilterRule &rules = {});
ParsedTrace parse_trace_file(const std::filesystem::path &path,
                             const FilterRule &rules = {});

/// Writes one event line without the trailing newline. Throws
/// std::invalid_argument if a name cannot be represented in the format.
std::string format_event(const TraceEvent &ev);
std::string format_alloc(const AllocationRecord &a);

/// Serializes events and allocations in timestamp order; an allocation is
/// written just before the first event with timestamp >= issued_at.
std::string serialize_trace(std::span<const TraceEvent> events,
                            std::span<const AllocationRecord> allocs = {});

}  // namespace memviz

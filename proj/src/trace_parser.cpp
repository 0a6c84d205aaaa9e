#include "memviz/trace_parser.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>

namespace memviz {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t')
      ++j;
    if (j > i)
      out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T> std::optional<T> parse_decimal(std::string_view s) {
  T v{};
  if (s.empty())
    return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 10);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    return std::nullopt;
  return v;
}

std::string name_field(std::string_view s) {
  return s == "-" ? std::string{} : std::string{s};
}

LineResult parse_alloc(const std::vector<std::string_view> &f, Timestamp ts) {
  if (f.size() < 6)
    return Malformed{MalformedReason::MissingField};
  if (f.size() > 6)
    return Malformed{MalformedReason::BadField};
  AllocationRecord a;
  auto base = parse_address(f[1]);
  if (!base)
    return Malformed{MalformedReason::BadAddress};
  auto size = parse_decimal<std::uint64_t>(f[2]);
  if (!size || *size == 0)
    return Malformed{MalformedReason::BadSize};
  auto thread = parse_decimal<ThreadId>(f[3]);
  if (!thread)
    return Malformed{MalformedReason::BadField};
  a.base = *base;
  a.size = *size;
  a.thread = *thread;
  a.function = name_field(f[4]);
  a.label = std::string{f[5]};
  a.issued_at = ts;
  return a;
}

void check_name(std::string_view name, bool allow_empty) {
  if (name.empty() && !allow_empty)
    throw std::invalid_argument("empty name cannot be serialized");
  if (name == "-")
    throw std::invalid_argument("name '-' is reserved");
  if (name.find_first_of(" \t\r\n") != std::string_view::npos)
    throw std::invalid_argument("name contains whitespace: " +
                                std::string{name});
}

}  // namespace

bool FilterRule::accepts(const TraceEvent &ev) const {
  if (drop_unattributed && ev.var.scope == Scope::Unknown)
    return false;
  if (!keep_functions.empty() && !keep_functions.contains(ev.var.function))
    return false;
  if (!keep_variables.empty() && !keep_variables.contains(ev.var.structure))
    return false;
  if (!keep_threads.empty() && !keep_threads.contains(ev.thread))
    return false;
  return true;
}

double ParseReport::reduction_ratio() const {
  const std::uint64_t total = events_emitted + events_filtered;
  return static_cast<double>(events_filtered) /
         static_cast<double>(std::max<std::uint64_t>(1, total));
}

double reduction_percent(const ParseReport &report) {
  return 100.0 * report.reduction_ratio();
}

std::string_view reason_name(MalformedReason r) {
  switch (r) {
  case MalformedReason::UnknownOperation:
    return "UnknownOperation";
  case MalformedReason::BadAddress:
    return "BadAddress";
  case MalformedReason::BadSize:
    return "BadSize";
  case MalformedReason::MissingField:
    return "MissingField";
  case MalformedReason::BadField:
    return "BadField";
  }
  return "?";
}

LineResult parse_line(std::string_view line, Timestamp next_timestamp) {
  if (!line.empty() && line.back() == '\r')
    line.remove_suffix(1);
  const auto fields = split_fields(line);
  if (fields.empty() || fields[0].front() == '#')
    return Skip{};

  if (fields[0] == "A")
    return parse_alloc(fields, next_timestamp);

  if (fields[0].size() != 1)
    return Malformed{MalformedReason::UnknownOperation};
  auto op = op_from_letter(fields[0][0]);
  if (!op)
    return Malformed{MalformedReason::UnknownOperation};
  if (fields.size() < 7)
    return Malformed{MalformedReason::MissingField};
  if (fields.size() > 8)
    return Malformed{MalformedReason::BadField};

  TraceEvent ev;
  ev.op = *op;
  auto addr = parse_address(fields[1]);
  if (!addr)
    return Malformed{MalformedReason::BadAddress};
  ev.address = *addr;
  auto size = parse_decimal<std::uint32_t>(fields[2]);
  if (!size || *size == 0)
    return Malformed{MalformedReason::BadSize};
  ev.size = *size;
  auto thread = parse_decimal<ThreadId>(fields[3]);
  if (!thread)
    return Malformed{MalformedReason::BadField};
  ev.thread = *thread;
  if (fields[4].size() != 1)
    return Malformed{MalformedReason::BadField};
  auto scope = scope_from_letter(fields[4][0]);
  if (!scope)
    return Malformed{MalformedReason::BadField};
  ev.var.scope = *scope;
  ev.var.function = name_field(fields[5]);
  ev.var.structure = name_field(fields[6]);
  if (fields.size() == 8) {
    if (ev.var.structure.empty())
      return Malformed{MalformedReason::BadField};
    auto element = parse_decimal<std::uint64_t>(fields[7]);
    if (!element)
      return Malformed{MalformedReason::BadField};
    ev.var.element = *element;
  }
  if (ev.var.scope == Scope::Heap && ev.var.structure.empty())
    ev.var.structure = std::string{kHeapSentinel};
  ev.timestamp = next_timestamp;
  return ev;
}

ParsedTrace parse_trace(std::istream &in, const FilterRule &rules) {
  ParsedTrace out;
  ParseReport &rep = out.report;
  std::string line;
  Timestamp next_ts = 0;
  while (std::getline(in, line)) {
    ++rep.lines_read;
    LineResult r = parse_line(line, next_ts);
    if (auto *ev = std::get_if<TraceEvent>(&r)) {
      if (rules.accepts(*ev)) {
        out.events.push_back(std::move(*ev));
        ++rep.events_emitted;
        ++next_ts;
      } else {
        ++rep.events_filtered;
      }
    } else if (auto *a = std::get_if<AllocationRecord>(&r)) {
      out.allocs.push_back(std::move(*a));
      ++rep.allocations;
      ++rep.lines_skipped;
    } else if (auto *m = std::get_if<Malformed>(&r)) {
      ++rep.lines_malformed;
      out.malformed.emplace_back(rep.lines_read, m->reason);
    } else {
      ++rep.lines_skipped;
    }
  }
  if (in.bad())
    throw TraceIoError("read error after line " +
                       std::to_string(rep.lines_read));
  return out;
}

ParsedTrace parse_trace_file(const std::filesystem::path &path,
                             const FilterRule &rules) {
  std::ifstream in(path);
  if (!in)
    throw TraceIoError("cannot open trace file: " + path.string());
  return parse_trace(in, rules);
}

std::string format_event(const TraceEvent &ev) {
  check_name(ev.var.function, true);
  check_name(ev.var.structure, true);
  if (ev.size == 0)
    throw std::invalid_argument("event size must be >= 1");
  if (!is_well_formed(ev.var))
    throw std::invalid_argument("element index without a structure");
  std::string s;
  s.reserve(64);
  s += op_letter(ev.op);
  s += ' ';
  s += format_address(ev.address);
  s += ' ';
  s += std::to_string(ev.size);
  s += ' ';
  s += std::to_string(ev.thread);
  s += ' ';
  s += scope_letter(ev.var.scope);
  s += ' ';
  s += ev.var.function.empty() ? "-" : ev.var.function;
  s += ' ';
  s += ev.var.structure.empty() ? "-" : ev.var.structure;
  if (ev.var.element) {
    s += ' ';
    s += std::to_string(*ev.var.element);
  }
  return s;
}

std::string format_alloc(const AllocationRecord &a) {
  check_name(a.function, true);
  check_name(a.label, false);
  if (a.size == 0)
    throw std::invalid_argument("allocation size must be >= 1");
  std::string s = "A ";
  s += format_address(a.base);
  s += ' ';
  s += std::to_string(a.size);
  s += ' ';
  s += std::to_string(a.thread);
  s += ' ';
  s += a.function.empty() ? "-" : a.function;
  s += ' ';
  s += a.label;
  return s;
}

std::string serialize_trace(std::span<const TraceEvent> events,
                            std::span<const AllocationRecord> allocs) {
  std::vector<const AllocationRecord *> pending;
  pending.reserve(allocs.size());
  for (const auto &a : allocs)
    pending.push_back(&a);
  std::stable_sort(pending.begin(), pending.end(),
                   [](const auto *x, const auto *y) {
                     return x->issued_at < y->issued_at;
                   });

  std::string out;
  std::size_t next_alloc = 0;
  for (const auto &ev : events) {
    while (next_alloc < pending.size() &&
           pending[next_alloc]->issued_at <= ev.timestamp) {
      out += format_alloc(*pending[next_alloc++]);
      out += '\n';
    }
    out += format_event(ev);
    out += '\n';
  }
  for (; next_alloc < pending.size(); ++next_alloc) {
    out += format_alloc(*pending[next_alloc]);
    out += '\n';
  }
  return out;
}

}  // namespace memviz

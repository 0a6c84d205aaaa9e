#include "memviz/analytics.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace memviz {

NameResolver::NameResolver(std::span<const AllocationRecord> allocs)
    : allocs_(allocs.begin(), allocs.end()) {
  std::stable_sort(allocs_.begin(), allocs_.end(),
                   [](const auto &a, const auto &b) {
                     return a.issued_at < b.issued_at;
                   });
}

const AllocationRecord *NameResolver::covering(Address addr, Timestamp at) {
  // Allocations [0, live) were issued at or before `at`.
  const auto live = static_cast<std::size_t>(
      std::upper_bound(allocs_.begin(), allocs_.end(), at,
                       [](Timestamp t, const AllocationRecord &a) {
                         return t < a.issued_at;
                       }) -
      allocs_.begin());
  auto [it, inserted] = cache_.try_emplace({addr, live}, nullptr);
  if (inserted) {
    for (std::size_t i = live; i-- > 0;)
      if (contains(allocs_[i], addr)) {
        it->second = &allocs_[i];
        break;
      }
  }
  return it->second;
}

std::string NameResolver::resolve(const VariableInfo &var, Address addr,
                                  Timestamp at) {
  switch (var.scope) {
  case Scope::Global:
  case Scope::Stack:
    return var.structure.empty() ? std::string{"?"} : var.structure;
  case Scope::Heap: {
    if (const AllocationRecord *a = covering(addr, at))
      return a->label;
    auto [it, inserted] =
        fallback_.try_emplace({var.function, var.structure}, fallback_.size());
    return "heap@" + var.function + "#" + std::to_string(it->second);
  }
  case Scope::Unknown:
    break;
  }
  return "?";
}

std::string resolve_variable_name(const VariableInfo &var, Address addr,
                                  std::span<const AllocationRecord> allocs,
                                  Timestamp at) {
  NameResolver resolver(allocs);
  return resolver.resolve(var, addr, at);
}

namespace {

struct Flat {
  Timestamp ts;
  Address address;
  const AccessEntry *entry;
};

std::vector<Flat> time_ordered(const RecordStore &store) {
  std::vector<Flat> flat;
  flat.reserve(store.total_events());
  for (const auto &[addr, list] : store.by_address())
    for (const AccessEntry &e : list)
      flat.push_back({e.timestamp, addr, &e});
  std::sort(flat.begin(), flat.end(),
            [](const Flat &a, const Flat &b) { return a.ts < b.ts; });
  return flat;
}

}  // namespace

VariableNaming::VariableNaming(const RecordStore &store,
                               std::span<const AllocationRecord> allocs) {
  NameResolver resolver(allocs);
  std::map<std::string, std::uint32_t> ids;
  const auto flat = time_ordered(store);
  timestamps_.reserve(flat.size());
  name_index_.reserve(flat.size());
  for (const Flat &f : flat) {
    const LutRecord &rec = store.lookup(f.entry->lut_id);
    std::string name = resolver.resolve(rec.var, f.address, f.ts);
    auto [it, inserted] =
        ids.try_emplace(name, static_cast<std::uint32_t>(names_.size()));
    if (inserted)
      names_.push_back(std::move(name));
    timestamps_.push_back(f.ts);
    name_index_.push_back(it->second);
  }
}

std::size_t VariableNaming::index_at(Timestamp ts) const {
  auto it = std::lower_bound(timestamps_.begin(), timestamps_.end(), ts);
  if (it == timestamps_.end() || *it != ts)
    throw std::out_of_range("no event at timestamp " + std::to_string(ts));
  return name_index_[static_cast<std::size_t>(it - timestamps_.begin())];
}

const AddressStats *Analysis::find(Address addr) const {
  auto it = std::lower_bound(
      stats.begin(), stats.end(), addr,
      [](const AddressStats &s, Address a) { return s.address < a; });
  if (it == stats.end() || it->address != addr)
    return nullptr;
  return &*it;
}

Analysis analyze(const RecordStore &store,
                 std::span<const AllocationRecord> allocs) {
  Analysis out;
  out.naming = VariableNaming(store, allocs);
  out.stats.reserve(store.by_address().size());
  for (const auto &[addr, list] : store.by_address()) {
    AddressStats s;
    s.address = addr;
    for (const AccessEntry &e : list) {
      switch (e.op) {
      case OperationKind::Load:
        ++s.loads;
        break;
      case OperationKind::Store:
        ++s.stores;
        break;
      case OperationKind::Modify:
        ++s.modifies;
        break;
      }
    }
    s.appearances = list.size();
    s.first_ts = list.front().timestamp;
    s.last_ts = list.back().timestamp;
    s.variable = out.naming.name_at(s.first_ts);
    out.stats.push_back(std::move(s));
  }
  return out;
}

std::vector<AddressStats> compute_stats(const RecordStore &store,
                                        std::span<const AllocationRecord> allocs) {
  return analyze(store, allocs).stats;
}

std::vector<TimelineEntry> build_timeline(const RecordStore &store,
                                          const VariableNaming &naming) {
  std::vector<TimelineEntry> out;
  const auto flat = time_ordered(store);
  out.reserve(flat.size());
  for (const Flat &f : flat)
    out.push_back({f.ts, f.address, f.entry->op, naming.name_at(f.ts)});
  return out;
}

namespace {

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"')
      q += '"';
    q += c;
  }
  q += '"';
  return q;
}

}  // namespace

void write_stats_csv(std::ostream &out, std::span<const AddressStats> stats) {
  out << "address,variable,loads,stores,modifies,appearances,first_ts,last_ts\n";
  std::vector<const AddressStats *> rows;
  rows.reserve(stats.size());
  for (const auto &s : stats)
    rows.push_back(&s);
  std::sort(rows.begin(), rows.end(),
            [](const auto *a, const auto *b) { return a->address < b->address; });
  for (const AddressStats *s : rows)
    out << format_address(s->address) << ',' << csv_field(s->variable) << ','
        << s->loads << ',' << s->stores << ',' << s->modifies << ','
        << s->appearances << ',' << s->first_ts << ',' << s->last_ts << '\n';
}

}  // namespace memviz

#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "memviz/analytics.hpp"
#include "memviz/trace_generator.hpp"
#include "oracles.hpp"

using namespace memviz;

namespace {

TraceEvent event(OperationKind op, std::uint64_t addr, Timestamp ts,
                 Scope scope = Scope::Global, std::string structure = "A",
                 std::string function = "main") {
  TraceEvent ev;
  ev.op = op;
  ev.address = Address{addr};
  ev.size = 8;
  ev.var.scope = scope;
  ev.var.function = std::move(function);
  ev.var.structure = std::move(structure);
  ev.timestamp = ts;
  return ev;
}

AllocationRecord alloc(std::uint64_t base, std::uint64_t size,
                       std::string label, Timestamp issued = 0) {
  AllocationRecord a;
  a.base = Address{base};
  a.size = size;
  a.function = "make";
  a.label = std::move(label);
  a.issued_at = issued;
  return a;
}

}  // namespace

TEST_CASE("stats partition an access list by operation") {
  using enum OperationKind;
  std::vector<TraceEvent> evs = {event(Load, 0x10, 0), event(Load, 0x10, 1),
                                 event(Store, 0x10, 2)};
  auto store = RecordStore::build(evs);
  auto stats = compute_stats(store, {});
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].loads == 2);
  CHECK(stats[0].stores == 1);
  CHECK(stats[0].modifies == 0);
  CHECK(stats[0].appearances == 3);
  CHECK(stats[0].variable == "A");
  CHECK(stats[0].first_ts == 0);
  CHECK(stats[0].last_ts == 2);
}

TEST_CASE("BMM C elements are only modified") {
  BmmSpec s;
  s.n = 4;
  s.block = 2;
  auto store = RecordStore::build(gen_bmm(s).events);
  auto analysis = analyze(store, {});
  for (std::uint64_t e = 0; e < 16; ++e) {
    const auto *st = analysis.find(Address{s.bases[2].value + e * 8});
    REQUIRE(st);
    CHECK(st->modifies == 4);
    CHECK(st->loads == 0);
    CHECK(st->stores == 0);
    CHECK(st->variable == "C");
  }
  CHECK(analysis.naming.names() == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("stats equal a brute-force histogram on random traces") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto g = gen_random({seed, 2000, 5, 32});
    auto store = RecordStore::build(g.events);
    auto stats = compute_stats(store, g.allocs);
    const auto hist = oracle::op_histogram(g.events);
    REQUIRE(stats.size() == hist.size());
    std::uint64_t total = 0;
    for (const auto &s : stats) {
      const auto &h = hist.at(s.address.value);
      CHECK(s.loads == h.loads);
      CHECK(s.stores == h.stores);
      CHECK(s.modifies == h.modifies);
      CHECK(s.appearances == h.total());
      CHECK(s.first_ts <= s.last_ts);
      total += s.appearances;
    }
    CHECK(total == store.total_events());
    CHECK(std::is_sorted(stats.begin(), stats.end(),
                         [](const auto &a, const auto &b) {
                           return a.address < b.address;
                         }));
  }
}

TEST_CASE("resolve_variable_name rules") {
  VariableInfo global{Scope::Global, "main", "A", std::nullopt};
  CHECK(resolve_variable_name(global, Address{0x10}, {}) == "A");

  VariableInfo heap{Scope::Heap, "f", std::string{kHeapSentinel}, std::nullopt};
  std::vector<AllocationRecord> allocs = {alloc(0x7f00, 64, "grid")};
  CHECK(resolve_variable_name(heap, Address{0x7f08}, allocs) == "grid");
  CHECK(resolve_variable_name(heap, Address{0x7f40}, allocs) == "heap@f#0");
  CHECK(resolve_variable_name(heap, Address{0x9000}, {}) == "heap@f#0");

  VariableInfo unknown{Scope::Unknown, "main", "", std::nullopt};
  CHECK(resolve_variable_name(unknown, Address{0x10}, {}) == "?");
}

TEST_CASE("latest live allocation wins") {
  VariableInfo heap{Scope::Heap, "f", std::string{kHeapSentinel}, std::nullopt};
  std::vector<AllocationRecord> allocs = {alloc(0x1000, 64, "old", 0),
                                          alloc(0x1000, 64, "new", 10)};
  NameResolver r(allocs);
  CHECK(r.resolve(heap, Address{0x1008}, 5) == "old");
  CHECK(r.resolve(heap, Address{0x1008}, 10) == "new");
  CHECK(r.resolve(heap, Address{0x1008}, 50) == "new");
  // Not yet allocated at t=3.
  std::vector<AllocationRecord> later = {alloc(0x2000, 16, "late", 4)};
  NameResolver r2(later);
  CHECK(r2.resolve(heap, Address{0x2000}, 3) == "heap@f#0");
  CHECK(r2.resolve(heap, Address{0x2000}, 4) == "late");
}

TEST_CASE("heap fallback names are deterministic and injective") {
  using enum OperationKind;
  std::vector<TraceEvent> evs = {
      event(Load, 0x100, 0, Scope::Heap, "?heap", "f"),
      event(Load, 0x200, 1, Scope::Heap, "?heap", "g"),
      event(Load, 0x108, 2, Scope::Heap, "?heap", "f"),
      event(Load, 0x300, 3, Scope::Heap, "buf", "f"),
  };
  auto store = RecordStore::build(evs);
  VariableNaming naming(store, {});
  CHECK(naming.name_at(0) == "heap@f#0");
  CHECK(naming.name_at(1) == "heap@g#1");
  CHECK(naming.name_at(2) == "heap@f#0");
  CHECK(naming.name_at(3) == "heap@f#2");
  auto names = naming.names();
  std::sort(names.begin(), names.end());
  CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
  VariableNaming again(store, {});
  CHECK(again.names() == naming.names());
  CHECK_THROWS_AS((void)naming.index_at(99), std::out_of_range);
}

TEST_CASE("random heap variables resolve through allocation records") {
  auto g = gen_random({13, 1500, 6, 16});
  auto store = RecordStore::build(g.events);
  auto analysis = analyze(store, g.allocs);
  for (const auto &ev : g.events) {
    const std::string &name = analysis.naming.name_at(ev.timestamp);
    if (ev.var.scope == Scope::Heap)
      CHECK(name.rfind("v", 0) == 0);
    else if (ev.var.scope == Scope::Unknown)
      CHECK(name == "?");
    else
      CHECK(name == ev.var.structure);
  }
}

TEST_CASE("timeline") {
  CHECK(build_timeline(RecordStore{}, VariableNaming{}).empty());

  Walk3dSpec s;
  s.dims = {2, 2, 2};
  s.element_size = 8;
  auto store = RecordStore::build(gen_walk3d(s).events);
  auto analysis = analyze(store, {});
  auto tl = build_timeline(store, analysis.naming);
  REQUIRE(tl.size() == 8);
  for (std::uint64_t i = 0; i < 8; ++i) {
    CHECK(tl[i].timestamp == i);
    CHECK(tl[i].address.value == s.base.value + 8 * i);
    CHECK(tl[i].op == OperationKind::Load);
    CHECK(tl[i].variable == "V");
  }
}

TEST_CASE("timeline equals raw events sorted by timestamp") {
  auto g = gen_random({77, 3000, 4, 64});
  auto events = g.events;
  auto store = RecordStore::build(events);
  auto tl = build_timeline(store, analyze(store, g.allocs).naming);
  std::sort(events.begin(), events.end(), [](const auto &a, const auto &b) {
    return a.timestamp < b.timestamp;
  });
  REQUIRE(tl.size() == events.size());
  for (std::size_t i = 0; i < tl.size(); ++i) {
    CHECK(tl[i].timestamp == events[i].timestamp);
    CHECK(tl[i].address == events[i].address);
    CHECK(tl[i].op == events[i].op);
  }
}

TEST_CASE("stats CSV format") {
  using enum OperationKind;
  std::vector<TraceEvent> evs = {event(Modify, 0x20, 0), event(Load, 0x10, 1),
                                 event(Store, 0x20, 2)};
  auto store = RecordStore::build(evs);
  std::ostringstream out;
  write_stats_csv(out, compute_stats(store, {}));
  CHECK(out.str() ==
        "address,variable,loads,stores,modifies,appearances,first_ts,last_ts\n"
        "0x10,A,1,0,0,1,1,1\n"
        "0x20,A,0,1,1,2,0,2\n");
}

#include "memviz/trace_generator.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace memviz {

namespace {

// Byte length of n elements of `size`, or throws on overflow.
std::uint64_t region_bytes(std::uint64_t n, std::uint64_t size) {
  if (size != 0 && n > UINT64_MAX / size)
    throw std::invalid_argument("array size overflows the address space");
  return n * size;
}

void check_fits(Address base, std::uint64_t bytes) {
  if (bytes > 0 && bytes - 1 > UINT64_MAX - base.value)
    throw std::invalid_argument("array runs past the end of the address space");
}

TraceEvent make_event(OperationKind op, Address base, std::uint64_t index,
                      std::uint32_t element_size, const char *function,
                      const char *structure, Timestamp ts) {
  TraceEvent ev;
  ev.op = op;
  ev.address = Address{base.value + index * element_size};
  ev.size = element_size;
  ev.thread = 0;
  ev.var.scope = Scope::Global;
  ev.var.function = function;
  ev.var.structure = structure;
  ev.var.element = index;
  ev.timestamp = ts;
  return ev;
}

}  // namespace

void BmmSpec::validate() const {
  if (n == 0)
    throw std::invalid_argument("bmm: n must be >= 1");
  if (block == 0 || block > n)
    throw std::invalid_argument("bmm: block must satisfy 1 <= block <= n");
  if (n % block != 0)
    throw std::invalid_argument("bmm: n must be a multiple of block");
  if (element_size == 0)
    throw std::invalid_argument("bmm: element size must be >= 1");
  const std::uint64_t bytes = region_bytes(region_bytes(n, n), element_size);
  for (const Address &b : bases)
    check_fits(b, bytes);
  for (std::size_t i = 0; i < bases.size(); ++i)
    for (std::size_t j = i + 1; j < bases.size(); ++j) {
      const std::uint64_t lo = std::min(bases[i].value, bases[j].value);
      const std::uint64_t hi = std::max(bases[i].value, bases[j].value);
      if (hi - lo < bytes)
        throw std::invalid_argument("bmm: matrix regions overlap");
    }
}

GeneratedTrace gen_bmm(const BmmSpec &spec) {
  spec.validate();
  const std::uint64_t n = spec.n;
  const std::uint64_t b = spec.block;
  const std::uint32_t es = spec.element_size;
  GeneratedTrace out;
  out.events.reserve(3 * n * n * n);
  Timestamp ts = 0;
  for (std::uint64_t ii = 0; ii < n; ii += b)
    for (std::uint64_t jj = 0; jj < n; jj += b)
      for (std::uint64_t kk = 0; kk < n; kk += b)
        for (std::uint64_t i = ii; i < ii + b; ++i)
          for (std::uint64_t j = jj; j < jj + b; ++j)
            for (std::uint64_t k = kk; k < kk + b; ++k) {
              out.events.push_back(make_event(OperationKind::Load,
                                              spec.bases[0], i * n + k, es,
                                              "bmm", "A", ts++));
              out.events.push_back(make_event(OperationKind::Load,
                                              spec.bases[1], k * n + j, es,
                                              "bmm", "B", ts++));
              out.events.push_back(make_event(OperationKind::Modify,
                                              spec.bases[2], i * n + j, es,
                                              "bmm", "C", ts++));
            }
  return out;
}

void Walk3dSpec::validate() const {
  for (auto d : dims)
    if (d == 0)
      throw std::invalid_argument("walk3d: all dims must be >= 1");
  if (element_size == 0)
    throw std::invalid_argument("walk3d: element size must be >= 1");
  const std::uint64_t count =
      region_bytes(region_bytes(dims[0], dims[1]), dims[2]);
  check_fits(base, region_bytes(count, element_size));
}

GeneratedTrace gen_walk3d(const Walk3dSpec &spec) {
  spec.validate();
  const auto [rows, cols, depth] = spec.dims;
  GeneratedTrace out;
  out.events.reserve(rows * cols * depth);
  Timestamp ts = 0;
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c)
      for (std::uint64_t d = 0; d < depth; ++d) {
        const std::uint64_t flat = (r * cols + c) * depth + d;
        out.events.push_back(make_event(OperationKind::Load, spec.base, flat,
                                        spec.element_size, "walk3d", "V",
                                        ts++));
      }
  return out;
}

void RandomSpec::validate() const {
  if (n_events == 0)
    throw std::invalid_argument("random: event count must be >= 1");
  if (n_vars == 0)
    throw std::invalid_argument("random: variable count must be >= 1");
  if (max_elems == 0)
    throw std::invalid_argument("random: max elements must be >= 1");
  if (max_elems > (std::uint64_t{1} << 24))
    throw std::invalid_argument("random: max elements must be <= 2^24");
  if (n_vars > 4096)
    throw std::invalid_argument("random: variable count must be <= 4096");
}

GeneratedTrace gen_random(const RandomSpec &spec) {
  spec.validate();
  static constexpr const char *kFunctions[] = {"main", "init", "compute",
                                               "worker"};
  static constexpr std::uint32_t kSizes[] = {1, 2, 4, 8};
  static constexpr Scope kScopes[] = {Scope::Global, Scope::Stack,
                                      Scope::Heap};
  constexpr std::uint64_t kVarArena = 0x10000000;
  constexpr std::uint64_t kUnknownArena = 0x08000000;

  // mt19937_64 output is fixed by the standard; reduce with modulo rather
  // than a distribution so traces match across standard libraries.
  std::mt19937_64 rng(spec.seed);
  auto draw = [&rng](std::uint64_t bound) { return rng() % bound; };

  struct Var {
    std::string name;
    Scope scope;
    std::uint32_t size;
    Address base;
  };
  const std::uint64_t stride = (spec.max_elems * 8 + 0xfff) / 0x1000 * 0x1000;
  GeneratedTrace out;
  std::vector<Var> vars;
  vars.reserve(spec.n_vars);
  for (std::uint32_t v = 0; v < spec.n_vars; ++v) {
    Var var{"v" + std::to_string(v), kScopes[draw(3)], kSizes[draw(4)],
            Address{kVarArena + v * stride}};
    if (var.scope == Scope::Heap) {
      AllocationRecord a;
      a.base = var.base;
      a.size = spec.max_elems * var.size;
      a.thread = 0;
      a.function = "main";
      a.label = var.name;
      a.issued_at = 0;
      out.allocs.push_back(std::move(a));
    }
    vars.push_back(std::move(var));
  }

  out.events.reserve(spec.n_events);
  for (std::uint64_t i = 0; i < spec.n_events; ++i) {
    TraceEvent ev;
    ev.op = static_cast<OperationKind>(draw(3));
    ev.thread = static_cast<ThreadId>(draw(4));
    ev.var.function = kFunctions[draw(4)];
    ev.timestamp = i;
    if (draw(16) == 0) {
      ev.var.scope = Scope::Unknown;
      ev.size = 8;
      ev.address = Address{kUnknownArena + draw(512) * 8};
    } else {
      const Var &var = vars[draw(vars.size())];
      const std::uint64_t elem = draw(spec.max_elems);
      ev.var.scope = var.scope;
      ev.size = var.size;
      ev.address = Address{var.base.value + elem * var.size};
      if (var.scope == Scope::Heap) {
        ev.var.structure = std::string{kHeapSentinel};
      } else {
        ev.var.structure = var.name;
        ev.var.element = elem;
      }
    }
    out.events.push_back(std::move(ev));
  }
  return out;
}

}  // namespace memviz

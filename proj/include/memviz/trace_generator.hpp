#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "memviz/trace_model.hpp"

namespace memviz {

struct GeneratedTrace {
  std::vector<TraceEvent> events;
  std::vector<AllocationRecord> allocs;
};

/// Blocked C = A * B over n x n row-major matrices.
struct BmmSpec {
  std::uint64_t n = 4;
  std::uint64_t block = 2;
  std::uint32_t element_size = 8;
  // A, B, C
  std::array<Address, 3> bases{Address{0x100000}, Address{0x200000},
                               Address{0x300000}};

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// Loop nest ii, jj, kk over blocks then i, j, k inside; each innermost
/// iteration emits L A[i*n+k], L B[k*n+j], M C[i*n+j]. Global scope,
/// function "bmm", element = flat index.
GeneratedTrace gen_bmm(const BmmSpec &spec);

struct Walk3dSpec {
  std::array<std::uint64_t, 3> dims{1, 1, 1};  // rows, cols, depth
  std::uint32_t element_size = 8;
  Address base{0x400000};

  void validate() const;
};

/// One load per element of "V", rows outermost and depth innermost.
GeneratedTrace gen_walk3d(const Walk3dSpec &spec);

struct RandomSpec {
  std::uint64_t seed = 0;
  std::uint64_t n_events = 1;
  std::uint32_t n_vars = 4;
  std::uint64_t max_elems = 64;

  void validate() const;
};

/// Reproducible mixed trace. Variables are named v0..v{n_vars-1}; each gets
/// a fixed scope, element size and base. Heap variables are announced by an
/// allocation record labelled with the variable name and their events carry
/// the "?heap" structure. About one event in sixteen is unattributed.
GeneratedTrace gen_random(const RandomSpec &spec);

}  // namespace memviz

#include "memviz/trace_model.hpp"

#include <charconv>

namespace memviz {

char op_letter(OperationKind op) {
  switch (op) {
  case OperationKind::Load:
    return 'L';
  case OperationKind::Store:
    return 'S';
  case OperationKind::Modify:
    return 'M';
  }
  return '?';
}

std::optional<OperationKind> op_from_letter(char c) {
  switch (c) {
  case 'L':
    return OperationKind::Load;
  case 'S':
    return OperationKind::Store;
  case 'M':
    return OperationKind::Modify;
  default:
    return std::nullopt;
  }
}

std::string_view op_name(OperationKind op) {
  switch (op) {
  case OperationKind::Load:
    return "load";
  case OperationKind::Store:
    return "store";
  case OperationKind::Modify:
    return "modify";
  }
  return "?";
}

std::string format_address(Address a) {
  char buf[2 + 16];
  buf[0] = '0';
  buf[1] = 'x';
  auto [end, ec] = std::to_chars(buf + 2, buf + sizeof buf, a.value, 16);
  (void)ec;
  return std::string(buf, end);
}

std::optional<Address> parse_address(std::string_view text) {
  if (text.size() < 3 || text.size() > 18 || text[0] != '0' ||
      (text[1] != 'x' && text[1] != 'X'))
    return std::nullopt;
  std::uint64_t v = 0;
  const char *first = text.data() + 2;
  const char *last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v, 16);
  if (ec != std::errc{} || ptr != last)
    return std::nullopt;
  return Address{v};
}

char scope_letter(Scope s) {
  switch (s) {
  case Scope::Global:
    return 'G';
  case Scope::Stack:
    return 'S';
  case Scope::Heap:
    return 'H';
  case Scope::Unknown:
    return 'U';
  }
  return 'U';
}

std::optional<Scope> scope_from_letter(char c) {
  switch (c) {
  case 'G':
    return Scope::Global;
  case 'S':
    return Scope::Stack;
  case 'H':
    return Scope::Heap;
  case 'U':
    return Scope::Unknown;
  default:
    return std::nullopt;
  }
}

bool is_well_formed(const VariableInfo &var) {
  return !var.element || !var.structure.empty();
}

bool overlaps(const AllocationRecord &a, Address addr, std::uint64_t size) {
  if (size == 0 || a.size == 0)
    return false;
  // Compare as [lo, hi] closed ranges so nothing wraps at 2^64.
  const std::uint64_t a_lo = a.base.value;
  const std::uint64_t a_hi =
      a.size - 1 > UINT64_MAX - a_lo ? UINT64_MAX : a_lo + (a.size - 1);
  const std::uint64_t b_lo = addr.value;
  const std::uint64_t b_hi =
      size - 1 > UINT64_MAX - b_lo ? UINT64_MAX : b_lo + (size - 1);
  return b_lo <= a_hi && a_lo <= b_hi;
}

}  // namespace memviz

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "memviz/analytics.hpp"
#include "memviz/record_store.hpp"

namespace memviz {

enum class SceneKind : std::uint8_t { CompleteMap, Array2d, Array3d };
enum class ColorConvention : std::uint8_t { PerEvent, LastAccess, FirstAccess };

std::string_view kind_name(SceneKind k);
std::string_view convention_name(ColorConvention c);

struct PointMeta {
  Address address;
  std::string variable;
  std::uint64_t loads = 0;
  std::uint64_t stores = 0;
  std::uint64_t modifies = 0;
  Timestamp timestamp = 0;
};

/// t is the recency color: 0 for the oldest event, 1 for the newest.
struct ScenePoint {
  double x = 0;
  double y = 0;
  double z = 0;
  double t = 0;
  PointMeta meta;
};

struct Scene {
  SceneKind kind = SceneKind::CompleteMap;
  std::string axis_x, axis_y, axis_z;
  std::string source;
  std::uint64_t total_events = 0;
  ColorConvention color = ColorConvention::PerEvent;
  // Accesses to the structure that fall outside the layout's extent.
  std::uint64_t out_of_layout = 0;
  std::vector<ScenePoint> points;
};

/// Row-major array geometry: (rows, cols) or (rows, cols, depth).
struct ArrayLayout {
  std::string structure;
  Address base;
  std::uint32_t element_size = 1;
  std::vector<std::uint64_t> dims;

  std::uint64_t element_count() const;
};

/// Parses `ROWSxCOLS[xDEPTH]xELEMSIZE`, e.g. "4x4x8" (4x4 array of 8-byte
/// elements) or "2x2x2x8". Between one and three dims. Throws
/// std::invalid_argument on bad syntax or zero values.
ArrayLayout parse_layout(std::string_view text, std::string structure,
                         Address base = {});

class LayoutMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// timestamp / (total_events - 1), and 1.0 for a single-event trace.
/// Throws std::out_of_range when timestamp >= total_events.
double normalize_time(Timestamp timestamp, std::uint64_t total_events);

/// One point per event. x = 1-based access ordinal within the address,
/// y = variable index (first appearance), z = address.
Scene build_complete_map(const RecordStore &store, const Analysis &analysis);

/// One point per touched element. z = row, x = column, y = appearances;
/// colored by the element's last access.
Scene build_2d_array_scene(const RecordStore &store, const Analysis &analysis,
                           const ArrayLayout &layout);

/// One point per touched element. z = row, x = column, y = depth; colored
/// by the element's first access.
Scene build_3d_array_scene(const RecordStore &store, const Analysis &analysis,
                           const ArrayLayout &layout);

/// Base address for `structure` when the user gave none: derived from the
/// first access carrying an element index, else the lowest address the
/// structure touches. nullopt if the structure is never accessed.
std::optional<Address> infer_layout_base(const RecordStore &store,
                                         const Analysis &analysis,
                                         std::string_view structure,
                                         std::uint32_t element_size);

/// Compact JSON with sorted keys. Integral values print as integers, other
/// reals with at most 9 significant digits.
std::string scene_to_json(const Scene &scene);

}  // namespace memviz

#include "memviz/scene_builder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

#include <json.hpp>

namespace memviz {

std::string_view kind_name(SceneKind k) {
  switch (k) {
  case SceneKind::CompleteMap:
    return "complete_map";
  case SceneKind::Array2d:
    return "array2d";
  case SceneKind::Array3d:
    return "array3d";
  }
  return "?";
}

std::string_view convention_name(ColorConvention c) {
  switch (c) {
  case ColorConvention::PerEvent:
    return "per_event";
  case ColorConvention::LastAccess:
    return "last_access";
  case ColorConvention::FirstAccess:
    return "first_access";
  }
  return "?";
}

std::uint64_t ArrayLayout::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > UINT64_MAX / d)
      throw std::invalid_argument("layout element count overflows");
    n *= d;
  }
  return n;
}

ArrayLayout parse_layout(std::string_view text, std::string structure,
                         Address base) {
  std::vector<std::uint64_t> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find('x', pos);
    const std::string_view tok = text.substr(pos, next - pos);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() ||
        v == 0)
      throw std::invalid_argument("bad layout '" + std::string{text} +
                                  "': expected positive integers separated "
                                  "by 'x'");
    parts.push_back(v);
    if (next == std::string_view::npos)
      break;
    pos = next + 1;
  }
  if (parts.size() < 2 || parts.size() > 4)
    throw std::invalid_argument("bad layout '" + std::string{text} +
                                "': need 1 to 3 dims plus an element size");
  if (parts.back() > UINT32_MAX)
    throw std::invalid_argument("layout element size too large");
  ArrayLayout layout;
  layout.structure = std::move(structure);
  layout.base = base;
  layout.element_size = static_cast<std::uint32_t>(parts.back());
  layout.dims.assign(parts.begin(), parts.end() - 1);
  (void)layout.element_count();
  return layout;
}

double normalize_time(Timestamp timestamp, std::uint64_t total_events) {
  if (timestamp >= total_events)
    throw std::out_of_range("timestamp " + std::to_string(timestamp) +
                            " outside trace of " +
                            std::to_string(total_events) + " events");
  if (total_events == 1)
    return 1.0;
  return static_cast<double>(timestamp) /
         static_cast<double>(total_events - 1);
}

namespace {

PointMeta meta_for(const Analysis &analysis, Address addr) {
  PointMeta m;
  m.address = addr;
  if (const AddressStats *s = analysis.find(addr)) {
    m.loads = s->loads;
    m.stores = s->stores;
    m.modifies = s->modifies;
  }
  return m;
}

// Accesses to one structure grouped by array element.
struct ElementTally {
  Address address;
  std::uint64_t loads = 0, stores = 0, modifies = 0;
  Timestamp first_ts = 0, last_ts = 0;
  std::uint64_t count() const { return loads + stores + modifies; }
};

struct ArrayTally {
  std::map<std::uint64_t, ElementTally> elements;  // keyed by flat index
  std::uint64_t out_of_layout = 0;
};

ArrayTally tally_array(const RecordStore &store, const Analysis &analysis,
                       const ArrayLayout &layout) {
  ArrayTally out;
  const auto &names = analysis.naming.names();
  auto name_it = std::find(names.begin(), names.end(), layout.structure);
  if (name_it == names.end())
    return out;
  const auto wanted = static_cast<std::size_t>(name_it - names.begin());

  const std::uint64_t count = layout.element_count();
  const std::uint64_t es = layout.element_size;
  if (count > UINT64_MAX / es)
    throw std::invalid_argument("layout extent overflows");
  const std::uint64_t extent = count * es;
  const std::uint64_t base = layout.base.value;

  for (const auto &[addr, list] : store.by_address()) {
    for (const AccessEntry &e : list) {
      if (analysis.naming.index_at(e.timestamp) != wanted)
        continue;
      if (addr.value < base || addr.value - base >= extent) {
        ++out.out_of_layout;
        continue;
      }
      const std::uint64_t offset = addr.value - base;
      if (offset % es != 0)
        throw LayoutMismatch("address " + format_address(addr) + " of '" +
                             layout.structure + "' is not aligned to " +
                             std::to_string(es) + "-byte elements from base " +
                             format_address(layout.base));
      const std::uint64_t flat = offset / es;
      auto [it, inserted] = out.elements.try_emplace(flat);
      ElementTally &t = it->second;
      if (inserted) {
        t.address = addr;
        t.first_ts = e.timestamp;
      }
      t.first_ts = std::min(t.first_ts, e.timestamp);
      t.last_ts = std::max(t.last_ts, e.timestamp);
      switch (e.op) {
      case OperationKind::Load:
        ++t.loads;
        break;
      case OperationKind::Store:
        ++t.stores;
        break;
      case OperationKind::Modify:
        ++t.modifies;
        break;
      }
    }
  }
  return out;
}

void require_dims(const ArrayLayout &layout, std::size_t n) {
  if (layout.dims.size() != n)
    throw std::invalid_argument("layout for '" + layout.structure + "' has " +
                                std::to_string(layout.dims.size()) +
                                " dims, scene needs " + std::to_string(n));
  if (layout.element_size == 0)
    throw std::invalid_argument("layout element size must be >= 1");
  for (auto d : layout.dims)
    if (d == 0)
      throw std::invalid_argument("layout dims must be >= 1");
}

Scene array_scene(SceneKind kind, const RecordStore &store,
                  const Analysis &analysis, const ArrayLayout &layout) {
  const bool three_d = kind == SceneKind::Array3d;
  require_dims(layout, three_d ? 3 : 2);
  Scene scene;
  scene.kind = kind;
  scene.axis_x = "column";
  scene.axis_y = three_d ? "depth" : "appearances";
  scene.axis_z = "row";
  scene.total_events = store.total_events();
  scene.color =
      three_d ? ColorConvention::FirstAccess : ColorConvention::LastAccess;

  ArrayTally tally = tally_array(store, analysis, layout);
  scene.out_of_layout = tally.out_of_layout;
  const std::uint64_t cols = layout.dims[1];
  const std::uint64_t depth = three_d ? layout.dims[2] : 1;
  scene.points.reserve(tally.elements.size());
  for (const auto &[flat, t] : tally.elements) {
    ScenePoint p;
    const Timestamp ts = three_d ? t.first_ts : t.last_ts;
    p.z = static_cast<double>(flat / (cols * depth));
    p.x = static_cast<double>((flat / depth) % cols);
    p.y = three_d ? static_cast<double>(flat % depth)
                  : static_cast<double>(t.count());
    p.t = normalize_time(ts, store.time_extent());
    p.meta.address = t.address;
    p.meta.variable = layout.structure;
    p.meta.loads = t.loads;
    p.meta.stores = t.stores;
    p.meta.modifies = t.modifies;
    p.meta.timestamp = ts;
    scene.points.push_back(std::move(p));
  }
  return scene;
}

}  // namespace

Scene build_complete_map(const RecordStore &store, const Analysis &analysis) {
  Scene scene;
  scene.kind = SceneKind::CompleteMap;
  scene.axis_x = "access #";
  scene.axis_y = "variable";
  scene.axis_z = "address";
  scene.total_events = store.total_events();
  scene.color = ColorConvention::PerEvent;
  scene.points.reserve(store.total_events());
  for (const auto &[addr, list] : store.by_address()) {
    const PointMeta base_meta = meta_for(analysis, addr);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const AccessEntry &e = list[i];
      ScenePoint p;
      p.x = static_cast<double>(i + 1);
      p.y = static_cast<double>(analysis.naming.index_at(e.timestamp));
      p.z = static_cast<double>(addr.value);
      p.t = normalize_time(e.timestamp, store.time_extent());
      p.meta = base_meta;
      p.meta.variable = analysis.naming.name_at(e.timestamp);
      p.meta.timestamp = e.timestamp;
      scene.points.push_back(std::move(p));
    }
  }
  std::sort(scene.points.begin(), scene.points.end(),
            [](const ScenePoint &a, const ScenePoint &b) {
              return a.meta.timestamp < b.meta.timestamp;
            });
  return scene;
}

Scene build_2d_array_scene(const RecordStore &store, const Analysis &analysis,
                           const ArrayLayout &layout) {
  return array_scene(SceneKind::Array2d, store, analysis, layout);
}

Scene build_3d_array_scene(const RecordStore &store, const Analysis &analysis,
                           const ArrayLayout &layout) {
  return array_scene(SceneKind::Array3d, store, analysis, layout);
}

std::optional<Address> infer_layout_base(const RecordStore &store,
                                         const Analysis &analysis,
                                         std::string_view structure,
                                         std::uint32_t element_size) {
  const auto &names = analysis.naming.names();
  auto name_it = std::find(names.begin(), names.end(), structure);
  if (name_it == names.end())
    return std::nullopt;
  const auto wanted = static_cast<std::size_t>(name_it - names.begin());

  std::optional<Address> lowest;
  std::optional<std::pair<Timestamp, Address>> from_index;
  for (const auto &[addr, list] : store.by_address()) {
    for (const AccessEntry &e : list) {
      if (analysis.naming.index_at(e.timestamp) != wanted)
        continue;
      if (!lowest)
        lowest = addr;  // map iterates in address order
      const LutRecord &rec = store.lookup(e.lut_id);
      if (!rec.var.element || (from_index && from_index->first < e.timestamp))
        continue;
      const std::uint64_t elem = *rec.var.element;
      if (elem <= addr.value / element_size)
        from_index.emplace(e.timestamp,
                           Address{addr.value - elem * element_size});
    }
  }
  if (from_index)
    return from_index->second;
  return lowest;
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) <= 9007199254740992.0)
    return static_cast<std::int64_t>(v);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

std::string scene_to_json(const Scene &scene) {
  nlohmann::json j;
  j["kind"] = kind_name(scene.kind);
  j["axis_labels"] = {
      {"x", scene.axis_x}, {"y", scene.axis_y}, {"z", scene.axis_z}};
  j["total_events"] = scene.total_events;
  j["source"] = scene.source;
  j["color_convention"] = convention_name(scene.color);
  j["out_of_layout"] = scene.out_of_layout;
  auto &points = j["points"] = nlohmann::json::array();
  for (const ScenePoint &p : scene.points) {
    points.push_back({{"x", number(p.x)},
                      {"y", number(p.y)},
                      {"z", number(p.z)},
                      {"t", number(p.t)},
                      {"meta",
                       {{"address", format_address(p.meta.address)},
                        {"variable", p.meta.variable},
                        {"loads", p.meta.loads},
                        {"stores", p.meta.stores},
                        {"modifies", p.meta.modifies},
                        {"timestamp", p.meta.timestamp}}}});
  }
  return j.dump();
}

}  // namespace memviz

#include "memviz/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "memviz/analytics.hpp"
#include "memviz/record_store.hpp"
#include "memviz/scene_builder.hpp"
#include "memviz/trace_generator.hpp"
#include "memviz/trace_parser.hpp"

namespace memviz::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string input;
  std::string output;

  // parse
  bool drop_unattributed = false;
  std::vector<std::string> keep_fn;
  std::vector<std::string> keep_var;
  std::vector<ThreadId> keep_thread;

  // scene
  std::string kind = "complete";
  std::string var;
  std::string layout;
  std::string base;

  // gen
  BmmSpec bmm;
  std::string dims = "1,1,1";
  std::uint32_t walk_elem = 8;
  std::string walk_base;
  RandomSpec random;
};

std::string dump_json(const nlohmann::json &j) {
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) +
         "\n";
}

Address address_flag(const std::string &text, const char *flag) {
  auto a = parse_address(text);
  if (!a)
    throw UsageError(std::string{flag} + ": expected 0x-prefixed hex address, got '" +
                     text + "'");
  return *a;
}

std::uint64_t max_malformed() {
  const char *env = std::getenv("MEMVIZ_MAX_MALFORMED");
  if (env == nullptr || *env == '\0')
    return kDefaultMaxMalformed;
  std::uint64_t v = 0;
  std::string_view s{env};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw UsageError("MEMVIZ_MAX_MALFORMED must be a non-negative integer");
  return v;
}

ParsedTrace load_trace(const std::string &path, const FilterRule &rules,
                       std::ostream &err) {
  ParsedTrace trace;
  try {
    trace = parse_trace_file(path, rules);
  } catch (const TraceIoError &e) {
    throw IoError(e.what());
  }
  if (trace.report.lines_malformed > 0)
    err << "memviz: " << path << ": " << trace.report.lines_malformed
        << " malformed line(s), first at line " << trace.malformed.front().first
        << " (" << reason_name(trace.malformed.front().second) << ")\n";
  return trace;
}

void check_malformed(const ParsedTrace &trace) {
  const std::uint64_t limit = max_malformed();
  if (trace.report.lines_malformed > limit)
    throw DataError("too many malformed lines (" +
                    std::to_string(trace.report.lines_malformed) + " > " +
                    std::to_string(limit) + ")");
}

void write_output(const std::string &path, std::string_view content) {
  try {
    write_atomically(path, content);
  } catch (const std::exception &e) {
    throw IoError(e.what());
  }
}

nlohmann::json report_json(const ParsedTrace &trace) {
  const ParseReport &r = trace.report;
  std::map<std::string, std::uint64_t> by_reason;
  for (const auto &[line, reason] : trace.malformed)
    ++by_reason[std::string{reason_name(reason)}];
  nlohmann::json j;
  j["lines_read"] = r.lines_read;
  j["events_emitted"] = r.events_emitted;
  j["events_filtered"] = r.events_filtered;
  j["lines_skipped"] = r.lines_skipped;
  j["lines_malformed"] = r.lines_malformed;
  j["allocations"] = r.allocations;
  j["reduction_ratio"] = r.reduction_ratio();
  j["reduction_percent"] = reduction_percent(r);
  j["malformed_by_reason"] = by_reason;
  return j;
}

nlohmann::json store_json(const RecordStore &store) {
  nlohmann::json lut = nlohmann::json::array();
  for (const LutRecord &r : store.lut()) {
    nlohmann::json e;
    e["id"] = r.id;
    e["address"] = format_address(r.address);
    e["size"] = r.size;
    e["thread"] = r.thread;
    e["scope"] = std::string(1, scope_letter(r.var.scope));
    e["function"] = r.var.function;
    e["structure"] = r.var.structure;
    e["element"] = r.var.element ? nlohmann::json(*r.var.element) : nullptr;
    lut.push_back(std::move(e));
  }
  nlohmann::json by_address = nlohmann::json::object();
  for (const auto &[addr, list] : store.by_address()) {
    nlohmann::json entries = nlohmann::json::array();
    for (const AccessEntry &a : list)
      entries.push_back({{"op", std::string(1, op_letter(a.op))},
                         {"lut_id", a.lut_id},
                         {"timestamp", a.timestamp}});
    by_address[format_address(addr)] = std::move(entries);
  }
  nlohmann::json j;
  j["lut"] = std::move(lut);
  j["by_address"] = std::move(by_address);
  j["variable_order"] = store.variable_order();
  j["total_events"] = store.total_events();
  return j;
}

std::array<std::uint64_t, 3> parse_dims(const std::string &text) {
  std::array<std::uint64_t, 3> dims{};
  std::stringstream ss(text);
  std::string tok;
  std::size_t n = 0;
  while (std::getline(ss, tok, ',')) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (n >= 3 || tok.empty() || ec != std::errc{} ||
        ptr != tok.data() + tok.size())
      throw UsageError("--dims: expected three comma-separated integers, got '" +
                       text + "'");
    dims[n++] = v;
  }
  if (n != 3)
    throw UsageError("--dims: expected three comma-separated integers, got '" +
                     text + "'");
  return dims;
}

int cmd_gen(const std::string &which, RunConfig &cfg) {
  GeneratedTrace trace;
  try {
    if (which == "bmm") {
      const std::uint64_t bytes = cfg.bmm.n * cfg.bmm.n * cfg.bmm.element_size;
      // A, B, C laid out back to back with a 4 KiB gap.
      const std::uint64_t stride = (bytes + 0xfff) / 0x1000 * 0x1000 + 0x1000;
      cfg.bmm.bases = {Address{0x100000}, Address{0x100000 + stride},
                       Address{0x100000 + 2 * stride}};
      trace = gen_bmm(cfg.bmm);
    } else if (which == "walk3d") {
      Walk3dSpec spec;
      spec.dims = parse_dims(cfg.dims);
      spec.element_size = cfg.walk_elem;
      if (!cfg.walk_base.empty())
        spec.base = address_flag(cfg.walk_base, "--base");
      trace = gen_walk3d(spec);
    } else {
      trace = gen_random(cfg.random);
    }
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
  write_output(cfg.output, serialize_trace(trace.events, trace.allocs));
  return kOk;
}

FilterRule filter_from(const RunConfig &cfg) {
  FilterRule rules;
  rules.drop_unattributed = cfg.drop_unattributed;
  rules.keep_functions.insert(cfg.keep_fn.begin(), cfg.keep_fn.end());
  rules.keep_variables.insert(cfg.keep_var.begin(), cfg.keep_var.end());
  rules.keep_threads.insert(cfg.keep_thread.begin(), cfg.keep_thread.end());
  return rules;
}

int cmd_parse(const RunConfig &cfg, std::ostream &err) {
  ParsedTrace trace = load_trace(cfg.input, filter_from(cfg), err);
  write_output(cfg.output, dump_json(report_json(trace)));
  check_malformed(trace);
  return kOk;
}

int cmd_stats(const RunConfig &cfg, std::ostream &err) {
  ParsedTrace trace = load_trace(cfg.input, {}, err);
  check_malformed(trace);
  const RecordStore store = RecordStore::build(trace.events);
  std::ostringstream csv;
  write_stats_csv(csv, compute_stats(store, trace.allocs));
  write_output(cfg.output, csv.str());
  return kOk;
}

int cmd_store(const RunConfig &cfg, std::ostream &err) {
  ParsedTrace trace = load_trace(cfg.input, {}, err);
  check_malformed(trace);
  const RecordStore store = RecordStore::build(trace.events);
  write_output(cfg.output, dump_json(store_json(store)));
  return kOk;
}

int cmd_scene(const RunConfig &cfg, std::ostream &err) {
  // Validate flags before touching the input.
  const bool complete = cfg.kind == "complete";
  std::optional<ArrayLayout> layout;
  std::optional<Address> base;
  if (!complete) {
    if (cfg.var.empty() || cfg.layout.empty())
      throw UsageError("--kind " + cfg.kind + " requires --var and --layout");
    try {
      layout = parse_layout(cfg.layout, cfg.var);
    } catch (const std::invalid_argument &e) {
      throw UsageError(e.what());
    }
    const std::size_t want = cfg.kind == "array2d" ? 2 : 3;
    if (layout->dims.size() != want)
      throw UsageError("--kind " + cfg.kind + " needs a layout with " +
                       std::to_string(want) + " dims");
    if (!cfg.base.empty())
      base = address_flag(cfg.base, "--base");
  }

  ParsedTrace trace = load_trace(cfg.input, {}, err);
  check_malformed(trace);
  const RecordStore store = RecordStore::build(trace.events);
  const Analysis analysis = analyze(store, trace.allocs);

  Scene scene;
  if (complete) {
    scene = build_complete_map(store, analysis);
  } else {
    if (!base)
      base = infer_layout_base(store, analysis, layout->structure,
                               layout->element_size);
    if (!base)
      err << "memviz: variable '" << layout->structure
          << "' never accessed; scene is empty\n";
    layout->base = base.value_or(Address{});
    try {
      scene = cfg.kind == "array2d"
                  ? build_2d_array_scene(store, analysis, *layout)
                  : build_3d_array_scene(store, analysis, *layout);
    } catch (const LayoutMismatch &e) {
      throw DataError(e.what());
    }
  }
  scene.source = cfg.input;
  write_output(cfg.output, scene_to_json(scene) + "\n");
  return kOk;
}

}  // namespace

void write_atomically(const std::filesystem::path &path,
                      std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto " + path.string());
  }
}

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  RunConfig cfg;
  CLI::App app{"Memory access pattern analysis and visualization export",
               "memviz"};
  app.require_subcommand(1);

  auto *gen = app.add_subcommand("gen", "Generate a synthetic trace");
  gen->require_subcommand(1);
  auto *gen_bmm = gen->add_subcommand("bmm", "Blocked matrix multiplication");
  gen_bmm->add_option("--n", cfg.bmm.n, "Matrix dimension")->required();
  gen_bmm->add_option("--block", cfg.bmm.block, "Block size")->required();
  gen_bmm->add_option("--elem", cfg.bmm.element_size, "Element size in bytes")
      ->capture_default_str();
  gen_bmm->add_option("-o,--output", cfg.output, "Output trace")->required();
  auto *gen_walk = gen->add_subcommand("walk3d", "Sequential 3D array walk");
  gen_walk->add_option("--dims", cfg.dims, "ROWS,COLS,DEPTH")->required();
  gen_walk->add_option("--elem", cfg.walk_elem, "Element size in bytes")
      ->capture_default_str();
  gen_walk->add_option("--base", cfg.walk_base, "Base address (hex)");
  gen_walk->add_option("-o,--output", cfg.output, "Output trace")->required();
  auto *gen_rand = gen->add_subcommand("random", "Seeded random trace");
  gen_rand->add_option("--seed", cfg.random.seed, "RNG seed")->required();
  gen_rand->add_option("--events", cfg.random.n_events, "Event count")
      ->required();
  gen_rand->add_option("--vars", cfg.random.n_vars, "Variable count")
      ->capture_default_str();
  gen_rand->add_option("--max-elems", cfg.random.max_elems,
                       "Elements per variable")
      ->capture_default_str();
  gen_rand->add_option("-o,--output", cfg.output, "Output trace")->required();

  auto *parse = app.add_subcommand("parse", "Parse and filter a trace");
  parse->add_option("trace", cfg.input, "Trace file")->required();
  parse->add_flag("--drop-unattributed", cfg.drop_unattributed,
                  "Drop events with unknown scope");
  parse->add_option("--keep-fn", cfg.keep_fn, "Keep only these functions")
      ->delimiter(',');
  parse->add_option("--keep-var", cfg.keep_var, "Keep only these structures")
      ->delimiter(',');
  parse->add_option("--keep-thread", cfg.keep_thread, "Keep only these threads")
      ->delimiter(',');
  parse->add_option("--report", cfg.output, "Report JSON")->required();

  auto *stats = app.add_subcommand("stats", "Per-address statistics as CSV");
  stats->add_option("trace", cfg.input, "Trace file")->required();
  stats->add_option("-o,--output", cfg.output, "Output CSV")->required();

  auto *scene = app.add_subcommand("scene", "Export a visualization scene");
  scene->add_option("trace", cfg.input, "Trace file")->required();
  scene->add_option("--kind", cfg.kind, "complete, array2d or array3d")
      ->check(CLI::IsMember({"complete", "array2d", "array3d"}))
      ->capture_default_str();
  scene->add_option("--var", cfg.var, "Array structure name");
  scene->add_option("--layout", cfg.layout,
                    "ROWSxCOLS[xDEPTH]xELEMSIZE, e.g. 4x4x8");
  scene->add_option("--base", cfg.base,
                    "Array base address (hex); inferred when omitted");
  scene->add_option("-o,--output", cfg.output, "Output JSON")->required();

  auto *store = app.add_subcommand("store", "Dump the deduplicated store");
  store->add_option("trace", cfg.input, "Trace file")->required();
  store->add_option("--dump", cfg.output, "Output JSON")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "memviz: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    (void)max_malformed();
    if (*gen) {
      for (auto *sub : {gen_bmm, gen_walk, gen_rand})
        if (*sub)
          return cmd_gen(sub->get_name(), cfg);
    }
    if (*parse)
      return cmd_parse(cfg, err);
    if (*stats)
      return cmd_stats(cfg, err);
    if (*scene)
      return cmd_scene(cfg, err);
    if (*store)
      return cmd_store(cfg, err);
  } catch (const UsageError &e) {
    err << "memviz: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError &e) {
    err << "memviz: " << e.what() << "\n";
    return kIo;
  } catch (const DataError &e) {
    err << "memviz: " << e.what() << "\n";
    return kData;
  }
  err << app.help();
  return kUsage;
}

}  // namespace memviz::cli

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tangleproof/bottleneck.hpp"
#include "tangleproof/engine.hpp"
#include "tangleproof/model.hpp"

namespace tangleproof {

// Field order in emitted documents is part of the byte-stable output
// contract, hence the ordered flavor.
using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaTag = "tangleproof/v1";
inline constexpr const char* kTraceCsvHeader =
    "n,L,F,W,delta,completions,theta,eps,parents";

// ---------------------------------------------------------------------------
// Field helpers
// ---------------------------------------------------------------------------

// Readers throw ConfigError naming the first offending field; artifact
// loaders (traces, plans, reports, graphs) rewrap into SchemaError so the
// two exit paths stay distinct.
namespace detail_json {

inline const Json& require(const Json& j, const char* key,
                           const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(where + ": missing field '" + key + "'");
  return *it;
}

inline std::int64_t int_field(const Json& j, const char* key,
                              const std::string& where) {
  const Json& f = require(j, key, where);
  if (!f.is_number_integer())
    throw ConfigError(where + "." + key + ": expected an integer");
  return f.get<std::int64_t>();
}

inline std::uint64_t uint_field(const Json& j, const char* key,
                                const std::string& where) {
  const std::int64_t v = int_field(j, key, where);
  if (v < 0)
    throw ConfigError(where + "." + key + ": expected a non-negative value");
  return static_cast<std::uint64_t>(v);
}

inline double double_field(const Json& j, const char* key,
                           const std::string& where) {
  const Json& f = require(j, key, where);
  if (!f.is_number())
    throw ConfigError(where + "." + key + ": expected a number");
  return f.get<double>();
}

inline std::string string_field(const Json& j, const char* key,
                                const std::string& where) {
  const Json& f = require(j, key, where);
  if (!f.is_string())
    throw ConfigError(where + "." + key + ": expected a string");
  return f.get<std::string>();
}

inline bool bool_field(const Json& j, const char* key,
                       const std::string& where) {
  const Json& f = require(j, key, where);
  if (!f.is_boolean())
    throw ConfigError(where + "." + key + ": expected a boolean");
  return f.get<bool>();
}

template <typename T>
std::vector<T> int_array(const Json& j, const char* key,
                         const std::string& where) {
  const Json& f = require(j, key, where);
  if (!f.is_array())
    throw ConfigError(where + "." + key + ": expected an array");
  std::vector<T> out;
  for (const Json& e : f) {
    if (!e.is_number_integer())
      throw ConfigError(where + "." + key + ": expected integer entries");
    out.push_back(e.get<T>());
  }
  return out;
}

inline std::vector<double> prob_array(const Json& j, const char* key,
                                      const std::string& where) {
  const Json& f = require(j, key, where);
  if (!f.is_array())
    throw ConfigError(where + "." + key + ": expected an array");
  std::vector<double> out;
  for (const Json& e : f) {
    if (!e.is_number())
      throw ConfigError(where + "." + key + ": expected numeric entries");
    out.push_back(e.get<double>());
  }
  return out;
}

// Documents carry a schema tag plus the document kind; both must match.
inline void check_envelope(const Json& j, const char* kind,
                           const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected a JSON object");
  const auto schema = j.find("schema");
  if (schema == j.end() || !schema->is_string() ||
      schema->get<std::string>() != kSchemaTag)
    throw SchemaError(where + ".schema: expected \"" + kSchemaTag + "\"");
  const auto k = j.find("kind");
  if (k == j.end() || !k->is_string() || k->get<std::string>() != kind)
    throw SchemaError(where + ".kind: expected \"" + std::string(kind) +
                      "\"");
}

[[noreturn]] inline void rethrow_as_schema(const ConfigError& e) {
  throw SchemaError(e.what());
}

}  // namespace detail_json

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

[[nodiscard]] inline Json params_to_json(const ModelParams& p) {
  Json j;
  j["durations"] = p.theta_support;
  j["duration_probs"] = p.theta_probs;
  j["lookbacks"] = p.eps_support;
  j["lookback_probs"] = p.eps_probs;
  j["parent_counts"] = p.k_support;
  j["parent_count_probs"] = p.k_probs;
  j["tip_threshold"] = p.b;
  return j;
}

[[nodiscard]] inline ModelParams params_from_json(const Json& j,
                                                  const std::string& where) {
  namespace dj = detail_json;
  ModelParams p;
  p.theta_support = dj::int_array<int>(j, "durations", where);
  p.theta_probs = dj::prob_array(j, "duration_probs", where);
  p.eps_support = dj::int_array<int>(j, "lookbacks", where);
  p.eps_probs = dj::prob_array(j, "lookback_probs", where);
  p.k_support = dj::int_array<int>(j, "parent_counts", where);
  p.k_probs = dj::prob_array(j, "parent_count_probs", where);
  p.b = static_cast<int>(dj::int_field(j, "tip_threshold", where));
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

// One experiment: the model, how long and with which seeds to run, and where
// outputs land. Forcing runs use `anchor` = 0 to search for the first
// qualifying state, or an explicit first forced arrival id.
struct ExperimentConfig {
  ModelParams params;
  Step steps = 10000;
  std::vector<std::uint64_t> seeds{1};
  int parallelism = 1;
  Step anchor = 0;
  Step post_steps = 500;
  std::string out_dir = ".";

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

[[nodiscard]] inline Json config_to_json(const ExperimentConfig& c) {
  // The config document is flat: model fields sit beside run fields.
  Json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "config";
  Json model = params_to_json(c.params);
  for (auto& [key, value] : model.items()) j[key] = std::move(value);
  j["steps"] = c.steps;
  j["seeds"] = c.seeds;
  j["parallelism"] = c.parallelism;
  j["anchor"] = c.anchor;
  j["post_steps"] = c.post_steps;
  j["out_dir"] = c.out_dir;
  return j;
}

[[nodiscard]] inline ExperimentConfig config_from_json(const Json& j) {
  namespace dj = detail_json;
  const std::string where = "config";
  dj::check_envelope(j, "config", where);
  ExperimentConfig c;
  c.params = params_from_json(j, where);
  if (j.contains("steps"))
    c.steps = static_cast<Step>(dj::uint_field(j, "steps", where));
  if (j.contains("seeds")) {
    c.seeds = dj::int_array<std::uint64_t>(j, "seeds", where);
    if (c.seeds.empty())
      throw ConfigError(where + ".seeds: expected at least one seed");
  }
  if (j.contains("parallelism")) {
    c.parallelism = static_cast<int>(dj::int_field(j, "parallelism", where));
    if (c.parallelism < 1)
      throw ConfigError(where + ".parallelism: expected a positive value");
  }
  if (j.contains("anchor"))
    c.anchor = static_cast<Step>(dj::uint_field(j, "anchor", where));
  if (j.contains("post_steps"))
    c.post_steps = static_cast<Step>(dj::uint_field(j, "post_steps", where));
  if (j.contains("out_dir"))
    c.out_dir = dj::string_field(j, "out_dir", where);
  return c;
}

// ---------------------------------------------------------------------------
// Whole-file helpers
// ---------------------------------------------------------------------------

[[nodiscard]] inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open for reading");
  Json j = Json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw SchemaError(path + ": not valid JSON");
  return j;
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw SchemaError(path + ": cannot open for writing");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw SchemaError(path + ": write failed");
}

// Config files split the error space: unreadable or unparseable files are
// I/O-level (SchemaError), parseable-but-wrong content is ConfigError.
[[nodiscard]] inline ExperimentConfig load_config(const std::string& path) {
  return config_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// Trace files (CSV + meta JSON)
// ---------------------------------------------------------------------------

inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceCsvHeader << '\n';
  for (Step n = 1; n <= trace.steps(); ++n) {
    const RowStats& r = trace.row(n);
    const VertexRecord& rec = trace.record(n);
    out << n << ',' << r.L << ',' << r.F << ',' << r.W << ',' << r.delta
        << ',' << r.completions << ',' << rec.theta << ',' << rec.eps << ',';
    for (std::size_t i = 0; i < rec.parents.size(); ++i) {
      if (i) out << ';';
      out << rec.parents[i];
    }
    out << '\n';
  }
}

// A trace as stored on disk: the model, the seed, and per-arrival decisions
// plus the tip statistics claimed for each row. Nothing here is executed
// yet; `materialize` re-runs the decisions and `replay_diff` compares.
struct StoredTrace {
  ModelParams params;
  std::uint64_t seed = 0;
  std::vector<RowStats> rows;
  std::vector<ArrivalDecision> decisions;  // decisions[i] drives arrival i+1

  friend bool operator==(const StoredTrace&, const StoredTrace&) = default;
};

[[nodiscard]] inline StoredTrace to_stored(const Trace& trace) {
  StoredTrace out;
  out.params = trace.params;
  out.seed = trace.seed;
  out.rows = trace.rows;
  out.decisions.reserve(trace.steps());
  for (Step n = 1; n <= trace.steps(); ++n) {
    const VertexRecord& rec = trace.record(n);
    out.decisions.push_back(
        ArrivalDecision{rec.theta, rec.eps, rec.parents});
  }
  return out;
}

namespace detail_csv {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::uint64_t parse_uint(std::string_view s, const std::string& where) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw SchemaError(where + ": expected an unsigned integer, got '" +
                      std::string(s) + "'");
  return v;
}

}  // namespace detail_csv

// Parses rows and decisions from a trace CSV stream; params and seed come
// from the accompanying meta document. `where` names the file in errors.
inline void read_trace_csv(std::istream& in, const std::string& where,
                           StoredTrace& out) {
  namespace dc = detail_csv;
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError(where + ":1: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceCsvHeader)
    throw SchemaError(where + ":1: header must be '" +
                      std::string(kTraceCsvHeader) + "'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string at = where + ":" + std::to_string(lineno);
    const std::vector<std::string_view> f = dc::split(line, ',');
    if (f.size() != 9)
      throw SchemaError(at + ": expected 9 fields, got " +
                        std::to_string(f.size()));
    const std::uint64_t n = dc::parse_uint(f[0], at + ".n");
    if (n != out.rows.size() + 1)
      throw SchemaError(at + ".n: expected row " +
                        std::to_string(out.rows.size() + 1));
    RowStats r;
    r.L = static_cast<std::uint32_t>(dc::parse_uint(f[1], at + ".L"));
    r.F = static_cast<std::uint32_t>(dc::parse_uint(f[2], at + ".F"));
    r.W = static_cast<std::uint32_t>(dc::parse_uint(f[3], at + ".W"));
    r.delta = static_cast<std::uint16_t>(dc::parse_uint(f[4], at + ".delta"));
    r.completions =
        static_cast<std::uint16_t>(dc::parse_uint(f[5], at + ".completions"));
    ArrivalDecision d;
    d.theta = static_cast<int>(dc::parse_uint(f[6], at + ".theta"));
    d.eps = static_cast<int>(dc::parse_uint(f[7], at + ".eps"));
    for (std::string_view piece : dc::split(f[8], ';'))
      d.parents.push_back(
          static_cast<VertexId>(dc::parse_uint(piece, at + ".parents")));
    out.rows.push_back(r);
    out.decisions.push_back(std::move(d));
  }
}

[[nodiscard]] inline std::string trace_basename(std::uint64_t seed) {
  return "trace_seed" + std::to_string(seed);
}

struct TraceFiles {
  std::string csv_path;
  std::string meta_path;
};

inline TraceFiles write_trace(const std::string& dir, const Trace& trace) {
  namespace fs = std::filesystem;
  const std::string base = trace_basename(trace.seed);
  TraceFiles files;
  files.csv_path = (fs::path(dir) / (base + ".csv")).string();
  files.meta_path = (fs::path(dir) / (base + ".meta.json")).string();

  std::ofstream csv(files.csv_path);
  if (!csv) throw SchemaError(files.csv_path + ": cannot open for writing");
  write_trace_csv(csv, trace);
  csv.flush();
  if (!csv) throw SchemaError(files.csv_path + ": write failed");

  Json meta;
  meta["schema"] = kSchemaTag;
  meta["kind"] = "trace";
  meta["seed"] = trace.seed;
  meta["steps"] = trace.steps();
  meta["csv"] = base + ".csv";
  meta["model"] = params_to_json(trace.params);
  write_json_file(files.meta_path, meta);
  return files;
}

[[nodiscard]] inline StoredTrace read_trace(const std::string& meta_path) {
  namespace dj = detail_json;
  namespace fs = std::filesystem;
  const Json meta = read_json_file(meta_path);
  dj::check_envelope(meta, "trace", meta_path);
  StoredTrace out;
  try {
    out.seed = dj::uint_field(meta, "seed", meta_path);
    out.params = params_from_json(
        dj::require(meta, "model", meta_path), meta_path + ".model");
    const std::string csv_name = dj::string_field(meta, "csv", meta_path);
    const fs::path csv_path = fs::path(meta_path).parent_path() / csv_name;
    std::ifstream csv(csv_path);
    if (!csv)
      throw SchemaError(csv_path.string() + ": cannot open for reading");
    read_trace_csv(csv, csv_path.string(), out);
    const std::uint64_t steps = dj::uint_field(meta, "steps", meta_path);
    if (steps != out.rows.size())
      throw SchemaError(meta_path + ".steps: claims " + std::to_string(steps) +
                        " rows, CSV has " + std::to_string(out.rows.size()));
  } catch (const ConfigError& e) {
    dj::rethrow_as_schema(e);
  }
  return out;
}

// Re-executes the stored decisions from genesis. Throws InfeasibleOverride
// (a ConstructionError) if any stored decision is not a legal step.
[[nodiscard]] inline Trace materialize(const StoredTrace& stored) {
  Overrides overrides;
  for (std::size_t i = 0; i < stored.decisions.size(); ++i)
    overrides.emplace(static_cast<Step>(i + 1), stored.decisions[i]);
  return run(stored.params, stored.seed,
             static_cast<Step>(stored.decisions.size()), overrides);
}

// Rows whose recomputed statistics differ from the stored ones (empty for
// any honestly produced file).
[[nodiscard]] inline std::vector<Step> replay_diff(const StoredTrace& stored) {
  const Trace fresh = materialize(stored);
  std::vector<Step> bad;
  for (Step n = 1; n <= fresh.steps(); ++n)
    if (fresh.row(n) != stored.rows[n - 1]) bad.push_back(n);
  return bad;
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

[[nodiscard]] inline Json thresholds_to_json(const Thresholds& t) {
  Json j;
  j["tip_threshold"] = t.b;
  j["tip_threshold_floor"] = t.b_min;
  j["drift_pivot"] = t.a_star;
  j["coupling_gap_cap"] = t.delta_yf;
  j["ramp_end"] = t.kappa_a;
  j["reserve_end"] = t.kappa_b;
  j["construction_end"] = t.kappa_c;
  j["success_probability_log10"] = t.rho_log10;
  return j;
}

[[nodiscard]] inline Thresholds thresholds_from_json(const Json& j,
                                                     const std::string& where) {
  namespace dj = detail_json;
  Thresholds t;
  t.b = static_cast<int>(dj::int_field(j, "tip_threshold", where));
  t.b_min = static_cast<int>(dj::int_field(j, "tip_threshold_floor", where));
  t.a_star = static_cast<int>(dj::int_field(j, "drift_pivot", where));
  t.delta_yf = static_cast<int>(dj::int_field(j, "coupling_gap_cap", where));
  t.kappa_a = static_cast<int>(dj::int_field(j, "ramp_end", where));
  t.kappa_b = static_cast<int>(dj::int_field(j, "reserve_end", where));
  t.kappa_c = dj::int_field(j, "construction_end", where);
  t.rho_log10 = dj::double_field(j, "success_probability_log10", where);
  return t;
}

[[nodiscard]] inline Json plan_to_json(const BottleneckPlan& plan) {
  Json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "plan";
  j["seed"] = plan.seed;
  j["anchor"] = plan.anchor;
  j["thresholds"] = thresholds_to_json(plan.thresholds);
  j["reserved_free"] = plan.fb_set;
  j["mesh_start"] = plan.frame.mesh_start;
  j["column_size"] = plan.frame.column_size;
  j["first_column"] = plan.frame.first_column;
  Json overrides = Json::array();
  for (const auto& [n, d] : plan.overrides) {
    Json o;
    o["n"] = n;
    o["theta"] = d.theta;
    o["eps"] = d.eps;
    o["parents"] = d.parents;
    overrides.push_back(std::move(o));
  }
  j["overrides"] = std::move(overrides);
  return j;
}

[[nodiscard]] inline BottleneckPlan plan_from_json(const Json& j,
                                                   const std::string& where) {
  namespace dj = detail_json;
  dj::check_envelope(j, "plan", where);
  BottleneckPlan plan;
  try {
    plan.seed = dj::uint_field(j, "seed", where);
    plan.anchor = static_cast<Step>(dj::uint_field(j, "anchor", where));
    plan.thresholds = thresholds_from_json(
        dj::require(j, "thresholds", where), where + ".thresholds");
    plan.fb_set = dj::int_array<VertexId>(j, "reserved_free", where);
    plan.frame.mesh_start =
        static_cast<Step>(dj::uint_field(j, "mesh_start", where));
    plan.frame.column_size =
        static_cast<std::uint32_t>(dj::uint_field(j, "column_size", where));
    plan.frame.first_column = dj::int_array<VertexId>(j, "first_column", where);
    const Json& overrides = dj::require(j, "overrides", where);
    if (!overrides.is_array())
      throw SchemaError(where + ".overrides: expected an array");
    for (const Json& o : overrides) {
      const std::string at = where + ".overrides[" +
                             std::to_string(plan.overrides.size()) + "]";
      ArrivalDecision d;
      const Step n = static_cast<Step>(dj::uint_field(o, "n", at));
      d.theta = static_cast<int>(dj::int_field(o, "theta", at));
      d.eps = static_cast<int>(dj::int_field(o, "eps", at));
      d.parents = dj::int_array<VertexId>(o, "parents", at);
      if (!plan.overrides.emplace(n, std::move(d)).second)
        throw SchemaError(at + ".n: duplicate arrival " + std::to_string(n));
    }
  } catch (const ConfigError& e) {
    dj::rethrow_as_schema(e);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

[[nodiscard]] inline Json report_to_json(const BottleneckReport& r,
                                         const BottleneckPlan& plan) {
  Json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "report";
  j["anchor"] = plan.anchor;
  j["mesh_start"] = plan.frame.mesh_start;
  j["column_size"] = plan.frame.column_size;
  j["tip_threshold"] = plan.thresholds.b;
  j["construction_end"] = plan.thresholds.kappa_c;
  j["success_probability_log10"] = plan.thresholds.rho_log10;
  j["success_probability"] = rho_scientific(plan.thresholds.rho_log10);
  Json checks;
  checks["anchor_precondition"] = r.anchor_precondition;
  checks["plan_realized"] = r.plan_realized;
  checks["frame_consistent"] = r.frame_consistent;
  checks["reserved_stayed_free"] = r.reserved_stayed_free;
  checks["past_covered"] = r.past_covered;
  checks["tail_reaches_mesh"] = r.tail_reaches_mesh;
  checks["tail_covers_past"] = r.tail_covers_past;
  checks["anchor_tips_retired"] = r.anchor_tips_retired;
  checks["late_tips_beyond_gate"] = r.late_tips_beyond_gate;
  j["checks"] = std::move(checks);
  j["ok"] = r.ok();
  j["failure"] = r.failure;
  return j;
}

[[nodiscard]] inline BottleneckReport report_from_json(
    const Json& j, const std::string& where) {
  namespace dj = detail_json;
  dj::check_envelope(j, "report", where);
  BottleneckReport r;
  try {
    const Json& checks = dj::require(j, "checks", where);
    const std::string at = where + ".checks";
    r.anchor_precondition = dj::bool_field(checks, "anchor_precondition", at);
    r.plan_realized = dj::bool_field(checks, "plan_realized", at);
    r.frame_consistent = dj::bool_field(checks, "frame_consistent", at);
    r.reserved_stayed_free = dj::bool_field(checks, "reserved_stayed_free", at);
    r.past_covered = dj::bool_field(checks, "past_covered", at);
    r.tail_reaches_mesh = dj::bool_field(checks, "tail_reaches_mesh", at);
    r.tail_covers_past = dj::bool_field(checks, "tail_covers_past", at);
    r.anchor_tips_retired = dj::bool_field(checks, "anchor_tips_retired", at);
    r.late_tips_beyond_gate =
        dj::bool_field(checks, "late_tips_beyond_gate", at);
    r.failure = dj::string_field(j, "failure", where);
  } catch (const ConfigError& e) {
    dj::rethrow_as_schema(e);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Graph fixtures
// ---------------------------------------------------------------------------

// A static ledger snapshot: records plus the step it was taken at. Used for
// golden inputs whose shape matters more than how they grew.
struct GraphFixture {
  ModelParams params;
  Step now = 0;
  std::vector<VertexRecord> records;

  friend bool operator==(const GraphFixture&, const GraphFixture&) = default;
};

[[nodiscard]] inline Json graph_to_json(const GraphFixture& g) {
  Json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "graph";
  j["now"] = g.now;
  j["model"] = params_to_json(g.params);
  Json vertices = Json::array();
  for (const VertexRecord& r : g.records) {
    Json v;
    v["id"] = r.id;
    v["theta"] = r.theta;
    v["eps"] = r.eps;
    v["parents"] = r.parents;
    vertices.push_back(std::move(v));
  }
  j["vertices"] = std::move(vertices);
  return j;
}

[[nodiscard]] inline GraphFixture graph_from_json(const Json& j,
                                                  const std::string& where) {
  namespace dj = detail_json;
  dj::check_envelope(j, "graph", where);
  GraphFixture g;
  try {
    g.now = static_cast<Step>(dj::uint_field(j, "now", where));
    g.params = params_from_json(dj::require(j, "model", where),
                                where + ".model");
    const Json& vertices = dj::require(j, "vertices", where);
    if (!vertices.is_array())
      throw SchemaError(where + ".vertices: expected an array");
    for (const Json& v : vertices) {
      const std::string at =
          where + ".vertices[" + std::to_string(g.records.size()) + "]";
      VertexRecord r;
      r.id = static_cast<VertexId>(dj::uint_field(v, "id", at));
      r.theta = static_cast<int>(dj::int_field(v, "theta", at));
      r.eps = static_cast<int>(dj::int_field(v, "eps", at));
      r.parents = dj::int_array<VertexId>(v, "parents", at);
      if (r.id != g.records.size())
        throw SchemaError(at + ".id: expected " +
                          std::to_string(g.records.size()));
      if (r.id == kGenesis) {
        if (r.theta != 0 || !r.parents.empty())
          throw SchemaError(at + ": the genesis vertex has no work or parents");
        r.completion = 0;
      } else {
        if (r.theta < 1) throw SchemaError(at + ".theta: expected >= 1");
        if (r.parents.empty())
          throw SchemaError(at + ".parents: expected at least one");
        for (VertexId p : r.parents)
          if (p >= r.id)
            throw SchemaError(at + ".parents: " + std::to_string(p) +
                              " does not precede " + std::to_string(r.id));
        r.completion = r.id + static_cast<Step>(r.theta);
      }
      g.records.push_back(std::move(r));
    }
    if (g.records.empty())
      throw SchemaError(where + ".vertices: expected at least the genesis");
    if (g.now + 1 < g.records.size())
      throw SchemaError(where + ".now: snapshot predates its own vertices");
  } catch (const ConfigError& e) {
    dj::rethrow_as_schema(e);
  }
  return g;
}

[[nodiscard]] inline GraphFixture read_graph(const std::string& path) {
  return graph_from_json(read_json_file(path), path);
}

}  // namespace tangleproof

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "tangleproof/analysis.hpp"
#include "tangleproof/bottleneck.hpp"
#include "tangleproof/engine.hpp"
#include "tangleproof/errors.hpp"
#include "tangleproof/model.hpp"
#include "tangleproof/serialize.hpp"

namespace tangleproof::cli {

// Exit codes: 0 success, 1 config, 2 I/O or schema, 3 no anchor,
// 4 construction or verification failure.

namespace detail_cli {

// Flag values; sentinels mean "not given, keep the config file's value".
struct Flags {
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::int64_t steps = -1;
  std::string out_dir;
  int b = 0;
  int k_parents = 0;
  int jobs = 0;
  std::int64_t anchor = -1;
  std::int64_t post_steps = -1;
};

[[nodiscard]] inline ExperimentConfig resolve_config(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = load_config(f.config_path);
  if (!f.seeds.empty()) cfg.seeds = f.seeds;
  if (f.steps >= 0) cfg.steps = static_cast<Step>(f.steps);
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (f.b != 0) cfg.params.b = f.b;
  if (f.k_parents != 0) {
    cfg.params.k_support = {f.k_parents};
    cfg.params.k_probs = {1.0};
  }
  if (f.jobs > 0) cfg.parallelism = f.jobs;
  if (f.anchor >= 0) cfg.anchor = static_cast<Step>(f.anchor);
  if (f.post_steps >= 0) cfg.post_steps = static_cast<Step>(f.post_steps);
  cfg.params.validate();
  return cfg;
}

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw SchemaError(dir + ": cannot create output directory");
}

// Hit spacing for recurrence statistics: the construction length when the
// threshold admits one, else adjacent hits count separately.
[[nodiscard]] inline Step recurrence_spacing(const ModelParams& params) {
  try {
    return static_cast<Step>(compute_thresholds(params).kappa_c);
  } catch (const ConfigError&) {
    return 1;
  }
}

[[nodiscard]] inline Json recurrence_to_json(const RecurrenceStats& rec,
                                             int threshold, Step spacing) {
  Json j;
  j["threshold"] = threshold;
  j["hits"] = rec.hits;
  j["first"] = rec.first_hit;
  j["last"] = rec.last_hit;
  j["spacing"] = spacing;
  j["spaced"] = rec.spaced_hits;
  j["excursions_started"] = rec.excursions_started;
  j["excursions_completed"] = rec.excursions_completed;
  j["longest_excursion"] = rec.longest_excursion;
  j["open_at_end"] = rec.open_at_end;
  return j;
}

// Largest per-step violation of F(n) - F(n-1) = completions(n) - delta(n),
// recounted from the rows. Zero on every honestly produced trace.
[[nodiscard]] inline std::int64_t balance_residual_max(const Trace& t) {
  std::int64_t worst = 0;
  std::uint32_t prev_f = 1;  // the genesis state has exactly one free tip
  for (Step n = 1; n <= t.steps(); ++n) {
    const RowStats& r = t.row(n);
    const std::int64_t change =
        static_cast<std::int64_t>(r.F) - static_cast<std::int64_t>(prev_f);
    const std::int64_t expected = static_cast<std::int64_t>(r.completions) -
                                  static_cast<std::int64_t>(r.delta);
    worst = std::max<std::int64_t>(worst, std::llabs(change - expected));
    prev_f = r.F;
  }
  return worst;
}

[[nodiscard]] inline Json column_summary(const Trace& t,
                                         std::uint32_t RowStats::*field) {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
  double sum = 0.0;
  for (Step n = 1; n <= t.steps(); ++n) {
    const std::uint32_t x = t.row(n).*field;
    if (n == 1 || x < lo) lo = x;
    if (n == 1 || x > hi) hi = x;
    sum += x;
  }
  const double mean = t.steps() == 0 ? 0.0 : sum / t.steps();
  return Json{{"min", lo}, {"max", hi}, {"mean", mean}};
}

[[nodiscard]] inline Json replica_summary(const Trace& t) {
  Json j;
  j["seed"] = t.seed;
  j["csv"] = trace_basename(t.seed) + ".csv";
  j["tips"] = column_summary(t, &RowStats::L);
  j["free"] = column_summary(t, &RowStats::F);
  j["pending"] = column_summary(t, &RowStats::W);
  const Step spacing = recurrence_spacing(t.params);
  j["threshold_hits"] = recurrence_to_json(
      tip_recurrence(t, t.params.b, spacing), t.params.b, spacing);
  j["balance_residual_max"] = balance_residual_max(t);
  return j;
}

// Worker cap: the config's parallelism, bounded by the replica count and by
// TANGLEPROOF_THREADS when that is set to a positive integer.
[[nodiscard]] inline std::size_t worker_count(const ExperimentConfig& cfg,
                                              std::size_t replicas) {
  std::size_t n = std::max(1, cfg.parallelism);
  if (const char* env = std::getenv("TANGLEPROOF_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::min(n, std::max<std::size_t>(1, replicas));
}

}  // namespace detail_cli

// ---------------------------------------------------------------------------
// run: sample one trace per seed, write CSV + meta, then a summary document
// ---------------------------------------------------------------------------

[[nodiscard]] inline int cmd_run(const ExperimentConfig& cfg) {
  namespace dc = detail_cli;
  if (cfg.steps == 0) throw ConfigError("run: steps must be positive");
  dc::ensure_directory(cfg.out_dir);

  const std::size_t replicas = cfg.seeds.size();
  std::vector<Json> rows(replicas);
  std::vector<std::string> lines(replicas);
  std::int64_t worst_residual = 0;
  std::mutex mu;

  const auto one = [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const Trace t = run(cfg.params, seed, cfg.steps);
    (void)write_trace(cfg.out_dir, t);
    Json r = dc::replica_summary(t);
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "seed %llu: %u steps, tips min/mean/max = %u/%.2f/%u, "
                  "residual %lld",
                  static_cast<unsigned long long>(seed), cfg.steps,
                  r["tips"]["min"].get<std::uint32_t>(),
                  r["tips"]["mean"].get<double>(),
                  r["tips"]["max"].get<std::uint32_t>(),
                  static_cast<long long>(
                      r["balance_residual_max"].get<std::int64_t>()));
    const std::scoped_lock lock(mu);
    worst_residual =
        std::max(worst_residual, r["balance_residual_max"].get<std::int64_t>());
    rows[i] = std::move(r);
    lines[i] = buf;
  };

  const std::size_t workers = dc::worker_count(cfg, replicas);
  if (workers <= 1) {
    for (std::size_t i = 0; i < replicas; ++i) one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < replicas; i = next++) {
          try {
            one(i);
          } catch (...) {
            const std::scoped_lock lock(mu);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  Json summary;
  summary["schema"] = kSchemaTag;
  summary["kind"] = "summary";
  summary["steps"] = cfg.steps;
  summary["tip_threshold"] = cfg.params.b;
  summary["balance_residual_max"] = worst_residual;
  summary["replicas"] = Json::array();
  for (Json& r : rows) summary["replicas"].push_back(std::move(r));

  const std::string summary_path =
      (std::filesystem::path(cfg.out_dir) / "summary.json").string();
  write_json_file(summary_path, summary);

  for (const std::string& line : lines) std::cout << line << "\n";
  std::cout << "wrote " << summary_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// force: drive a full bottleneck construction, verify it, write all artifacts
// ---------------------------------------------------------------------------

[[nodiscard]] inline int cmd_force(const ExperimentConfig& cfg) {
  namespace dc = detail_cli;
  dc::ensure_directory(cfg.out_dir);
  const std::uint64_t seed = cfg.seeds.front();

  ForceOptions opts;
  opts.anchor = cfg.anchor;
  opts.search_limit = cfg.steps;
  opts.post_steps = cfg.post_steps;
  const ForceResult result = force_bottleneck(cfg.params, seed, opts);
  const BottleneckReport report = verify_bottleneck(result.trace, result.plan);

  const TraceFiles files = write_trace(cfg.out_dir, result.trace);
  const std::filesystem::path dir(cfg.out_dir);
  const std::string tag = std::to_string(seed);
  const std::string plan_path = (dir / ("plan_seed" + tag + ".json")).string();
  const std::string report_path =
      (dir / ("report_seed" + tag + ".json")).string();
  write_json_file(plan_path, plan_to_json(result.plan));
  write_json_file(report_path, report_to_json(report, result.plan));

  const Thresholds& thr = result.plan.thresholds;
  char buf[224];
  std::snprintf(buf, sizeof buf,
                "anchor %u, mesh starts at row %u, column size %u, "
                "construction ends at row %lld",
                result.plan.anchor, result.plan.frame.mesh_start,
                static_cast<unsigned>(result.plan.frame.column_size),
                static_cast<long long>(result.plan.anchor) + thr.kappa_c);
  std::cout << buf << "\n";
  std::cout << "success probability per attempt ~ "
            << rho_scientific(thr.rho_log10) << "\n";
  if (report.ok())
    std::cout << "report: all checks passed\n";
  else
    std::cout << "report: FAILED (" << report.failure << ")\n";
  std::cout << "wrote " << files.csv_path << "\n";
  std::cout << "wrote " << files.meta_path << "\n";
  std::cout << "wrote " << plan_path << "\n";
  std::cout << "wrote " << report_path << "\n";
  return report.ok() ? 0 : 4;
}

// ---------------------------------------------------------------------------
// verify: re-run the checker on stored trace + plan files
// ---------------------------------------------------------------------------

[[nodiscard]] inline int cmd_verify(const std::string& trace_path,
                                    const std::string& plan_path,
                                    const std::string& out_path) {
  const StoredTrace stored = read_trace(trace_path);
  const Trace trace = materialize(stored);
  const BottleneckPlan plan =
      plan_from_json(read_json_file(plan_path), plan_path);
  const BottleneckReport report = verify_bottleneck(trace, plan);

  const Json j = report_to_json(report, plan);
  if (!out_path.empty()) {
    write_json_file(out_path, j);
    std::cout << "wrote " << out_path << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
  if (report.ok())
    std::cout << "verified: ok\n";
  else
    std::cout << "verified: FAILED (" << report.failure << ")\n";
  return report.ok() ? 0 : 4;
}

// ---------------------------------------------------------------------------
// analyze: trace-level metrics over a horizon grid
// ---------------------------------------------------------------------------

[[nodiscard]] inline int cmd_analyze(const std::string& trace_path,
                                     const std::string& out_path, int grid) {
  namespace dc = detail_cli;
  if (grid < 1) throw ConfigError("analyze: grid must be positive");
  const StoredTrace stored = read_trace(trace_path);
  const Trace trace = materialize(stored);
  const GraphView gv(trace.state.records());
  const Step steps = trace.steps();

  std::vector<Step> marks;  // grid rows, ascending, deduplicated
  for (int i = 1; i <= grid; ++i) {
    const Step m = static_cast<Step>(
        static_cast<std::uint64_t>(steps) * i / grid);
    if (m >= 1 && (marks.empty() || m > marks.back())) marks.push_back(m);
  }

  Json metrics;
  metrics["schema"] = kSchemaTag;
  metrics["kind"] = "metrics";
  metrics["seed"] = trace.seed;
  metrics["steps"] = steps;

  // Drift-compensated tip gap over consecutive grid windows.
  const int cap = 2 * (trace.params.h_max() - trace.params.h_min());
  int worst_gap = 0;
  Json windows = Json::array();
  Step prev = 1;
  for (const Step m : marks) {
    if (m <= prev) continue;
    const MartingaleGap g = martingale_gap(trace, prev, m);
    windows.push_back(Json{{"anchor", g.anchor},
                           {"end", g.end},
                           {"max_abs_gap", g.max_abs_gap},
                           {"argmax", g.argmax}});
    worst_gap = std::max(worst_gap, g.max_abs_gap);
    prev = m;
  }
  metrics["tip_gap"] = Json{{"cap", cap},
                            {"max_abs_gap", worst_gap},
                            {"within", worst_gap <= cap},
                            {"windows", windows}};

  const Step spacing = dc::recurrence_spacing(trace.params);
  metrics["threshold_hits"] = dc::recurrence_to_json(
      tip_recurrence(trace, trace.params.b, spacing), trace.params.b, spacing);

  Json confirmation = Json::array();
  for (const Step m : marks) {
    const std::set<VertexId> confirmed = confirmed_set(gv, m, trace.params);
    std::size_t solid = 0;
    for (VertexId v = 0; v < static_cast<VertexId>(gv.size()); ++v)
      if (gv.solid_at(v, m)) ++solid;
    confirmation.push_back(
        Json{{"horizon", m},
             {"confirmed", confirmed.size()},
             {"solid", solid},
             {"fraction", solid == 0
                              ? 0.0
                              : static_cast<double>(confirmed.size()) / solid}});
  }
  metrics["confirmation"] = confirmation;

  Json divergence = Json::array();
  for (std::size_t i = 1; i < marks.size(); ++i)
    divergence.push_back(Json{{"from", marks[i - 1]},
                              {"to", marks[i]},
                              {"distance",
                               d_star(gv, marks[i - 1], gv, marks[i])}});
  metrics["divergence"] = divergence;
  metrics["stabilization_radius"] = stabilization_radius(gv, steps);

  if (!out_path.empty()) {
    write_json_file(out_path, metrics);
    std::cout << "wrote " << out_path << "\n";
  } else {
    std::cout << metrics.dump(2) << "\n";
  }
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "analyzed seed %llu over %u rows: tip gap %d (cap %d)",
                static_cast<unsigned long long>(trace.seed), steps, worst_gap,
                cap);
  std::cout << buf << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// replay: re-execute stored decisions and diff the recomputed statistics
// ---------------------------------------------------------------------------

[[nodiscard]] inline int cmd_replay(const std::string& trace_path) {
  const StoredTrace stored = read_trace(trace_path);
  const std::vector<Step> bad = replay_diff(stored);
  if (bad.empty()) {
    std::cout << "replay clean: " << stored.rows.size() << " rows match\n";
    return 0;
  }
  std::cout << "replay mismatch at " << bad.size() << " rows:";
  const std::size_t shown = std::min<std::size_t>(bad.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) std::cout << " " << bad[i];
  if (bad.size() > shown) std::cout << " ...";
  std::cout << "\n";
  return 4;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

[[nodiscard]] inline int dispatch(int argc, char** argv) {
  namespace dc = detail_cli;
  CLI::App app{"discrete-time ledger DAG simulator and verifier"};
  app.require_subcommand(1);

  dc::Flags flags;
  std::string trace_path;
  std::string plan_path;
  std::string out_path;
  int grid = 4;
  int rc = 0;

  const auto add_experiment_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "experiment config file");
    cmd->add_option("--seed", flags.seeds, "replica seed (repeatable)");
    cmd->add_option("--steps", flags.steps, "arrivals per replica")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--b", flags.b, "tip threshold override");
    cmd->add_option("--k-parents", flags.k_parents,
                    "fix the parent count to one value");
  };

  CLI::App* c_run =
      app.add_subcommand("run", "sample traces and write CSV, meta, summary");
  add_experiment_flags(c_run);
  c_run->add_option("--jobs", flags.jobs, "replica worker threads");
  c_run->callback([&] { rc = cmd_run(dc::resolve_config(flags)); });

  CLI::App* c_force = app.add_subcommand(
      "force", "force a bottleneck construction and machine-check it");
  add_experiment_flags(c_force);
  c_force->add_option("--anchor", flags.anchor,
                      "explicit first forced arrival (default: search)");
  c_force->add_option("--post", flags.post_steps,
                      "sampled steps appended after the construction");
  c_force->callback([&] { rc = cmd_force(dc::resolve_config(flags)); });

  CLI::App* c_verify = app.add_subcommand(
      "verify", "check a stored trace against a construction plan");
  c_verify->add_option("--trace", trace_path, "trace meta file")->required();
  c_verify->add_option("--plan", plan_path, "plan file")->required();
  c_verify->add_option("--out", out_path, "report destination");
  c_verify->callback([&] { rc = cmd_verify(trace_path, plan_path, out_path); });

  CLI::App* c_analyze =
      app.add_subcommand("analyze", "metrics for a stored trace");
  c_analyze->add_option("--trace", trace_path, "trace meta file")->required();
  c_analyze->add_option("--out", out_path, "metrics destination");
  c_analyze->add_option("--grid", grid, "number of horizon grid rows");
  c_analyze->callback([&] { rc = cmd_analyze(trace_path, out_path, grid); });

  CLI::App* c_replay = app.add_subcommand(
      "replay", "re-execute stored decisions and diff the statistics");
  c_replay->add_option("--trace", trace_path, "trace meta file")->required();
  c_replay->callback([&] { rc = cmd_replay(trace_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const AnchorError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConstructionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

}  // namespace tangleproof::cli

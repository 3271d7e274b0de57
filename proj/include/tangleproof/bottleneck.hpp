#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "tangleproof/analysis.hpp"
#include "tangleproof/engine.hpp"
#include "tangleproof/model.hpp"

namespace tangleproof {

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

// Constants governing the forced three-phase construction and the tip-count
// analysis behind it, all integer formulas in the model parameters.
struct Thresholds {
  int b = 0;        // tip threshold the anchor search uses
  int b_min = 0;    // smallest admissible b (exclusive bound)
  int a_star = 0;   // free-tip drift pivot from the recurrence analysis
  int delta_yf = 0; // guaranteed cap on |F - Y| for the coupled process
  int kappa_a = 0;  // ramp phase length
  int kappa_b = 0;  // ramp plus reservation phase length
  std::int64_t kappa_c = 0;  // full construction length
  double rho_log10 = 0.0;    // log10 lower bound on the forcing probability

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

[[nodiscard]] inline Thresholds compute_thresholds(const ModelParams& params) {
  params.validate();
  const int h = params.h_max();
  const int h1 = params.h_min();
  const int e_min = params.eps_min();
  const int e_max = params.eps_max();
  const int m = params.duration_count();

  if (h < 2)
    throw ConfigError(
        "durations: the ramp-length analysis needs a duration of at least 2");

  Thresholds t;
  t.b = params.b;
  t.b_min = params.b_floor();
  if (params.b <= t.b_min)
    throw ConfigError("b: must exceed " + std::to_string(t.b_min) +
                      " for these parameters, got " + std::to_string(params.b));
  t.a_star = 2 * h + 3 * m * e_max + 2;
  t.delta_yf = 2 * (h - h1);
  // Smallest integer strictly above 1 + max{2h, 3h(h+e_min)/(h-1)}.
  t.kappa_a = std::max(2 * h, (3 * h * (h + e_min)) / (h - 1)) + 2;
  t.kappa_b = t.kappa_a + e_min + 1;
  const std::int64_t col_cap = static_cast<std::int64_t>(params.b) +
                               static_cast<std::int64_t>(m) * t.kappa_b + h;
  t.kappa_c = t.kappa_b + 2 * col_cap * col_cap + h + e_max + 1;
  if (t.kappa_c > (std::int64_t{1} << 31) - 1)
    throw ConfigError("b: construction length overflows a practical run");
  const double p_min = *std::min_element(params.theta_probs.begin(),
                                         params.theta_probs.end()) *
                       *std::min_element(params.eps_probs.begin(),
                                         params.eps_probs.end());
  t.rho_log10 =
      static_cast<double>(t.kappa_c) *
      (std::log10(p_min) -
       std::log10(static_cast<double>(params.b) +
                  2.0 * static_cast<double>(t.kappa_c) * m));
  return t;
}

// Scientific-notation rendering of 10^log10_rho. The value itself is far
// below the smallest subnormal double, so it only exists in log form.
[[nodiscard]] inline std::string rho_scientific(double rho_log10) {
  double exp10 = std::floor(rho_log10);
  double mant = std::pow(10.0, rho_log10 - exp10);
  if (mant >= 9.995) {
    mant /= 10.0;
    exp10 += 1.0;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2fe%+d", mant,
                static_cast<int>(exp10));
  return buf;
}

// ---------------------------------------------------------------------------
// Mesh labels
// ---------------------------------------------------------------------------

// Coordinates inside the interchange mesh: column 1 is the portal (the free
// tips and in-flight vertices when the mesh begins), larger columns are the
// forced arrivals, column_size rows each.
struct Label {
  std::uint32_t column = 0;
  std::uint32_t row = 0;

  friend bool operator==(const Label&, const Label&) = default;
};

struct LabelFrame {
  Step mesh_start = 0;                 // arrival id of cell (column 2, row 1)
  std::uint32_t column_size = 0;
  std::vector<VertexId> first_column;  // sorted portal vertices

  friend bool operator==(const LabelFrame&, const LabelFrame&) = default;
};

[[nodiscard]] inline VertexId mesh_vertex(const LabelFrame& frame,
                                          Label label) {
  if (label.row < 1 || label.row > frame.column_size || label.column < 1)
    throw LogicBug("mesh_vertex: label (" + std::to_string(label.column) +
                   "," + std::to_string(label.row) + ") outside the mesh");
  if (label.column == 1) return frame.first_column[label.row - 1];
  return frame.mesh_start - 1 +
         (label.column - 2) * frame.column_size + label.row;
}

[[nodiscard]] inline std::optional<Label> mesh_label(const LabelFrame& frame,
                                                     VertexId v) {
  const auto it = std::lower_bound(frame.first_column.begin(),
                                   frame.first_column.end(), v);
  if (it != frame.first_column.end() && *it == v)
    return Label{1, static_cast<std::uint32_t>(it - frame.first_column.begin()) + 1};
  if (v < frame.mesh_start) return std::nullopt;
  const std::uint32_t offset = v - frame.mesh_start;
  return Label{2 + offset / frame.column_size,
               offset % frame.column_size + 1};
}

// Designated parents of a mesh cell: the previous column's neighbors, with
// clamping at the mesh's edge rows.
[[nodiscard]] inline std::pair<Label, Label> mesh_parent_labels(
    Label label, std::uint32_t column_size) {
  if (label.column < 2)
    throw LogicBug("mesh_parent_labels: the portal column has free parents");
  const std::uint32_t k = label.row;
  return {Label{label.column - 1, std::max(1u, k - 1)},
          Label{label.column - 1, std::min(k + 1, column_size)}};
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

struct BottleneckPlan {
  std::uint64_t seed = 0;
  VertexId anchor = 0;  // id of the first forced arrival; the tip-count
                        // precondition is on the state one step earlier
  Thresholds thresholds;
  std::vector<VertexId> fb_set;  // free tips reserved untouched in phase two
  LabelFrame frame;
  Overrides overrides;  // every arrival in [anchor, anchor + kappa_c]

  friend bool operator==(const BottleneckPlan&,
                         const BottleneckPlan&) = default;
};

namespace detail {

// All forced arrivals share the slowest duration and the shortest lookback;
// parent draws repeat the designated pair (or single vertex) to fill the
// forced parent count.
inline ArrivalDecision forced_decision(const ModelParams& params, VertexId x,
                                       VertexId y) {
  ArrivalDecision d;
  d.theta = params.h_max();
  d.eps = params.eps_min();
  const int k = params.k_max();
  d.parents.assign(static_cast<std::size_t>(k), x);
  if (k >= 2) d.parents[1] = y;
  return d;
}

inline void force_arrival(TangleState& s, const ArrivalDecision& d,
                          Overrides& out) {
  const Step v = s.now() + 1;
  out.emplace(v, d);
  s = apply_step(std::move(s), d);
}

}  // namespace detail

// Ramp arrivals: each re-selects the lowest already-claimed tip visible
// (falling back to the lowest tip), keeping free tips untouched so
// completions pump the free-tip count up by one per step almost always.
// Phase one runs this for kappa_a arrivals; tests reuse it to manufacture
// deterministic tip-count excursions.
inline void plan_ramp(TangleState& s, int arrivals, Overrides& out) {
  const ModelParams& params = s.params();
  for (int n = 0; n < arrivals; ++n) {
    const auto& view = s.tips_at_lookback(params.eps_min());
    VertexId x = view.front();
    for (VertexId v : view) {
      if (!s.free_tips().count(v)) {
        x = v;
        break;
      }
    }
    detail::force_arrival(s, detail::forced_decision(params, x, x), out);
  }
}

inline void plan_step_a(TangleState& s, const Thresholds& thr,
                        Overrides& out) {
  plan_ramp(s, thr.kappa_a, out);
}

// The reserved set: the lowest-id free tips after the ramp, sized
// 2(h_max + eps_min). The ramp guarantees more than 3(h_max + eps_min) free
// tips, so the reservation always leaves spare tips to select.
[[nodiscard]] inline std::vector<VertexId> pick_reserved_free(
    const TangleState& s) {
  const ModelParams& params = s.params();
  const std::size_t want =
      2 * static_cast<std::size_t>(params.h_max() + params.eps_min());
  const std::size_t need =
      3 * static_cast<std::size_t>(params.h_max() + params.eps_min());
  if (s.free_count() <= need)
    throw ConstructionError(
        "ramp phase ended with " + std::to_string(s.free_count()) +
        " free tips, need more than " + std::to_string(need));
  std::vector<VertexId> fb(s.free_tips().begin(), s.free_tips().end());
  fb.resize(want);
  return fb;
}

// Reservation phase: eps_min + 1 arrivals that select outside the reserved
// set, so every lookback view an early mesh arrival can have shows the
// reserved tips still free.
inline void plan_step_b(TangleState& s, const Thresholds& thr,
                        const std::vector<VertexId>& fb, Overrides& out) {
  const ModelParams& params = s.params();
  const int arrivals = thr.kappa_b - thr.kappa_a;
  for (int n = 0; n < arrivals; ++n) {
    const auto& view = s.tips_at_lookback(params.eps_min());
    VertexId x = 0;
    bool found = false;
    for (VertexId v : view) {
      if (!std::binary_search(fb.begin(), fb.end(), v)) {
        x = v;
        found = true;
        break;
      }
    }
    if (!found)
      throw ConstructionError(
          "reservation phase: arrival " + std::to_string(s.now() + 1) +
          " sees only reserved tips");
    detail::force_arrival(s, detail::forced_decision(params, x, x), out);
  }
}

// Mesh phase: arrivals [mesh_start, anchor + kappa_c] weave the portal
// column into a lattice where each cell's parents are its previous-column
// neighbors. After column_size columns the whole portal is in every cell's
// cone; after 2*column_size columns every pair of rays has merged.
[[nodiscard]] inline LabelFrame plan_step_c(TangleState& s,
                                            const Thresholds& thr,
                                            std::size_t fb_size,
                                            Overrides& out) {
  const ModelParams& params = s.params();
  LabelFrame frame;
  frame.mesh_start = s.now() + 1;

  const std::vector<VertexId> inflight = s.in_flight_ids();
  if (static_cast<int>(inflight.size()) != params.h_max() ||
      inflight.front() + static_cast<VertexId>(params.h_max()) !=
          frame.mesh_start)
    throw ConstructionError(
        "mesh phase: expected exactly the last " +
        std::to_string(params.h_max()) + " arrivals in flight");
  std::merge(s.free_tips().begin(), s.free_tips().end(), inflight.begin(),
             inflight.end(), std::back_inserter(frame.first_column));
  frame.column_size = static_cast<std::uint32_t>(frame.first_column.size());
  if (frame.column_size <=
      2 * static_cast<std::uint32_t>(params.h_max() + params.eps_min()))
    throw ConstructionError("mesh phase: portal too small (" +
                            std::to_string(frame.column_size) + " vertices)");

  const Step mesh_end =
      frame.mesh_start - thr.kappa_b + static_cast<Step>(thr.kappa_c);
  while (s.now() < mesh_end) {
    const VertexId v = s.now() + 1;
    const Label cell = *mesh_label(frame, v);
    const auto [px, py] = mesh_parent_labels(cell, frame.column_size);
    const ArrivalDecision d = detail::forced_decision(
        params, mesh_vertex(frame, px), mesh_vertex(frame, py));
    try {
      detail::force_arrival(s, d, out);
    } catch (const InfeasibleOverride& e) {
      // Feasibility case taxonomy: 1-2 are the first forced column (inside /
      // past the reserved prefix), 3-5 the later columns by row position.
      const int kase = cell.column == 2
                           ? (cell.row <= fb_size ? 1 : 2)
                           : (cell.row == 1
                                  ? 3
                                  : (cell.row < frame.column_size ? 4 : 5));
      throw ConstructionError(
          "mesh phase: cell (" + std::to_string(cell.column) + "," +
          std::to_string(cell.row) + ") case " + std::to_string(kase) +
          " infeasible: " + e.what());
    }
  }
  return frame;
}

// ---------------------------------------------------------------------------
// Forcing a full construction
// ---------------------------------------------------------------------------

struct ForceOptions {
  Step anchor = 0;            // explicit first forced arrival; 0 = search
  Step search_from = 1;       // earliest row eligible as the precondition row
  Step search_limit = 100000; // last row to scan before giving up
  Step post_steps = 500;      // sampled steps appended after the construction
};

struct ForceResult {
  Trace trace;
  BottleneckPlan plan;
};

// Advances an existing trace until a state with L <= b appears (the anchor
// precondition), then forces the three phases and lets the sampler resume
// for post_steps. Rows already sampled are never rewritten, so the anchor
// always lands past the trace's current row. On return the trace realizes
// plan.overrides exactly.
[[nodiscard]] inline BottleneckPlan force_on(Trace& trace,
                                             const ForceOptions& opts = {}) {
  const ModelParams& params = trace.params;
  const Thresholds thr = compute_thresholds(params);
  if (params.k_max() < 2)
    throw ConstructionError(
        "forcing needs parent count support reaching at least 2");

  if (opts.anchor > 0) {
    if (opts.anchor <= trace.state.now())
      throw ConstructionError("anchor " + std::to_string(opts.anchor) +
                              " lies inside the already-sampled prefix (row " +
                              std::to_string(trace.state.now()) + ")");
    extend(trace, opts.anchor - 1);
    if (trace.state.tip_count() > static_cast<std::size_t>(thr.b))
      throw AnchorError("state before arrival " + std::to_string(opts.anchor) +
                        " has " + std::to_string(trace.state.tip_count()) +
                        " tips, above the threshold " + std::to_string(thr.b));
  } else {
    const Step from = std::max(opts.search_from, trace.state.now());
    if (opts.search_limit < from)
      throw AnchorError("no state with at most " + std::to_string(thr.b) +
                        " tips in rows [" + std::to_string(from) + ", " +
                        std::to_string(opts.search_limit) +
                        "]: empty search window");
    extend(trace, from);
    while (trace.state.tip_count() > static_cast<std::size_t>(thr.b)) {
      if (trace.state.now() >= opts.search_limit)
        throw AnchorError("no state with at most " + std::to_string(thr.b) +
                          " tips in rows [" + std::to_string(from) + ", " +
                          std::to_string(opts.search_limit) + "]");
      extend(trace, trace.state.now() + 1);
    }
  }

  BottleneckPlan plan;
  plan.seed = trace.seed;
  plan.anchor = trace.state.now() + 1;
  plan.thresholds = thr;

  TangleState s = trace.state;
  plan_step_a(s, thr, plan.overrides);
  plan.fb_set = pick_reserved_free(s);
  plan_step_b(s, thr, plan.fb_set, plan.overrides);
  plan.frame = plan_step_c(s, thr, plan.fb_set.size(), plan.overrides);
  if (s.now() != plan.anchor + static_cast<Step>(thr.kappa_c))
    throw LogicBug("force_on: phase lengths disagree");

  extend(trace, plan.anchor + static_cast<Step>(thr.kappa_c) + opts.post_steps,
         plan.overrides);
  return plan;
}

// Fresh-trace convenience wrapper around force_on.
[[nodiscard]] inline ForceResult force_bottleneck(
    const ModelParams& params, std::uint64_t seed,
    const ForceOptions& opts = {}) {
  ForceResult result;
  result.trace = run(params, seed, 0);
  result.plan = force_on(result.trace, opts);
  return result;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

// Machine check of everything the construction promises. The first five
// fields certify the plan was realized; the last five are the graph
// guarantees, each verified against the trace by direct search with no reuse
// of the planner's reasoning.
struct BottleneckReport {
  bool anchor_precondition = false;  // L <= b at the pre-anchor state
  bool plan_realized = false;        // every forced decision is in the trace
  bool frame_consistent = false;     // portal matches the recomputed state
  bool reserved_stayed_free = false; // fb members free through phase two
  bool past_covered = false;      // portal cone covers the pre-mesh graph
  bool tail_reaches_mesh = false; // late vertices reach the exit column and
                                  // every portal vertex
  bool tail_covers_past = false;  // late vertices reach every pre-mesh vertex
  bool anchor_tips_retired = false;  // anchor tips gone from all late states
  bool late_tips_beyond_gate = false;  // late tip sets sit past the exit column
  std::string failure;  // first violated check, with witnesses

  friend bool operator==(const BottleneckReport&,
                         const BottleneckReport&) = default;

  [[nodiscard]] bool ok() const {
    return anchor_precondition && plan_realized && frame_consistent &&
           reserved_stayed_free && past_covered && tail_reaches_mesh &&
           tail_covers_past && anchor_tips_retired && late_tips_beyond_gate;
  }
};

[[nodiscard]] inline BottleneckReport verify_bottleneck(
    const Trace& trace, const BottleneckPlan& plan) {
  const Thresholds& thr = plan.thresholds;
  const ModelParams& params = trace.params;
  if (compute_thresholds(params) != thr)
    throw ConstructionError(
        "verification input: plan thresholds do not match the trace's model");
  if (plan.frame.column_size != plan.frame.first_column.size() ||
      plan.frame.mesh_start != plan.anchor + static_cast<Step>(thr.kappa_b))
    throw ConstructionError("verification input: inconsistent mesh frame");
  const Step last_forced = plan.anchor + static_cast<Step>(thr.kappa_c);
  if (trace.steps() < last_forced)
    throw ConstructionError(
        "verification input: trace ends before the construction does");

  BottleneckReport report;
  auto fail = [&report](std::string why) {
    if (report.failure.empty()) report.failure = std::move(why);
  };

  // Plan realization.
  const std::size_t pre_tip_count =
      plan.anchor == 1 ? 1 : trace.row(plan.anchor - 1).L;
  report.anchor_precondition = pre_tip_count <= static_cast<std::size_t>(thr.b);
  if (!report.anchor_precondition)
    fail("pre-anchor state has " + std::to_string(pre_tip_count) + " tips");

  report.plan_realized = true;
  for (const auto& [v, d] : plan.overrides) {
    const VertexRecord& rec = trace.record(v);
    if (rec.theta != d.theta || rec.eps != d.eps || rec.parents != d.parents) {
      report.plan_realized = false;
      fail("arrival " + std::to_string(v) + " deviates from the plan");
      break;
    }
  }

  const GraphView gv(trace.state.records());
  const Step portal_row = plan.frame.mesh_start - 1;

  // Portal recomputation.
  std::vector<VertexId> portal = gv.free_at(portal_row);
  const std::size_t free_size = portal.size();
  for (VertexId v : gv.in_flight_at(portal_row)) portal.push_back(v);
  std::sort(portal.begin(), portal.end());
  report.frame_consistent =
      portal == plan.frame.first_column &&
      free_size + params.h_max() == plan.frame.column_size &&
      plan.fb_set.size() ==
          2 * static_cast<std::size_t>(params.h_max() + params.eps_min()) &&
      std::equal(plan.fb_set.begin(), plan.fb_set.end(), portal.begin(),
                 portal.begin() + std::min(plan.fb_set.size(), portal.size()));
  if (!report.frame_consistent) fail("mesh portal does not match the trace");

  report.reserved_stayed_free = true;
  for (Step m = plan.anchor + thr.kappa_a - 1; m <= portal_row; ++m) {
    for (VertexId v : plan.fb_set) {
      if (!gv.free_at(v, m)) {
        report.reserved_stayed_free = false;
        fail("reserved tip " + std::to_string(v) + " not free at row " +
             std::to_string(m));
        break;
      }
    }
    if (!report.reserved_stayed_free) break;
  }

  // Portal cone covers everything solid and non-free at the portal state.
  {
    const std::vector<char> covered =
        gv.reach_from_any(plan.frame.first_column);
    report.past_covered = true;
    for (VertexId v = 0; v <= portal_row; ++v) {
      if (!gv.solid_at(v, portal_row) || gv.free_at(v, portal_row)) continue;
      if (!covered[v]) {
        report.past_covered = false;
        fail("vertex " + std::to_string(v) +
             " is outside the portal column's cone");
        break;
      }
    }
  }

  const Step horizon = trace.steps();
  const std::uint32_t c = plan.frame.column_size;

  // Tail connectivity: every post-construction vertex reaches the exit
  // column and the whole portal.
  {
    std::vector<VertexId> exit_column;
    for (std::uint32_t k = 1; k <= c; ++k)
      exit_column.push_back(mesh_vertex(plan.frame, Label{2 * c, k}));
    std::vector<char> reaches_exit(gv.size(), 0);
    {
      // Reverse search: which vertices have a path to some exit cell.
      std::vector<char> seen(gv.size(), 0);
      std::queue<VertexId> q;
      for (VertexId t : exit_column) {
        seen[t] = 1;
        q.push(t);
      }
      while (!q.empty()) {
        VertexId v = q.front();
        q.pop();
        for (VertexId u : gv.children(v))
          if (!seen[u]) {
            seen[u] = 1;
            q.push(u);
          }
      }
      reaches_exit = std::move(seen);
    }
    std::vector<char> reaches_all_portal(gv.size(), 1);
    for (VertexId f : plan.frame.first_column) {
      const std::vector<char> r = gv.reach_to(f);
      for (std::size_t v = 0; v < r.size(); ++v) reaches_all_portal[v] &= r[v];
    }
    report.tail_reaches_mesh = true;
    for (VertexId v = last_forced + 1; v <= horizon; ++v) {
      if (!reaches_exit[v]) {
        report.tail_reaches_mesh = false;
        fail("vertex " + std::to_string(v) + " misses the exit column");
        break;
      }
      if (!reaches_all_portal[v]) {
        report.tail_reaches_mesh = false;
        fail("vertex " + std::to_string(v) + " misses part of the portal");
        break;
      }
    }
  }

  // Full coverage: every pre-mesh vertex sits in every late vertex's cone.
  report.tail_covers_past = true;
  for (VertexId v_minus = 0;
       v_minus <= portal_row && report.tail_covers_past; ++v_minus) {
    if (!gv.solid_at(v_minus, portal_row)) continue;
    const std::vector<char> r = gv.reach_to(v_minus);
    for (VertexId v_plus = last_forced + 1; v_plus <= horizon; ++v_plus) {
      if (!r[v_plus]) {
        report.tail_covers_past = false;
        fail("vertex " + std::to_string(v_plus) + " cannot reach vertex " +
             std::to_string(v_minus));
        break;
      }
    }
  }

  // Anchor tip retirement: the pre-anchor tip set is disjoint from every
  // late tip set.
  {
    const std::vector<VertexId> anchor_tips = gv.tips_at(plan.anchor - 1);
    const Step from = last_forced - params.eps_max() - params.h_max() - 1;
    report.anchor_tips_retired = true;
    for (Step m = from; m <= horizon && report.anchor_tips_retired; ++m) {
      for (VertexId v : anchor_tips) {
        if (gv.tip_at(v, m)) {
          report.anchor_tips_retired = false;
          fail("anchor tip " + std::to_string(v) + " still a tip at row " +
               std::to_string(m));
          break;
        }
      }
    }
  }

  // Late tip sets live past the exit column's first cell.
  {
    const VertexId gate = mesh_vertex(plan.frame, Label{2 * c, 1});
    const Step from = last_forced - params.eps_max();
    report.late_tips_beyond_gate = true;
    for (VertexId v = 0; v < gate; ++v) {
      if (gv.completes(v) <= horizon &&
          gv.first_child_completion(v) > from) {
        report.late_tips_beyond_gate = false;
        fail("vertex " + std::to_string(v) + " below the exit gate is a tip " +
             "at or after row " + std::to_string(from));
        break;
      }
    }
  }

  return report;
}

}  // namespace tangleproof

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tangleproof/engine.hpp"
#include "tangleproof/model.hpp"

namespace tangleproof {

// ---------------------------------------------------------------------------
// GraphView: historical queries over a finished run
// ---------------------------------------------------------------------------

// Read-only index over a run's records. Because ids are arrival times and a
// vertex's edges solidify exactly at id + theta, every historical state is
// recoverable from the records alone:
//
//   solid at m     <=>  completes(v) <= m
//   tip at m       <=>  solid, and no child completed yet
//   free at m      <=>  tip, and no child has even arrived
//   pending at m   <=>  tip with an arrived-but-incomplete child
//
// Reachability queries run over the union graph: every recorded vertex with
// its deduplicated parent edges, regardless of completion (this is the graph
// all states grow into).
class GraphView {
 public:
  explicit GraphView(const std::vector<VertexRecord>& records)
      : records_(&records) {
    const std::size_t n = records.size();
    parents_.resize(n);
    children_.resize(n);
    first_child_arrival_.assign(n, kNever);
    first_child_completion_.assign(n, kNever);
    for (std::size_t v = 1; v < n; ++v) {
      parents_[v] = dedup_parents(records[v].parents);
      for (VertexId p : parents_[v]) {
        children_[p].push_back(static_cast<VertexId>(v));
        first_child_arrival_[p] =
            std::min(first_child_arrival_[p], records[v].id);
        first_child_completion_[p] =
            std::min(first_child_completion_[p], records[v].completion);
      }
    }
  }

  [[nodiscard]] std::size_t size() const { return records_->size(); }
  [[nodiscard]] Step completes(VertexId v) const {
    return v == kGenesis ? 0 : (*records_)[v].completion;
  }
  [[nodiscard]] const std::vector<VertexId>& parents(VertexId v) const {
    return parents_[v];
  }
  [[nodiscard]] const std::vector<VertexId>& children(VertexId v) const {
    return children_[v];
  }
  // Row of the earliest child arrival / completion (kNever while childless).
  [[nodiscard]] Step first_child_arrival(VertexId v) const {
    return first_child_arrival_[v];
  }
  [[nodiscard]] Step first_child_completion(VertexId v) const {
    return first_child_completion_[v];
  }

  [[nodiscard]] bool solid_at(VertexId v, Step m) const {
    return v < size() && v <= m && completes(v) <= m;
  }
  [[nodiscard]] bool tip_at(VertexId v, Step m) const {
    return solid_at(v, m) && first_child_completion_[v] > m;
  }
  [[nodiscard]] bool free_at(VertexId v, Step m) const {
    return solid_at(v, m) && first_child_arrival_[v] > m;
  }
  [[nodiscard]] bool pending_at(VertexId v, Step m) const {
    return tip_at(v, m) && first_child_arrival_[v] <= m;
  }
  [[nodiscard]] bool in_flight_at(VertexId v, Step m) const {
    return v != kGenesis && v < size() && v <= m && completes(v) > m;
  }

  [[nodiscard]] std::vector<VertexId> tips_at(Step m) const {
    return collect([&](VertexId v) { return tip_at(v, m); }, m);
  }
  [[nodiscard]] std::vector<VertexId> free_at(Step m) const {
    return collect([&](VertexId v) { return free_at(v, m); }, m);
  }
  [[nodiscard]] std::vector<VertexId> in_flight_at(Step m) const {
    return collect([&](VertexId v) { return in_flight_at(v, m); }, m);
  }

  // Vertices reachable from src by following parent edges (src included).
  [[nodiscard]] std::vector<char> reach_from(VertexId src) const {
    return reach_from_any(std::vector<VertexId>{src});
  }
  [[nodiscard]] std::vector<char> reach_from_any(
      const std::vector<VertexId>& sources) const {
    return bfs(sources, parents_);
  }
  // Vertices that can reach dst by following parent edges (dst included).
  [[nodiscard]] std::vector<char> reach_to(VertexId dst) const {
    return bfs(std::vector<VertexId>{dst}, children_);
  }
  [[nodiscard]] bool reachable(VertexId from, VertexId to) const {
    if (from >= size() || to >= size()) return false;
    return reach_from(from)[to] != 0;
  }

  // Shortest hop count from each vertex down to genesis over parent edges.
  // Every vertex has a path to genesis, so all entries are defined.
  [[nodiscard]] std::vector<int> depth_to_root() const {
    std::vector<int> dist(size(), -1);
    std::queue<VertexId> q;
    dist[kGenesis] = 0;
    q.push(kGenesis);
    while (!q.empty()) {
      VertexId v = q.front();
      q.pop();
      for (VertexId u : children_[v]) {
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          q.push(u);
        }
      }
    }
    return dist;
  }

  // Canonical byte representation of the radius-r ball around genesis in the
  // solid graph at state m: vertices within r hops of genesis (hops measured
  // over solid edges), with the induced solid edges, one line per vertex.
  [[nodiscard]] std::string ball_canonical(Step m, int r) const {
    const std::vector<int> dist = solid_depths(m);
    std::vector<VertexId> ball;
    for (std::size_t v = 0; v < size(); ++v)
      if (dist[v] >= 0 && dist[v] <= r) ball.push_back(static_cast<VertexId>(v));
    std::ostringstream out;
    for (VertexId v : ball) {
      // Ball members were reached over solid edges, so their own edges are
      // already solid; the induced ball keeps those leading to members.
      out << v << ':';
      bool first = true;
      for (VertexId p : parents_[v]) {
        if (dist[p] < 0 || dist[p] > r) continue;
        out << (first ? "" : ",") << p;
        first = false;
      }
      out << '\n';
    }
    return out.str();
  }

  // Genesis depths over solid edges at state m (-1 where unreached, e.g.
  // in-flight vertices or vertices whose cone has not yet solidified).
  [[nodiscard]] std::vector<int> solid_depths(Step m) const {
    std::vector<int> dist(size(), -1);
    std::queue<VertexId> q;
    dist[kGenesis] = 0;
    q.push(kGenesis);
    while (!q.empty()) {
      VertexId v = q.front();
      q.pop();
      for (VertexId u : children_[v]) {
        if (dist[u] < 0 && completes(u) <= m) {
          dist[u] = dist[v] + 1;
          q.push(u);
        }
      }
    }
    return dist;
  }

  static constexpr Step kNever = std::numeric_limits<Step>::max();

 private:
  template <typename Pred>
  [[nodiscard]] std::vector<VertexId> collect(Pred pred, Step m) const {
    std::vector<VertexId> out;
    const std::size_t hi = std::min<std::size_t>(size(), std::size_t{m} + 1);
    for (std::size_t v = 0; v < hi; ++v)
      if (pred(static_cast<VertexId>(v))) out.push_back(static_cast<VertexId>(v));
    return out;
  }

  [[nodiscard]] std::vector<char> bfs(
      const std::vector<VertexId>& sources,
      const std::vector<std::vector<VertexId>>& adj) const {
    std::vector<char> seen(size(), 0);
    std::queue<VertexId> q;
    for (VertexId s : sources) {
      if (s < size() && !seen[s]) {
        seen[s] = 1;
        q.push(s);
      }
    }
    while (!q.empty()) {
      VertexId v = q.front();
      q.pop();
      for (VertexId u : adj[v]) {
        if (!seen[u]) {
          seen[u] = 1;
          q.push(u);
        }
      }
    }
    return seen;
  }

  const std::vector<VertexRecord>* records_;
  std::vector<std::vector<VertexId>> parents_;
  std::vector<std::vector<VertexId>> children_;
  std::vector<Step> first_child_arrival_;
  std::vector<Step> first_child_completion_;
};

// ---------------------------------------------------------------------------
// Confirmation
// ---------------------------------------------------------------------------

// The confirmation cut at T: every tip set within the trailing eps_max
// window (the views any future arrival may still draw from) plus the
// vertices still in flight at T.
[[nodiscard]] inline std::vector<VertexId> confirmation_cut(
    const GraphView& gv, Step T, const ModelParams& params) {
  std::set<VertexId> cut;
  const Step lo =
      T >= static_cast<Step>(params.eps_max()) ? T - params.eps_max() : 0;
  for (Step s = lo; s <= T; ++s)
    for (VertexId v : gv.tips_at(s)) cut.insert(v);
  for (VertexId v : gv.in_flight_at(T)) cut.insert(v);
  return {cut.begin(), cut.end()};
}

// Vertices of the state at T certified by every possible future: v is
// confirmed iff each cut member has a path to v, so whatever the future
// attaches to, v stays in its cone. Monotone in T.
[[nodiscard]] inline std::set<VertexId> confirmed_set(
    const GraphView& gv, Step T, const ModelParams& params) {
  std::vector<char> all(gv.size(), 1);
  for (VertexId u : confirmation_cut(gv, T, params)) {
    const std::vector<char> r = gv.reach_from(u);
    for (std::size_t v = 0; v < all.size(); ++v) all[v] &= r[v];
  }
  std::set<VertexId> out;
  for (std::size_t v = 0; v < all.size(); ++v)
    if (all[v] && gv.solid_at(static_cast<VertexId>(v), T))
      out.insert(static_cast<VertexId>(v));
  return out;
}

// ---------------------------------------------------------------------------
// Tip-count processes
// ---------------------------------------------------------------------------

// Coupling gap between the free-tip count and its unit-drift comparison
// process pinned at row `anchor`: Y(anchor) = F(anchor), and Y increments by
// 1 - delta each step. Since F increments by completions - delta, the gap
// |F - Y| accumulates only the completion shortfall of the window.
struct MartingaleGap {
  Step anchor = 0;
  Step end = 0;
  int max_abs_gap = 0;
  Step argmax = 0;
};

[[nodiscard]] inline MartingaleGap martingale_gap(const Trace& trace,
                                                  Step anchor, Step end) {
  if (anchor == 0 || end > trace.steps() || anchor > end)
    throw LogicBug("martingale_gap: bad row range");
  MartingaleGap out{anchor, end, 0, anchor};
  std::int64_t y = trace.row(anchor).F;
  for (Step s = anchor + 1; s <= end; ++s) {
    y += 1 - static_cast<int>(trace.row(s).delta);
    const int gap =
        static_cast<int>(std::llabs(static_cast<std::int64_t>(trace.row(s).F) - y));
    if (gap > out.max_abs_gap) {
      out.max_abs_gap = gap;
      out.argmax = s;
    }
  }
  return out;
}

// Sum of the completions column over rows [start, start+len-1]. For windows
// that start after row h_max the sum deviates from len by at most
// h_max - h_min; windows overlapping genesis under-complete by more because
// the first arrivals are still in flight.
[[nodiscard]] inline long completions_in_window(const Trace& trace, Step start,
                                                Step len) {
  if (start == 0 || start + len - 1 > trace.steps())
    throw LogicBug("completions_in_window: bad row range");
  long sum = 0;
  for (Step s = start; s < start + len; ++s) sum += trace.row(s).completions;
  return sum;
}

// Visits of {L <= b} and excursions above b.
struct RecurrenceStats {
  long hits = 0;
  Step first_hit = 0;
  Step last_hit = 0;
  long spaced_hits = 0;  // greedy subsequence of hits more than `spacing` apart
  long excursions_started = 0;
  long excursions_completed = 0;
  Step longest_excursion = 0;
  bool open_at_end = false;
};

[[nodiscard]] inline RecurrenceStats tip_recurrence(const Trace& trace, int b,
                                                    Step spacing) {
  RecurrenceStats out;
  Step last_spaced = 0;
  bool any_spaced = false;
  Step excursion_start = 0;
  bool above = false;  // the genesis state has L = 1 <= b
  for (Step s = 1; s <= trace.steps(); ++s) {
    const bool below = trace.row(s).L <= static_cast<std::uint32_t>(b);
    if (below) {
      ++out.hits;
      if (out.first_hit == 0) out.first_hit = s;
      out.last_hit = s;
      if (!any_spaced || s > last_spaced + spacing) {
        ++out.spaced_hits;
        last_spaced = s;
        any_spaced = true;
      }
      if (above) {
        ++out.excursions_completed;
        out.longest_excursion =
            std::max(out.longest_excursion, s - excursion_start);
        above = false;
      }
    } else if (!above) {
      above = true;
      excursion_start = s;
      ++out.excursions_started;
    }
  }
  out.open_at_end = above;
  return out;
}

// ---------------------------------------------------------------------------
// Rooted-graph metric
// ---------------------------------------------------------------------------

// d(G1, G2) = 1/(r+1) with r the largest radius at which the genesis balls
// coincide (0 if the graphs are identical). The balls compare by exact
// vertex identity, so this is an ultrametric on rooted ledger graphs. The
// two snapshots may come from one view (historical rows) or from two.
[[nodiscard]] inline double d_star(const GraphView& ga, Step ma,
                                   const GraphView& gb, Step mb) {
  for (int r = 0;; ++r) {
    const std::string ball_a = ga.ball_canonical(ma, r);
    const std::string ball_b = gb.ball_canonical(mb, r);
    if (ball_a != ball_b) return 1.0 / (r + 1);
    // Identical balls that already cover both solid graphs mean identity.
    const std::string next_a = ga.ball_canonical(ma, r + 1);
    const std::string next_b = gb.ball_canonical(mb, r + 1);
    if (next_a == ball_a && next_b == ball_b) return 0.0;
  }
}

[[nodiscard]] inline double d_star(const TangleState& a,
                                   const TangleState& b) {
  const GraphView ga(a.records());
  const GraphView gb(b.records());
  return d_star(ga, a.now(), gb, b.now());
}

// Smallest genesis depth among the tips of state `row`: once a forcing event
// beginning right after `row` completes, the ball of this radius around
// genesis can no longer change.
[[nodiscard]] inline int stabilization_radius(const GraphView& gv, Step row) {
  const std::vector<int> depth = gv.depth_to_root();
  int r = std::numeric_limits<int>::max();
  for (VertexId v : gv.tips_at(row)) r = std::min(r, depth[v]);
  if (r == std::numeric_limits<int>::max())
    throw LogicBug("stabilization_radius: state has no tips");
  return r;
}

}  // namespace tangleproof

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "tangleproof/model.hpp"
#include "tangleproof/rng.hpp"

namespace tangleproof {

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

// Tip-class sizes after a step, plus the step's own bookkeeping. The exact
// balance F(n) - F(n-1) = completions - delta holds for every row.
struct RowStats {
  std::uint32_t L = 0;  // tip count
  std::uint32_t F = 0;  // free tip count
  std::uint32_t W = 0;  // pending tip count
  std::uint16_t delta = 0;
  std::uint16_t completions = 0;

  friend bool operator==(const RowStats& a, const RowStats& b) = default;
};

// A complete run: parameters, seed (0 when the trace was not sampled), the
// final state, and per-step tip statistics. Row n (1-indexed) describes the
// state after n steps; decision data for arrival n lives in record(n).
struct Trace {
  ModelParams params;
  std::uint64_t seed = 0;
  TangleState state;
  std::vector<RowStats> rows;

  [[nodiscard]] Step steps() const { return static_cast<Step>(rows.size()); }
  [[nodiscard]] const RowStats& row(Step n) const {
    if (n == 0 || n > rows.size())
      throw LogicBug("row: step " + std::to_string(n) + " out of range");
    return rows[n - 1];
  }
  [[nodiscard]] const VertexRecord& record(VertexId v) const {
    return state.record(v);
  }
};

// Forced decisions keyed by arrival id. Overrides replace sampling for those
// steps only; because draws are counter-based, the surrounding sampled steps
// are unaffected.
using Overrides = std::map<Step, ArrivalDecision>;

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

// Draws the decision for arrival pre.now()+1 under the model's product law:
// duration, lookback, and parent count from their marginals, then parents
// uniformly with replacement from the lookback tip set.
[[nodiscard]] inline ArrivalDecision sample_decision(const RngStream& rng,
                                                     const TangleState& pre) {
  const ModelParams& params = pre.params();
  const std::uint64_t v = pre.now() + 1;
  ArrivalDecision d;
  d.theta = params.theta_support[rng.draw_categorical(
      v, RngStream::kSlotTheta, params.theta_probs)];
  d.eps = params.eps_support[rng.draw_categorical(v, RngStream::kSlotEps,
                                                  params.eps_probs)];
  int k = params.k_support.front();
  if (params.k_support.size() > 1)
    k = params.k_support[rng.draw_categorical(v, RngStream::kSlotCount,
                                              params.k_probs)];
  const auto& view = pre.tips_at_lookback(d.eps);
  d.parents.reserve(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t)
    d.parents.push_back(view[rng.draw_index(
        v, RngStream::kSlotParent0 + static_cast<std::uint32_t>(t),
        view.size())]);
  return d;
}

// Number of free tips the decision would claim: |dedup(parents) ∩ F(pre)|.
[[nodiscard]] inline int delta_of(const ArrivalDecision& d,
                                  const TangleState& pre) {
  int delta = 0;
  for (VertexId p : dedup_parents(d.parents))
    if (pre.free_tips().count(p)) ++delta;
  return delta;
}

// Number of vertices that completed exactly at state.now(), recounted from
// the records (a vertex u completes at u + theta_u, so only the window
// [now - h_max, now - h_min] can contribute). Independent of the live
// bookkeeping, which makes it a useful cross-check.
[[nodiscard]] inline int completions_at(const TangleState& state) {
  const Step now = state.now();
  int count = 0;
  for (int h : state.params().theta_support) {
    if (now < static_cast<Step>(h)) continue;
    const VertexId u = now - static_cast<Step>(h);
    if (u == kGenesis || u >= state.vertex_count()) continue;
    if (state.record(u).theta == h) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

// Extends a trace to `upto` steps, sampling with the trace's seed except at
// overridden arrivals. Throws InfeasibleOverride if an override asks for a
// zero-probability transition.
inline void extend(Trace& trace, Step upto, const Overrides& overrides = {}) {
  while (trace.state.now() < upto) {
    const Step n = trace.state.now() + 1;
    ArrivalDecision d;
    if (auto it = overrides.find(n); it != overrides.end()) {
      d = it->second;
    } else {
      d = sample_decision(RngStream{trace.seed}, trace.state);
    }
    StepEffects eff;
    trace.state = apply_step(std::move(trace.state), d, &eff);
    trace.rows.push_back(RowStats{
        static_cast<std::uint32_t>(trace.state.tip_count()),
        static_cast<std::uint32_t>(trace.state.free_count()),
        static_cast<std::uint32_t>(trace.state.pending_count()),
        static_cast<std::uint16_t>(eff.delta),
        static_cast<std::uint16_t>(eff.completions)});
  }
}

[[nodiscard]] inline Trace run(const ModelParams& params, std::uint64_t seed,
                               Step steps, const Overrides& overrides = {}) {
  Trace trace;
  trace.params = params;
  trace.seed = seed;
  trace.state = TangleState::genesis(params);
  trace.rows.reserve(steps);
  extend(trace, steps, overrides);
  return trace;
}

}  // namespace tangleproof

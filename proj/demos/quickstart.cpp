// Minimal tour: sample a trace, check the per-step bookkeeping identity,
// and look at tip recurrence and confirmation on the sampled graph.

#include <cstdio>

#include "tangleproof/analysis.hpp"
#include "tangleproof/engine.hpp"
#include "tangleproof/model.hpp"

using namespace tangleproof;

int main() {
  ModelParams params;  // h in {2,3}, lookback in {1,2}, two parents, b = 33
  const Trace trace = run(params, /*seed=*/42, /*steps=*/20000);

  // ------------------------------------------------------------------
  // Per-step statistics
  // ------------------------------------------------------------------
  std::uint32_t max_tips = 0;
  std::uint32_t max_pending = 0;
  double mean_tips = 0.0;
  for (Step n = 1; n <= trace.steps(); ++n) {
    const RowStats& row = trace.row(n);
    if (row.L != row.F + row.W) {
      std::printf("bookkeeping broken at row %u\n", n);
      return 1;
    }
    max_tips = std::max(max_tips, row.L);
    max_pending = std::max(max_pending, row.W);
    mean_tips += row.L;
  }
  mean_tips /= trace.steps();
  std::printf("%u steps: tips mean %.2f, max %u; pending max %u (cap %d)\n",
              trace.steps(), mean_tips, max_tips,
              max_pending, params.k_max() * params.h_max());

  // ------------------------------------------------------------------
  // How often the tip count sits at or below the threshold b
  // ------------------------------------------------------------------
  const RecurrenceStats rec = tip_recurrence(trace, params.b, /*spacing=*/1);
  std::printf("L <= %d on %ld of %u rows (first %u, last %u)\n", params.b,
              rec.hits, trace.steps(), rec.first_hit, rec.last_hit);

  // ------------------------------------------------------------------
  // Confirmation: vertices certified no matter how the future attaches
  // ------------------------------------------------------------------
  const GraphView gv(trace.state.records());
  const Step horizon = trace.steps() / 2;
  const auto confirmed = confirmed_set(gv, horizon, params);
  std::size_t solid = 0;
  for (VertexId v = 0; v < static_cast<VertexId>(gv.size()); ++v)
    if (gv.solid_at(v, horizon)) ++solid;
  std::printf("at row %u: %zu of %zu solid vertices confirmed (%.1f%%)\n",
              horizon, confirmed.size(), solid,
              100.0 * static_cast<double>(confirmed.size()) /
                  static_cast<double>(solid));
  return 0;
}

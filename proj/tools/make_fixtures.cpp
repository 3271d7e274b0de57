// Regenerates the golden inputs under data/. The committed files are the
// source of truth for tests; this tool exists so they stay reproducible:
//
//   ./build/make_fixtures data
//
// Outputs:
//   fig1.json              six-vertex cartoon with dashed and solid claims
//   fig2_left.json         braided chains sharing one end: everything
//                          confirmable
//   fig2_right.json        two disjoint chains above the root: two ends, no
//                          arrival is ever confirmed
//   fig2_right_trace.*     a replayable analogue of the right-hand graph
//                          (its exact shape needs a parent visible the step
//                          after it arrives, which the completion delay
//                          forbids, so the trace interleaves three chains)

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "tangleproof/engine.hpp"
#include "tangleproof/model.hpp"
#include "tangleproof/serialize.hpp"

namespace fs = std::filesystem;

using tangleproof::ArrivalDecision;
using tangleproof::GraphFixture;
using tangleproof::Json;
using tangleproof::ModelParams;
using tangleproof::Overrides;
using tangleproof::Step;
using tangleproof::Trace;
using tangleproof::VertexId;
using tangleproof::VertexRecord;

namespace {

constexpr Step kChainArrivals = 200;

// Fixed two-step durations, one-step lookback, one or two parents. The graph
// is hand-drawn, so the parameters only need to admit its shapes.
ModelParams cartoon_params() {
  ModelParams p;
  p.theta_support = {2};
  p.theta_probs = {1.0};
  p.eps_support = {1};
  p.eps_probs = {1.0};
  p.k_support = {1, 2};
  p.k_probs = {0.5, 0.5};
  p.b = 14;
  return p;
}

// Unit-duration chains need theta = 1 with positive probability; the second
// duration keeps the threshold formulas well defined.
ModelParams chain_params(std::vector<int> k_support,
                         std::vector<double> k_probs) {
  ModelParams p;
  p.theta_support = {1, 2};
  p.theta_probs = {0.5, 0.5};
  p.eps_support = {1};
  p.eps_probs = {1.0};
  p.k_support = std::move(k_support);
  p.k_probs = std::move(k_probs);
  p.b = 23;
  return p;
}

// Six vertices: 3 has selected 1; 5 has selected 2 and 3; 4 and 5 are still
// in flight at the snapshot, so their claims on 2 and 3 are dashed.
GraphFixture fig1() {
  GraphFixture g;
  g.params = cartoon_params();
  g.now = 5;
  g.records.push_back(VertexRecord{0, 0, 0, {}, 0});
  g.records.push_back(VertexRecord{1, 2, 1, {0}, 3});
  g.records.push_back(VertexRecord{2, 2, 1, {1, 0}, 4});
  g.records.push_back(VertexRecord{3, 2, 1, {1}, 5});
  g.records.push_back(VertexRecord{4, 2, 1, {2, 3}, 6});
  g.records.push_back(VertexRecord{5, 2, 1, {2, 3}, 7});
  return g;
}

// The odd chain (1,3,5,...), the even chain (2,4,6,...), and a zigzag
// braiding them: 2 and 3 also claim their predecessor, and from 4 on the
// braid repeats with period four (v = 4j and 4j+1 claim only v-2; 4j+2 and
// 4j+3 claim v-2 and v-1). All three walks share one end.
GraphFixture fig2_left() {
  GraphFixture g;
  g.params = chain_params({1, 2}, {0.5, 0.5});
  g.now = kChainArrivals;
  g.records.push_back(VertexRecord{0, 0, 0, {}, 0});
  g.records.push_back(VertexRecord{1, 1, 1, {0}, 2});
  g.records.push_back(VertexRecord{2, 1, 1, {0, 1}, 3});
  g.records.push_back(VertexRecord{3, 1, 1, {1, 2}, 4});
  for (VertexId v = 4; v <= kChainArrivals; ++v) {
    std::vector<VertexId> parents{v - 2};
    if (v % 4 >= 2) parents.push_back(v - 1);
    g.records.push_back(VertexRecord{v, 1, 1, std::move(parents), v + 1});
  }
  return g;
}

// Two disjoint chains above the root: 1 and 2 claim genesis, then v -> v-2,
// giving the walks (0,1,3,5,...) and (0,2,4,6,...) their own ends. Static
// shape only: realizing it live would need v-2 visible to arrival v, and the
// completion delay keeps a vertex out of every view for at least two steps.
GraphFixture fig2_right() {
  GraphFixture g;
  g.params = chain_params({1}, {1.0});
  g.now = kChainArrivals;
  g.records.push_back(VertexRecord{0, 0, 0, {}, 0});
  g.records.push_back(VertexRecord{1, 1, 1, {0}, 2});
  g.records.push_back(VertexRecord{2, 1, 1, {0}, 3});
  for (VertexId v = 3; v <= kChainArrivals; ++v)
    g.records.push_back(VertexRecord{v, 1, 1, {v - 2}, v + 1});
  return g;
}

// Replayable analogue of the right-hand graph with three chains interleaved
// mod 3: 1, 2, 3 claim genesis, then v -> v-3. Every decision is feasible
// (v-3 completes at v-2 and is untouched there), so beyond the golden graph
// this one also ships as a trace.
Trace fig2_right_trace() {
  Overrides overrides;
  for (Step v = 1; v <= kChainArrivals; ++v) {
    const VertexId parent = v <= 3 ? 0 : static_cast<VertexId>(v - 3);
    overrides.emplace(v, ArrivalDecision{1, 1, {parent}});
  }
  return tangleproof::run(chain_params({1}, {1.0}), 0, kChainArrivals,
                          overrides);
}

void write_graph(const fs::path& path, const GraphFixture& g) {
  tangleproof::write_json_file(path.string(), tangleproof::graph_to_json(g));
  std::printf("wrote %s (%zu vertices)\n", path.string().c_str(),
              g.records.size());
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "data";
  fs::create_directories(dir);

  write_graph(dir / "fig1.json", fig1());
  write_graph(dir / "fig2_left.json", fig2_left());
  write_graph(dir / "fig2_right.json", fig2_right());

  const Trace right = fig2_right_trace();
  const fs::path csv_path = dir / "fig2_right_trace.csv";
  {
    std::ofstream csv(csv_path);
    tangleproof::write_trace_csv(csv, right);
  }
  Json meta;
  meta["schema"] = tangleproof::kSchemaTag;
  meta["kind"] = "trace";
  meta["seed"] = right.seed;
  meta["steps"] = right.steps();
  meta["csv"] = "fig2_right_trace.csv";
  meta["model"] = tangleproof::params_to_json(right.params);
  const fs::path meta_path = dir / "fig2_right_trace.meta.json";
  tangleproof::write_json_file(meta_path.string(), meta);
  std::printf("wrote %s (%u rows)\n", csv_path.string().c_str(),
              right.steps());

  // Read everything back so a stale generator can never ship broken goldens.
  (void)tangleproof::read_graph((dir / "fig1.json").string());
  (void)tangleproof::read_graph((dir / "fig2_left.json").string());
  (void)tangleproof::read_graph((dir / "fig2_right.json").string());
  const tangleproof::StoredTrace stored =
      tangleproof::read_trace(meta_path.string());
  if (!tangleproof::replay_diff(stored).empty()) {
    std::fprintf(stderr, "fig2_right_trace does not replay cleanly\n");
    return 1;
  }
  std::printf("all fixtures read back and replay cleanly\n");
  return 0;
}

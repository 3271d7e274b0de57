#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tangleproof/errors.hpp"

namespace tangleproof {

// Vertex ids double as arrival times: vertex v arrives at step v, the genesis
// vertex is 0 and is never "in flight". One vertex arrives per step.
using VertexId = std::uint32_t;
using Step = std::uint32_t;

constexpr VertexId kGenesis = 0;

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct ModelParams {
  // Proof-of-work durations (steps until a vertex's edges solidify) and their
  // probabilities. Must be strictly increasing, all >= 1, largest >= 2.
  std::vector<int> theta_support{2, 3};
  std::vector<double> theta_probs{0.5, 0.5};

  // Lookback delays: an arrival at step v draws parents from the tip set as
  // of step v - 1 - eps. Strictly increasing, all >= 1.
  std::vector<int> eps_support{1, 2};
  std::vector<double> eps_probs{0.5, 0.5};

  // Parents drawn per arrival (with replacement). A single-entry support
  // means the count is deterministic and consumes no randomness.
  std::vector<int> k_support{2};
  std::vector<double> k_probs{1.0};

  // Tip-count threshold used by anchor search and recurrence statistics.
  int b = 33;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

  [[nodiscard]] int h_min() const { return theta_support.front(); }
  [[nodiscard]] int h_max() const { return theta_support.back(); }
  [[nodiscard]] int eps_min() const { return eps_support.front(); }
  [[nodiscard]] int eps_max() const { return eps_support.back(); }
  [[nodiscard]] int k_max() const { return k_support.back(); }
  [[nodiscard]] int duration_count() const {
    return static_cast<int>(theta_support.size());
  }

  // Smallest admissible tip threshold for the recurrence analysis; `b` must
  // exceed it for the drift argument behind the forcing construction to
  // apply.
  [[nodiscard]] int b_floor() const {
    return 10 * h_max() - 6 * h_min() +
           3 * duration_count() * eps_max() + 2;
  }

  // Throws ConfigError naming the first violated requirement.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Vertices and decisions
// ---------------------------------------------------------------------------

// Everything an arrival commits to. Parents are the raw draws, in draw order,
// duplicates preserved; the ledger graph uses the deduplicated set.
struct ArrivalDecision {
  int theta = 0;
  int eps = 0;
  std::vector<VertexId> parents;

  friend bool operator==(const ArrivalDecision& a,
                         const ArrivalDecision& b) = default;
};

struct VertexRecord {
  VertexId id = 0;
  int theta = 0;
  int eps = 0;
  std::vector<VertexId> parents;  // raw draws, duplicates preserved
  Step completion = 0;            // id + theta; 0 for genesis

  friend bool operator==(const VertexRecord& a,
                         const VertexRecord& b) = default;
};

// Sorted unique parent set (the actual edge targets).
[[nodiscard]] inline std::vector<VertexId> dedup_parents(
    const std::vector<VertexId>& parents) {
  std::vector<VertexId> out(parents);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Per-step bookkeeping surfaced by apply_step.
struct StepEffects {
  int delta = 0;        // selected-free-tip count: |dedup(parents) ∩ F(pre)|
  int completions = 0;  // vertices whose edges solidified this step
};

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

// Ledger state after `now` steps. Value type with copy-on-write innards:
// copies are O(1), mutation through apply_step reuses the core when uniquely
// owned, so retaining snapshots is cheap and stepping stays allocation-light.
//
// Tip classes:
//   tips     = solid vertices with no solid in-edge (in-degree 0)
//   pending  = tips selected by some still-in-flight arrival (dashed in-edge)
//   free     = tips \ pending
// Completing vertices always enter the free class: a vertex is only visible
// for selection after it completes, so no in-flight vertex has children.
class TangleState {
 public:
  TangleState() = default;

  [[nodiscard]] static TangleState genesis(const ModelParams& params);

  [[nodiscard]] Step now() const { return core_->now; }
  [[nodiscard]] const ModelParams& params() const { return core_->params; }

  // All vertices ever recorded (solid and in flight), indexed by id.
  [[nodiscard]] const std::vector<VertexRecord>& records() const {
    return core_->records;
  }
  [[nodiscard]] const VertexRecord& record(VertexId v) const {
    if (v >= core_->records.size())
      throw LogicBug("record: unknown vertex " + std::to_string(v));
    return core_->records[v];
  }
  [[nodiscard]] VertexId vertex_count() const {
    return static_cast<VertexId>(core_->records.size());
  }

  [[nodiscard]] bool is_solid(VertexId v) const {
    return v < core_->records.size() && core_->records[v].completion <= now();
  }
  [[nodiscard]] bool is_in_flight(VertexId v) const {
    return v < core_->records.size() && core_->records[v].completion > now();
  }
  [[nodiscard]] std::vector<VertexId> in_flight_ids() const;

  [[nodiscard]] const std::set<VertexId>& free_tips() const {
    return core_->free;
  }
  [[nodiscard]] const std::set<VertexId>& pending_tips() const {
    return core_->pending;
  }
  // Sorted union of free and pending.
  [[nodiscard]] std::vector<VertexId> tips() const;

  [[nodiscard]] std::size_t tip_count() const {
    return core_->free.size() + core_->pending.size();
  }
  [[nodiscard]] std::size_t free_count() const { return core_->free.size(); }
  [[nodiscard]] std::size_t pending_count() const {
    return core_->pending.size();
  }

  // Tip set of the state `depth` steps back (depth 0 = current). The ring
  // only keeps eps_max entries of history; asking past it is a hard error.
  // States before genesis resolve to {0}.
  [[nodiscard]] const std::vector<VertexId>& tips_at_lookback(int depth) const {
    if (depth < 0 || depth >= static_cast<int>(core_->tip_ring.size()))
      throw LogicBug("tips_at_lookback: depth " + std::to_string(depth) +
                     " outside retained history");
    return core_->tip_ring[static_cast<std::size_t>(depth)];
  }

  // Degrees over solid edges only: in-edges from completed children, and no
  // out-edges until the vertex itself completes.
  [[nodiscard]] int in_degree(VertexId v) const {
    if (v >= core_->records.size())
      throw LogicBug("in_degree: unknown vertex " + std::to_string(v));
    return core_->solid_indeg[v];
  }
  [[nodiscard]] int out_degree(VertexId v) const {
    if (!is_solid(v) || v == kGenesis) return 0;
    return static_cast<int>(dedup_parents(record(v).parents).size());
  }

  friend TangleState apply_step(TangleState state, const ArrivalDecision& d,
                                StepEffects* effects);

 private:
  struct Core {
    ModelParams params;
    Step now = 0;
    std::vector<VertexRecord> records;
    std::vector<int> solid_indeg;
    std::set<VertexId> free;
    std::set<VertexId> pending;
    // tip_ring[d] = sorted tip set `d` steps ago, d in [0, eps_max].
    std::deque<std::vector<VertexId>> tip_ring;
    // completion time -> ids completing then; drained as steps pass.
    std::map<Step, std::vector<VertexId>> completion_queue;
  };

  Core& mut() {
    if (core_.use_count() != 1) core_ = std::make_shared<Core>(*core_);
    return *core_;
  }

  std::shared_ptr<Core> core_;
};

// Advances the state by one step: the pending completions for step now+1
// solidify, then vertex now+1 arrives with the given decision. Throws
// InfeasibleOverride if the decision is impossible under the model (wrong
// support value, parent outside the lookback tip set).
[[nodiscard]] TangleState apply_step(TangleState state,
                                     const ArrivalDecision& d,
                                     StepEffects* effects = nullptr);

// ---------------------------------------------------------------------------
// Implementation
// ---------------------------------------------------------------------------

inline void ModelParams::validate() const {
  auto check_dist = [](const std::vector<int>& support,
                       const std::vector<double>& probs, int min_value,
                       const std::string& name) {
    if (support.empty())
      throw ConfigError(name + ": support must be non-empty");
    if (support.size() != probs.size())
      throw ConfigError(name + ": support and probabilities differ in length");
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (support[i] < min_value)
        throw ConfigError(name + ": value " + std::to_string(support[i]) +
                          " below minimum " + std::to_string(min_value));
      if (i > 0 && support[i] <= support[i - 1])
        throw ConfigError(name + ": support must be strictly increasing");
      if (!(probs[i] > 0.0))
        throw ConfigError(name + ": probabilities must be positive");
    }
    double total = 0.0;
    for (double p : probs) total += p;
    if (std::abs(total - 1.0) > 1e-9)
      throw ConfigError(name + ": probabilities must sum to 1");
  };
  check_dist(theta_support, theta_probs, 1, "theta");
  check_dist(eps_support, eps_probs, 1, "eps");
  check_dist(k_support, k_probs, 1, "k");
  if (h_max() < 2)
    throw ConfigError("theta: largest duration must be at least 2");
  if (b <= 0) throw ConfigError("b: must be positive");
}

inline TangleState TangleState::genesis(const ModelParams& params) {
  params.validate();
  TangleState s;
  s.core_ = std::make_shared<Core>();
  Core& c = *s.core_;
  c.params = params;
  c.now = 0;
  c.records.push_back(VertexRecord{kGenesis, 0, 0, {}, 0});
  c.solid_indeg.push_back(0);
  c.free.insert(kGenesis);
  // Pre-genesis states all have tip set {0}, so lookbacks that reach past
  // step 0 resolve to the genesis vertex.
  const std::size_t ring_size = static_cast<std::size_t>(params.eps_max()) + 1;
  for (std::size_t d = 0; d < ring_size; ++d)
    c.tip_ring.push_back({kGenesis});
  return s;
}

inline std::vector<VertexId> TangleState::in_flight_ids() const {
  std::vector<VertexId> out;
  for (const auto& [when, ids] : core_->completion_queue)
    out.insert(out.end(), ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<VertexId> TangleState::tips() const {
  std::vector<VertexId> out;
  out.reserve(tip_count());
  std::merge(core_->free.begin(), core_->free.end(), core_->pending.begin(),
             core_->pending.end(), std::back_inserter(out));
  return out;
}

inline TangleState apply_step(TangleState state, const ArrivalDecision& d,
                              StepEffects* effects) {
  if (!state.core_) throw LogicBug("apply_step: empty state");
  TangleState::Core& c = state.mut();
  const VertexId v = c.now + 1;
  const std::string ctx = "arrival " + std::to_string(v) + ": ";

  // Decision feasibility. Parents must come from the tip set eps steps
  // before this arrival, i.e. ring depth eps of the pre-arrival state.
  auto in_support = [](int value, const std::vector<int>& support) {
    return std::find(support.begin(), support.end(), value) != support.end();
  };
  if (!in_support(d.theta, c.params.theta_support))
    throw InfeasibleOverride(ctx + "duration " + std::to_string(d.theta) +
                             " not in the duration support");
  if (!in_support(d.eps, c.params.eps_support))
    throw InfeasibleOverride(ctx + "lookback " + std::to_string(d.eps) +
                             " not in the lookback support");
  if (!in_support(static_cast<int>(d.parents.size()), c.params.k_support))
    throw InfeasibleOverride(ctx + "parent count " +
                             std::to_string(d.parents.size()) +
                             " not in the parent-count support");
  const auto& view = c.tip_ring[static_cast<std::size_t>(d.eps)];
  for (VertexId p : d.parents) {
    if (!std::binary_search(view.begin(), view.end(), p))
      throw InfeasibleOverride(ctx + "parent " + std::to_string(p) +
                               " not a tip at lookback " +
                               std::to_string(d.eps));
  }

  const std::vector<VertexId> parent_set = dedup_parents(d.parents);

  StepEffects eff;
  for (VertexId p : parent_set)
    if (c.free.count(p)) ++eff.delta;

  // Completions scheduled for this step solidify first. Their edges kill any
  // parent that is still a tip (necessarily pending: the completer's own
  // dashed edge put it there), and each completer surfaces as a free tip.
  if (auto it = c.completion_queue.find(v); it != c.completion_queue.end()) {
    for (VertexId u : it->second) {
      for (VertexId p : dedup_parents(c.records[u].parents)) {
        ++c.solid_indeg[p];
        c.pending.erase(p);
      }
      c.free.insert(u);
      ++eff.completions;
    }
    c.completion_queue.erase(it);
  }

  // The arrival itself: record it, schedule its completion, and mark the
  // free tips it selected as pending.
  c.records.push_back(VertexRecord{v, d.theta, d.eps, d.parents,
                                   v + static_cast<Step>(d.theta)});
  c.solid_indeg.push_back(0);
  c.completion_queue[v + static_cast<Step>(d.theta)].push_back(v);
  for (VertexId p : parent_set) {
    if (c.free.erase(p)) c.pending.insert(p);
  }

  c.now = v;
  std::vector<VertexId> current;
  current.reserve(c.free.size() + c.pending.size());
  std::merge(c.free.begin(), c.free.end(), c.pending.begin(), c.pending.end(),
             std::back_inserter(current));
  c.tip_ring.push_front(std::move(current));
  c.tip_ring.pop_back();

  if (effects) *effects = eff;
  return state;
}

}  // namespace tangleproof

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gclab/collector.hpp"
#include "gclab/heap_graph.hpp"
#include "gclab/report.hpp"
#include "gclab/scenario.hpp"
#include "gclab/scheduler.hpp"
#include "gclab/store.hpp"

// Oracles and invariant checks. The traversal here is a separate worklist
// implementation; nothing in this file calls into the fixpoint engine or the
// store's own reachability.

namespace gclab {

/// Plain worklist traversal: seeds plus everything reachable from them.
NodeSet reachability_oracle(const HeapGraph& graph, const NodeSet& seeds);
/// Same traversal reading successors through a saved-slot overlay.
NodeSet reachability_oracle(const HeapGraph& graph, const std::map<NodeId, std::vector<NodeId>>& overlay,
                            const NodeSet& seeds);

/// Targets of every pre-root, recomputed from the raw slots.
NodeSet oracle_roots(const StoreState& store);
/// reach(roots) ∪ supply
NodeSet oracle_live(const StoreState& store);

struct Failure {
  InvariantId id;
  std::string detail;
  NodeSet nodes;
};

std::optional<Failure> check_partition(const StoreState& store);
std::optional<Failure> check_disjointness(const StoreState& store, const CollectorState& cs);
/// No arc from a black node leaves black ∪ gray; implies
/// reach(b ∪ g) = b ∪ reach(g).
std::optional<Failure> check_ws_axiom(const StoreState& store, const CollectorState& cs);
/// No arc from a black node leaves black ∪ gray ∪ dirty.
std::optional<Failure> check_dirty_axiom(const StoreState& store, const CollectorState& cs);
/// dirty ⊆ members of the dirty cards.
std::optional<Failure> check_dirty_cards_axiom(const StoreState& store, const CollectorState& cs,
                                               const CollectorConfig& cfg);
/// reach_{G_0}(black ∪ gray ∪ supply_i) = live_0, with G_0 and live_0 taken
/// from the cycle's first state.
std::optional<Failure> check_snapshot_axiom(const StoreState& now, const CollectorState& cs,
                                            const StoreState& start);
/// live_after ⊆ live_before across one mutator action.
std::optional<Failure> check_antitone_step(const StoreState& before, const StoreState& after);

/// Whether the per-step axiom is claimed by this configuration: WS for the
/// workset family and DirtyAxiom for the dirty family, each unless the
/// barrier is deletion-based; DirtyCards and Snapshot for their variants.
bool axiom_applies(InvariantId id, const CollectorConfig& cfg);

/// Every per-step check that applies to the simulation's current state.
/// `before` is the store prior to a mutator action (nullptr otherwise).
/// `checked` receives the ids that were evaluated.
std::vector<Failure> check_state(const Simulation& sim, const StoreState* before,
                                 std::vector<InvariantId>* checked = nullptr);

/// Replays `trace` from `scenario`, evaluating `id` after every action.
/// Throws HarnessIntegrityFault when the replay diverges from the trace.
Verdict check_step_axiom(const Scenario& scenario, const Trace& trace, InvariantId id);

/// Cycle-level checks: Safety, AimSandwich, Termination and the recycling
/// progress obligation (reported as Liveness). Only evaluated ids appear.
std::map<InvariantId, std::optional<Failure>> check_cycle(const CycleRecord& cycle, const CollectorConfig& cfg);

/// floating_k ⊆ recycled_{k+1} for adjacent completed cycles, and every
/// stall was eventually resumed.
std::optional<Failure> check_liveness(const std::vector<CycleRecord>& cycles, const std::vector<StallRecord>& stalls);

/// Antitone over every mutator action of a replayed trace.
Verdict check_antitone(const Scenario& scenario, const Trace& trace);

/// Final report for a finished simulation.
VerificationReport verify(const Simulation& sim, CheckLevel level);

}  // namespace gclab

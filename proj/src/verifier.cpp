#include "gclab/verifier.hpp"

#include <algorithm>
#include <functional>

namespace gclab {

NodeSet reachability_oracle(const HeapGraph& graph, const NodeSet& seeds) {
  NodeSet seen(graph.size());
  std::vector<NodeId> work;
  for (NodeId n : seeds) {
    seen.insert(n);
    work.push_back(n);
  }
  while (!work.empty()) {
    NodeId a = work.back();
    work.pop_back();
    for (NodeId b : graph.slots(a))
      if (!seen.contains(b)) {
        seen.insert(b);
        work.push_back(b);
      }
  }
  return seen;
}

NodeSet reachability_oracle(const HeapGraph& graph, const std::map<NodeId, std::vector<NodeId>>& overlay,
                            const NodeSet& seeds) {
  NodeSet seen(graph.size());
  std::vector<NodeId> work;
  for (NodeId n : seeds) {
    seen.insert(n);
    work.push_back(n);
  }
  while (!work.empty()) {
    NodeId a = work.back();
    work.pop_back();
    auto it = overlay.find(a);
    const auto& slots = it != overlay.end() ? it->second : graph.slots(a);
    for (NodeId b : slots)
      if (!seen.contains(b)) {
        seen.insert(b);
        work.push_back(b);
      }
  }
  return seen;
}

NodeSet oracle_roots(const StoreState& store) {
  NodeSet r(store.memory_size());
  for (const auto& pr : store.pre_roots())
    for (NodeId n : pr.slots) r.insert(n);
  return r;
}

NodeSet oracle_live(const StoreState& store) {
  NodeSet live = reachability_oracle(store.graph(), oracle_roots(store));
  for (NodeId n : store.supply()) live.insert(n);
  return live;
}

namespace {

std::string fmt(const StoreState& s, const NodeSet& n) { return s.graph().format(n); }

// Arcs a -> b with a black and b outside `allowed`.
NodeSet escaping_targets(const StoreState& store, const NodeSet& black, const NodeSet& allowed, NodeSet* sources) {
  NodeSet out(store.memory_size());
  for (NodeId a : black)
    for (NodeId b : store.graph().slots(a))
      if (!allowed.contains(b)) {
        out.insert(b);
        if (sources) sources->insert(a);
      }
  return out;
}

std::optional<Failure> arc_axiom(InvariantId id, const StoreState& store, const CollectorState& cs,
                                 const NodeSet& allowed) {
  NodeSet src(store.memory_size());
  NodeSet bad = escaping_targets(store, cs.black, allowed, &src);
  if (bad.empty()) return std::nullopt;
  return Failure{id, "black " + fmt(store, src) + " points to unmarked " + fmt(store, bad), bad | src};
}

}  // namespace

std::optional<Failure> check_partition(const StoreState& store) {
  NodeSet active = reachability_oracle(store.graph(), oracle_roots(store));
  NodeSet supply(store.memory_size());
  for (NodeId n : store.supply()) {
    if (supply.contains(n))
      return Failure{InvariantId::Partition, "supply lists " + store.graph().name(n) + " twice",
                     NodeSet(store.memory_size(), {n})};
    supply.insert(n);
  }
  NodeSet both = active & supply;
  if (!both.empty())
    return Failure{InvariantId::Partition, "supply nodes reachable from roots: " + fmt(store, both), both};
  if (store.dead_set() != (active | supply).complement()) {
    NodeSet diff = (store.dead_set() - (active | supply).complement()) |
                   ((active | supply).complement() - store.dead_set());
    return Failure{InvariantId::Partition, "store dead set disagrees with oracle on " + fmt(store, diff), diff};
  }
  for (NodeId n : supply)
    if (!store.graph().slots(n).empty())
      return Failure{InvariantId::Partition, "supply node " + store.graph().name(n) + " has arcs",
                     NodeSet(store.memory_size(), {n})};
  return std::nullopt;
}

std::optional<Failure> check_disjointness(const StoreState& store, const CollectorState& cs) {
  NodeSet bg = cs.black & cs.gray, bd = cs.black & cs.dirty, gd = cs.gray & cs.dirty;
  NodeSet all = bg | bd | gd;
  if (all.empty()) return std::nullopt;
  return Failure{InvariantId::Disjointness, "color sets overlap on " + fmt(store, all), all};
}

std::optional<Failure> check_ws_axiom(const StoreState& store, const CollectorState& cs) {
  return arc_axiom(InvariantId::WSAxiom, store, cs, cs.black | cs.gray);
}

std::optional<Failure> check_dirty_axiom(const StoreState& store, const CollectorState& cs) {
  return arc_axiom(InvariantId::DirtyAxiom, store, cs, cs.black | cs.gray | cs.dirty);
}

std::optional<Failure> check_dirty_cards_axiom(const StoreState& store, const CollectorState& cs,
                                               const CollectorConfig& cfg) {
  NodeSet covered(store.memory_size());
  for (std::size_t c = 0; c < cs.card_dirty.size(); ++c)
    if (cs.card_dirty[c]) covered |= card_members(c, store.memory_size(), cfg.card_count);
  NodeSet bad = cs.dirty - covered;
  if (bad.empty()) return std::nullopt;
  return Failure{InvariantId::DirtyCardsAxiom, "dirty nodes on clean cards: " + fmt(store, bad), bad};
}

std::optional<Failure> check_snapshot_axiom(const StoreState& now, const CollectorState& cs,
                                            const StoreState& start) {
  NodeSet seeds = cs.black | cs.gray;
  for (NodeId n : now.supply()) seeds.insert(n);
  NodeSet reach = reachability_oracle(start.graph(), seeds);
  NodeSet live0 = oracle_live(start);
  if (reach == live0) return std::nullopt;
  NodeSet missing = live0 - reach, extra = reach - live0;
  std::string detail;
  if (!missing.empty()) detail += "snapshot-live nodes not covered: " + fmt(now, missing);
  if (!extra.empty()) detail += (detail.empty() ? "" : "; ") + std::string("covered but dead at start: ") + fmt(now, extra);
  return Failure{InvariantId::SnapshotAxiom, detail, missing | extra};
}

std::optional<Failure> check_antitone_step(const StoreState& before, const StoreState& after) {
  NodeSet grown = oracle_live(after) - oracle_live(before);
  if (grown.empty()) return std::nullopt;
  return Failure{InvariantId::Antitone, "dead nodes became live: " + fmt(after, grown), grown};
}

bool axiom_applies(InvariantId id, const CollectorConfig& cfg) {
  switch (id) {
    case InvariantId::WSAxiom:
      return (cfg.variant == Variant::StopTheWorld || cfg.variant == Variant::Workset) &&
             cfg.barrier != Barrier::YuasaDelete;
    case InvariantId::DirtyAxiom: return cfg.uses_dirty() && cfg.barrier != Barrier::YuasaDelete;
    case InvariantId::DirtyCardsAxiom: return cfg.uses_cards();
    case InvariantId::SnapshotAxiom: return cfg.reads_snapshot();
    default: return true;
  }
}

std::vector<Failure> check_state(const Simulation& sim, const StoreState* before, std::vector<InvariantId>* checked) {
  std::vector<Failure> out;
  const StoreState& store = sim.store();
  const CollectorState& cs = sim.collector();
  const CollectorConfig& cfg = sim.config();
  auto eval = [&](InvariantId id, std::optional<Failure> f) {
    if (checked) checked->push_back(id);
    if (f) out.push_back(std::move(*f));
  };
  eval(InvariantId::Partition, check_partition(store));
  if (before) eval(InvariantId::Antitone, check_antitone_step(*before, store));
  if (cs.phase == Phase::Idle) return out;
  eval(InvariantId::Disjointness, check_disjointness(store, cs));
  if (axiom_applies(InvariantId::WSAxiom, cfg)) eval(InvariantId::WSAxiom, check_ws_axiom(store, cs));
  if (axiom_applies(InvariantId::DirtyAxiom, cfg)) eval(InvariantId::DirtyAxiom, check_dirty_axiom(store, cs));
  if (axiom_applies(InvariantId::DirtyCardsAxiom, cfg))
    eval(InvariantId::DirtyCardsAxiom, check_dirty_cards_axiom(store, cs, cfg));
  if (axiom_applies(InvariantId::SnapshotAxiom, cfg) && cs.phase != Phase::RootScan)
    if (const CycleRecord* c = sim.open_cycle())
      eval(InvariantId::SnapshotAxiom, check_snapshot_axiom(store, cs, c->start_store));
  return out;
}

namespace {

// Re-executes the actions of `trace`, checking every digest. `visit` runs
// after each action with the store from just before it.
void replay(const Scenario& scenario, const Trace& trace,
            const std::function<void(const Simulation&, const StoreState&, std::size_t actor)>& visit) {
  Simulation sim(scenario, CheckLevel::None);
  auto compare = [&](std::size_t from) {
    const auto& got = sim.trace().entries;
    for (std::size_t i = from; i < got.size(); ++i) {
      if (i >= trace.entries.size() || got[i].digest != trace.entries[i].digest || got[i].action != trace.entries[i].action)
        throw HarnessIntegrityFault("replay diverged at entry " + std::to_string(i));
    }
  };
  compare(0);
  for (std::size_t i = sim.trace().entries.size(); i < trace.entries.size();) {
    const TraceEntry& e = trace.entries[i];
    if (e.kind == TraceEntry::Kind::Note) {
      // Only a trailing illegal-op note has no action behind it.
      if (i + 1 == trace.entries.size()) break;
      throw HarnessIntegrityFault("replay missing note at entry " + std::to_string(i));
    }
    if (!sim.enabled(e.actor)) throw HarnessIntegrityFault("actor not enabled at entry " + std::to_string(i));
    StoreState before = sim.store();
    sim.step(e.actor);
    compare(i);
    i = sim.trace().entries.size();
    visit(sim, before, e.actor);
  }
}

}  // namespace

Verdict check_step_axiom(const Scenario& scenario, const Trace& trace, InvariantId id) {
  Verdict v;
  auto consider = [&](const Simulation& sim, const StoreState* before) {
    std::vector<InvariantId> checked;
    auto failures = check_state(sim, before, &checked);
    if (std::find(checked.begin(), checked.end(), id) == checked.end()) return;
    ++v.checks;
    if (v.failed()) return;
    auto f = std::find_if(failures.begin(), failures.end(), [id](const Failure& x) { return x.id == id; });
    if (f == failures.end()) {
      v.status = Verdict::Status::Pass;
      return;
    }
    v.status = Verdict::Status::Fail;
    v.detail = f->detail;
    for (NodeId n : f->nodes) v.nodes.push_back(sim.store().graph().name(n));
    v.entry = sim.trace().entries.size() - 1;
    v.slice = sim.trace().slice(*v.entry);
  };
  {
    Simulation sim(scenario, CheckLevel::None);
    consider(sim, nullptr);
  }
  replay(scenario, trace, [&](const Simulation& sim, const StoreState& before, std::size_t actor) {
    consider(sim, actor == kCollector ? nullptr : &before);
  });
  return v;
}

Verdict check_antitone(const Scenario& scenario, const Trace& trace) {
  Verdict v;
  replay(scenario, trace, [&](const Simulation& sim, const StoreState& before, std::size_t actor) {
    if (actor == kCollector) return;
    ++v.checks;
    if (v.failed()) return;
    if (auto f = check_antitone_step(before, sim.store())) {
      v.status = Verdict::Status::Fail;
      v.detail = f->detail;
      for (NodeId n : f->nodes) v.nodes.push_back(sim.store().graph().name(n));
      v.entry = sim.trace().entries.size() - 1;
    } else {
      v.status = Verdict::Status::Pass;
    }
  });
  return v;
}

std::map<InvariantId, std::optional<Failure>> check_cycle(const CycleRecord& cycle, const CollectorConfig& cfg) {
  std::map<InvariantId, std::optional<Failure>> out;
  const StoreState& end = cycle.end_store;
  std::string tag = "cycle " + std::to_string(cycle.index) + ": ";
  if (cycle.bound_exceeded) {
    out[InvariantId::Termination] =
        Failure{InvariantId::Termination,
                tag + "no sweep after " + std::to_string(cycle.collector_actions) + " collector actions (bound " +
                    std::to_string(cycle.step_bound) + ")",
                cycle.black_final};
  } else if (cycle.completed || cycle.safety_abort) {
    out[InvariantId::Termination] = std::nullopt;
  }
  if (cycle.safety_abort) {
    out[InvariantId::Safety] =
        Failure{InvariantId::Safety, tag + "sweep would recycle live " + fmt(end, cycle.unsafe), cycle.unsafe};
    return out;
  }
  if (!cycle.completed) return out;

  NodeSet live_end = oracle_live(end);
  NodeSet bad = cycle.result.recycled & live_end;
  out[InvariantId::Safety] =
      bad.empty() ? std::nullopt
                  : std::optional<Failure>(Failure{InvariantId::Safety, tag + "recycled live " + fmt(end, bad), bad});

  NodeSet kept = cycle.black_final;
  for (NodeId n : end.supply()) kept.insert(n);
  NodeSet live_start = oracle_live(cycle.start_store);
  NodeSet lost = live_end - kept, extra = kept - live_start;
  std::optional<Failure> aim;
  if (!lost.empty())
    aim = Failure{InvariantId::AimSandwich, tag + "live at sweep but not black: " + fmt(end, lost), lost};
  else if (!extra.empty())
    aim = Failure{InvariantId::AimSandwich, tag + "black but dead at cycle start: " + fmt(end, extra), extra};
  else if (cfg.reads_snapshot() && kept != live_start) {
    NodeSet missed = live_start - kept;
    aim = Failure{InvariantId::AimSandwich, tag + "snapshot-live but not black: " + fmt(end, missed), missed};
  }
  out[InvariantId::AimSandwich] = aim;

  NodeSet dead_start = oracle_live(cycle.start_store).complement();
  NodeSet kept_dead = dead_start - cycle.result.recycled;
  out[InvariantId::Liveness] =
      kept_dead.empty()
          ? std::nullopt
          : std::optional<Failure>(Failure{InvariantId::Liveness,
                                           tag + "dead at cycle start but not recycled: " + fmt(end, kept_dead),
                                           kept_dead});
  return out;
}

std::optional<Failure> check_liveness(const std::vector<CycleRecord>& cycles, const std::vector<StallRecord>& stalls) {
  std::vector<const CycleRecord*> done;
  for (const auto& c : cycles)
    if (c.completed) done.push_back(&c);
  for (std::size_t k = 0; k + 1 < done.size(); ++k) {
    NodeSet left = done[k]->result.floating - done[k + 1]->result.recycled;
    if (!left.empty())
      return Failure{InvariantId::Liveness,
                     "floating garbage of cycle " + std::to_string(done[k]->index) + " survived cycle " +
                         std::to_string(done[k + 1]->index) + ": " + fmt(done[k + 1]->end_store, left),
                     left};
  }
  for (const auto& s : stalls)
    if (!s.resumed_entry) {
      std::size_t n = cycles.empty() ? 0 : cycles.front().start_store.memory_size();
      return Failure{InvariantId::Liveness,
                     "mutator " + std::to_string(s.mutator) + " stalled at entry " + std::to_string(s.entry) +
                         " and never resumed",
                     NodeSet(n)};
    }
  return std::nullopt;
}

VerificationReport verify(const Simulation& sim, CheckLevel level) {
  VerificationReport r = level == CheckLevel::All ? sim.online() : VerificationReport{};
  r.scenario = sim.scenario().name;
  r.config = sim.config().describe();
  r.steps = sim.actions();
  r.cycles = std::count_if(sim.cycles().begin(), sim.cycles().end(), [](const auto& c) { return c.completed; });

  const HeapGraph& g = sim.store().graph();
  auto names = [&g](const NodeSet& s) {
    std::vector<std::string> v;
    for (NodeId n : s) v.push_back(g.name(n));
    return v;
  };
  auto record = [&](InvariantId id, const std::optional<Failure>& f, std::size_t entry) {
    if (!f) {
      r.pass(id);
      return;
    }
    bool first = !r.at(id).failed();
    r.fail(id, f->detail, names(f->nodes), entry);
    if (first) r.at(id).slice = sim.trace().slice(entry);
  };

  for (const auto& c : sim.cycles()) {
    std::size_t entry = c.completed || c.safety_abort ? c.end_entry : sim.trace().entries.size() - 1;
    if (level == CheckLevel::None) {
      if (c.safety_abort) record(InvariantId::Safety, check_cycle(c, sim.config())[InvariantId::Safety], entry);
      continue;
    }
    for (const auto& [id, f] : check_cycle(c, sim.config())) {
      if (level == CheckLevel::Safety && id != InvariantId::Safety && id != InvariantId::Termination) continue;
      record(id, f, entry);
    }
  }
  if (level == CheckLevel::None) return r;

  if (const auto& h = sim.halt(); h && h->reason == Simulation::Halt::Reason::Termination &&
                                  !r.at(InvariantId::Termination).failed())
    record(InvariantId::Termination, Failure{InvariantId::Termination, h->detail, h->nodes},
           sim.trace().entries.empty() ? 0 : sim.trace().entries.size() - 1);

  if (level == CheckLevel::All && !sim.halt()) {
    auto f = check_liveness(sim.cycles(), sim.stalls());
    std::size_t entry = sim.trace().entries.empty() ? 0 : sim.trace().entries.size() - 1;
    record(InvariantId::Liveness, f, entry);
  }
  return r;
}

}  // namespace gclab

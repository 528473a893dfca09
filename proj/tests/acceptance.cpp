// One line per acceptance criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gclab/collector.hpp"
#include "gclab/fixpoint.hpp"
#include "gclab/scenario.hpp"
#include "gclab/scheduler.hpp"
#include "gclab/store.hpp"
#include "gclab/verifier.hpp"
#include "support.hpp"

using namespace gclab;
using gclab::testing::graph_from_mask;
using gclab::testing::relax_reach;
using gclab::testing::set_from_mask;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

NodeSet all_roots(const StoreState& s) {
  NodeSet r(s.memory_size());
  for (const auto& pr : s.pre_roots())
    for (NodeId n : pr.slots) r.insert(n);
  return r;
}

NodeSet supply_of(const StoreState& s) {
  NodeSet r(s.memory_size());
  for (NodeId n : s.supply()) r.insert(n);
  return r;
}

NodeSet live_of(const StoreState& s) { return relax_reach(s.graph(), all_roots(s)) | supply_of(s); }

// ---------------------------------------------------------------------------

Outcome program_equivalence() {
  Outcome o;
  std::size_t cases = 0;
  auto check = [&](const HeapGraph& g, const NodeSet& roots, const std::string& tag) {
    ++cases;
    NodeSet expect = relax_reach(g, roots).complement();
    NodeSet raw = fixpoint::raw_dead_iteration(g, roots);
    NodeSet ws = fixpoint::workset_dead_iteration(g, roots);
    NodeSet opt = fixpoint::optimized_workset_dead_iteration(g, roots).dead;
    if (raw != expect || ws != expect || opt != expect) o.fail(tag + ": programs disagree");
  };
  for (std::size_t n = 0; n <= 4 && o.ok; ++n)
    for (std::uint64_t gm = 0; gm < (std::uint64_t{1} << (n * n)) && o.ok; ++gm) {
      HeapGraph g = graph_from_mask(n, gm);
      for (std::uint64_t rm = 0; rm < (std::uint64_t{1} << n); ++rm)
        check(g, set_from_mask(n, rm), "n=" + std::to_string(n) + " graph=" + std::to_string(gm));
    }
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000 && o.ok; ++i) {
    auto rg = gclab::testing::random_rooted_graph(rng, 50);
    check(rg.graph, rg.roots, "random #" + std::to_string(i));
  }
  if (o.ok) o.detail = std::to_string(cases) + " graph/root pairs";
  return o;
}

// Marks with every mutator absent, i.e. the world stopped.
NodeSet quiescent_black(const HeapGraph& g, const NodeSet& roots, std::vector<NodeId> supply,
                        const CollectorConfig& cfg) {
  StoreState store(g, std::move(supply), {PreRoot{kGlobals, roots.to_vector()}});
  CollectorState cs(store.memory_size());
  CollectorConfig c = cfg.normalized();
  start_cycle(cs, store, c);
  std::size_t guard = 0;
  while (cs.phase != Phase::Sweep && guard++ < 100000) collector_step(cs, store, c);
  return cs.black;
}

Outcome oracle_agreement() {
  Outcome o;
  std::size_t cases = 0;
  const Variant variants[] = {Variant::StopTheWorld, Variant::Workset, Variant::DirtySet, Variant::Snapshot,
                              Variant::DirtyCards};
  const GrayPolicy policies[] = {GrayPolicy::IteratedScan, GrayPolicy::StackDFS, GrayPolicy::QueueBFS,
                                 GrayPolicy::BoundedCache};
  std::size_t k = 0;
  auto check = [&](const HeapGraph& g, const NodeSet& roots, std::vector<NodeId> supply, const std::string& tag) {
    NodeSet seeds = roots;
    if (!supply.empty()) seeds.insert(supply.front());
    NodeSet expect = relax_reach(g, seeds);
    for (Variant v : variants) {
      CollectorConfig cfg = CollectorConfig::for_variant(v);
      cfg.granularity = (k & 1) ? Granularity::Fine : Granularity::Coarse;
      cfg.gray_policy = policies[(k >> 1) % 4];
      cfg.cache_capacity = 1 + k % 3;
      cfg.card_count = 1 + k % 4;
      ++k;
      ++cases;
      if (quiescent_black(g, roots, supply, cfg) != expect) o.fail(tag + " " + cfg.describe());
    }
  };
  for (std::size_t n = 0; n <= 4 && o.ok; ++n)
    for (std::uint64_t gm = 0; gm < (std::uint64_t{1} << (n * n)) && o.ok; ++gm) {
      HeapGraph g = graph_from_mask(n, gm);
      for (std::uint64_t rm = 0; rm < (std::uint64_t{1} << n); ++rm)
        check(g, set_from_mask(n, rm), {}, "n=" + std::to_string(n) + " graph=" + std::to_string(gm));
    }
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000 && o.ok; ++i) {
    auto rg = gclab::testing::random_rooted_graph(rng, 50);
    // Nodes with no arcs and not reachable can serve as supply.
    NodeSet reach = relax_reach(rg.graph, rg.roots);
    NodeSet targets(rg.graph.size());
    for (NodeId a = 0; a < rg.graph.size(); ++a)
      for (NodeId b : rg.graph.slots(a)) targets.insert(b);
    std::vector<NodeId> supply;
    for (NodeId a = 0; a < rg.graph.size() && supply.size() < 3; ++a)
      if (!reach.contains(a) && !targets.contains(a) && rg.graph.slots(a).empty()) supply.push_back(a);
    check(rg.graph, rg.roots, supply, "random #" + std::to_string(i));
  }
  if (o.ok) o.detail = std::to_string(cases) + " stopped-world cycles";
  return o;
}

// ---------------------------------------------------------------------------

Scenario builtin(const char* name) { return *builtin_scenario(name); }

Outcome bug_reproduction() {
  Outcome o;
  Scenario sc = builtin("dijkstra_bug");
  ExploreBounds bounds;
  bounds.max_states = 100000;
  auto none = explore_interleavings(sc, bounds, CheckLevel::Safety, true);
  auto it = none.counterexamples.find(InvariantId::Safety);
  if (it == none.counterexamples.end()) {
    o.fail("no barrier: no safety violation found");
  } else if (std::find(it->second.nodes.begin(), it->second.nodes.end(), "E") == it->second.nodes.end()) {
    o.fail("no barrier: violation does not name E");
  }
  // The scripted schedule itself must hit it too.
  if (o.ok && !run(sc).report.at(InvariantId::Safety).failed()) o.fail("scripted schedule does not violate Safety");
  std::string counts = "none: " + std::to_string(none.violating) + "/" + std::to_string(none.interleavings);
  for (const char* b : {"dijkstra", "steele", "yuasa"}) {
    Scenario s = sc;
    apply_collector_setting(s, "barrier", b);
    auto rep = explore_interleavings(s, bounds, CheckLevel::Safety, false);
    counts += std::string(", ") + b + ": " + std::to_string(rep.violating) + "/" + std::to_string(rep.interleavings);
    if (!rep.complete) o.fail(std::string(b) + ": exploration incomplete (" + rep.incomplete_reason + ")");
    if (rep.violating) o.fail(std::string(b) + ": " + std::to_string(rep.violating) + " violating interleavings");
  }
  if (o.ok) o.detail = "violating/interleavings " + counts;
  return o;
}

Outcome root_race() {
  Outcome o;
  Scenario sc = builtin("root_race");
  ExploreBounds bounds;
  auto bare = explore_interleavings(sc, bounds, CheckLevel::Safety, false);
  if (!bare.violations.count(InvariantId::Safety)) o.fail("unprotected: no safety violation");
  if (!run(sc).report.at(InvariantId::Safety).failed()) o.fail("unprotected: scripted race did not violate Safety");
  std::string counts = "unprotected: " + std::to_string(bare.violating) + "/" + std::to_string(bare.interleavings);
  for (const char* r : {"handshake", "load-barrier", "delete-barrier"}) {
    Scenario s = sc;
    apply_collector_setting(s, "root_scan", r);
    auto rep = explore_interleavings(s, bounds, CheckLevel::Safety, false);
    counts += std::string(", ") + r + ": " + std::to_string(rep.violating) + "/" + std::to_string(rep.interleavings);
    if (!rep.complete) o.fail(std::string(r) + ": exploration incomplete");
    if (rep.violating) o.fail(std::string(r) + ": " + std::to_string(rep.violating) + " violating interleavings");
  }
  if (o.ok) o.detail = "violating/interleavings " + counts;
  return o;
}

// ---------------------------------------------------------------------------

struct AxiomCase {
  Variant variant;
  InvariantId axiom;
};

// Random concurrent runs for the axiom suites; passing runs are handed to
// `each` for the aim-sandwich check.
Outcome axiom_suites(const std::function<void(const RunResult&, Outcome&)>& each, std::size_t* runs_out) {
  Outcome o;
  const AxiomCase cases[] = {{Variant::Workset, InvariantId::WSAxiom},
                             {Variant::DirtySet, InvariantId::DirtyAxiom},
                             {Variant::DirtyCards, InvariantId::DirtyCardsAxiom},
                             {Variant::Snapshot, InvariantId::SnapshotAxiom}};
  std::size_t checks = 0, runs = 0;
  for (const auto& c : cases) {
    std::mt19937_64 rng(77 + static_cast<int>(c.variant));
    for (int i = 0; i < 1000 && o.ok; ++i) {
      RandomScenarioParams p;
      p.nodes = 5 + rng() % 26;
      p.ops = rng() % 201;
      p.mutators = 1 + rng() % 3;
      p.supply = rng() % 4;
      p.max_out = 1 + rng() % 3;
      p.mutator_weight = 1 + rng() % 4;
      p.collector_weight = 1 + rng() % 4;
      p.seed = rng();
      CollectorConfig cfg = CollectorConfig::for_variant(c.variant);
      cfg.granularity = rng() & 1 ? Granularity::Fine : Granularity::Coarse;
      cfg.gray_policy = static_cast<GrayPolicy>(rng() % 4);
      cfg.cache_capacity = 1 + rng() % 4;
      cfg.card_count = 1 + rng() % 6;
      Scenario sc = random_scenario(p, cfg);
      RunResult r = run(sc, {CheckLevel::All, false});
      ++runs;
      const Verdict& v = r.report.at(c.axiom);
      checks += v.checks;
      std::string tag = to_string(c.axiom) + " run " + std::to_string(i) + " [" + r.report.config + "]";
      if (v.failed()) o.fail(tag + ": " + v.detail);
      else if (v.checks == 0) o.fail(tag + ": never checked");
      else if (!r.report.passed()) o.fail(tag + ": " + to_string(r.report.failures().front()) + " failed");
      else each(r, o);
    }
  }
  if (runs_out) *runs_out = runs;
  if (o.ok) o.detail = std::to_string(runs) + " runs, " + std::to_string(checks) + " axiom checks";
  return o;
}

void aim_sandwich(const RunResult& r, Outcome& o, std::size_t& cycles) {
  bool snapshot = r.sim.config().reads_snapshot();
  for (const auto& c : r.sim.cycles()) {
    if (!c.completed) continue;
    ++cycles;
    NodeSet kept = c.black_final | supply_of(c.end_store);
    NodeSet live_end = live_of(c.end_store), live_start = live_of(c.start_store);
    std::string tag = r.report.scenario + " cycle " + std::to_string(c.index);
    if (!live_end.subset_of(kept)) o.fail(tag + ": live_end not within black");
    if (!kept.subset_of(live_start)) o.fail(tag + ": black not within live_start");
    if (snapshot && kept != live_start) o.fail(tag + ": snapshot black differs from live_start");
  }
}

// ---------------------------------------------------------------------------

// After every collector action the adversary installs an arc from a black
// node to an active node the collector has not marked yet, so the barrier
// keeps dirtying nodes for as long as it can.
Outcome adversarial_termination() {
  Outcome o;
  std::size_t worst = 0, bound_seen = 0, dirtied = 0;
  for (std::size_t n : {8u, 20u, 40u}) {
    for (GrayPolicy gp : {GrayPolicy::StackDFS, GrayPolicy::QueueBFS, GrayPolicy::IteratedScan}) {
      HeapGraph g(n);
      // Binary tree under R = 0: gray stays nonempty for a while and most of
      // the heap starts active and white.
      for (NodeId a = 0; a < n; ++a)
        for (NodeId b : {2 * a + 1, 2 * a + 2})
          if (b < n) g.append_arc(a, b);
      StoreState store(g, {}, {PreRoot{kGlobals, {0}}, PreRoot{1, {}}});
      CollectorConfig cfg = CollectorConfig::for_variant(Variant::DirtySet);
      cfg.barrier = Barrier::DijkstraInstall;
      cfg.gray_policy = gp;
      cfg = cfg.normalized();
      CollectorState cs(n);
      start_cycle(cs, store, cfg);
      std::size_t actions = 1;
      bool swept = false;
      while (!swept) {
        if (cs.phase == Phase::Sweep) {
          NodeSet live = live_of(store);
          RecycleResult res = sweep(cs, store, cfg);
          if (res.recycled.intersects(live)) o.fail("recycled a live node");
          swept = true;
        } else {
          collector_step(cs, store, cfg);
        }
        ++actions;
        std::size_t bound = cycle_step_bound(n, 1, cs.stats.regrays);
        bound_seen = std::max(bound_seen, bound);
        if (actions > bound) {
          o.fail("n=" + std::to_string(n) + ": " + std::to_string(actions) + " actions exceed bound " +
                 std::to_string(bound));
          return o;
        }
        if (swept || cs.mutators_paused) continue;
        NodeSet white = store.active() - cs.marked();
        NodeId b = white.lowest_from(static_cast<NodeId>(n / 2));
        if (b >= n) b = white.lowest();
        NodeId a = cs.black.lowest();
        if (b >= n || a >= n) continue;
        MutatorOp op = MutatorOp::add_arc(a, b);
        apply_barrier(cs, store, cfg, op);
        store.apply(op);
        ++dirtied;
      }
      worst = std::max(worst, actions);
    }
  }
  if (o.ok)
    o.detail = "worst " + std::to_string(worst) + " collector actions (bound up to " + std::to_string(bound_seen) +
               "), " + std::to_string(dirtied) + " adversarial arcs";
  return o;
}

Outcome two_cycle_liveness() {
  Outcome o;
  RunResult r = run(builtin("two_cycle_floating"));
  if (!r.report.passed()) o.fail("report failed: " + to_string(r.report.failures().front()));
  auto res = r.results();
  if (res.size() < 2) {
    o.fail("expected two completed cycles, got " + std::to_string(res.size()));
    return o;
  }
  const HeapGraph& g = r.sim.store().graph();
  NodeSet xy(g.size(), {g.find("X"), g.find("Y")});
  if (res[0].floating != xy) o.fail("floating_1 = " + g.format(res[0].floating) + ", expected {X,Y}");
  if (!res[0].floating.subset_of(res[1].recycled)) o.fail("floating_1 not recycled by cycle 2");
  if (!res[1].floating.empty()) o.fail("floating_2 = " + g.format(res[1].floating));
  if (r.sim.cycles()[1].mutator_actions != 0) o.fail("mutators not quiescent in cycle 2");
  if (o.ok)
    o.detail = "floating_1=" + g.format(res[0].floating) + " recycled_2=" + g.format(res[1].recycled) +
               " floating_2={}";
  return o;
}

// ---------------------------------------------------------------------------

std::vector<MutatorOp> heap_moves(const StoreState& s) {
  std::vector<MutatorOp> out;
  std::size_t n = s.memory_size();
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = 0; b < n; ++b) {
      MutatorOp add = MutatorOp::add_arc(a, b), del = MutatorOp::del_arc(a, b);
      if (s.is_legal(add)) out.push_back(add);
      if (s.is_legal(del)) out.push_back(del);
    }
    MutatorOp alloc = MutatorOp::add_new(a);
    if (!s.supply().empty() && s.is_legal(alloc)) out.push_back(alloc);
  }
  return out;
}

Outcome lemma_suite() {
  using namespace fixpoint;
  Outcome o;
  std::size_t graphs = 0, sequences = 0;

  // Closure properties of the successor extension on every graph.
  for (std::size_t n = 1; n <= 4 && o.ok; ++n) {
    std::vector<NodeSet> subsets;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) subsets.push_back(set_from_mask(n, m));
    for (std::uint64_t gm = 0; gm < (std::uint64_t{1} << (n * n)) && o.ok; ++gm) {
      HeapGraph g = graph_from_mask(n, gm);
      ++graphs;
      LemmaReport rep = check_closure_lemmas(successor_extension(g), subsets);
      for (const auto& v : rep.verdicts)
        if (!v.passed) o.fail(v.lemma + " on graph " + std::to_string(gm) + ": " + v.witness);
      // Invariance along a micro-step run on the unchanged graph.
      NodeSet r = subsets[gm % subsets.size()];
      FnSequence one = FnSequence::constant(successor_extension(g));
      ApproxSequence run1 = micro_step_run(one, r, single_element_chooser());
      LemmaReport inv = check_sequence_lemmas(one, std::span<const NodeSet>(&r, 1), &run1);
      if (const auto* v = inv.find("invariance"); !v || !v->passed)
        o.fail("invariance on graph " + std::to_string(gm));
    }
  }

  // Antitone and decreasing along every sequence of up to two legal heap
  // ops, starting from every graph on up to three nodes (one optional
  // supply node) and from every four-node graph with root {0}.
  auto explore_from = [&](const StoreState& start, std::size_t depth, std::uint64_t tag) {
    std::vector<std::pair<std::vector<HeapGraph>, StoreState>> frontier{{{start.graph()}, start}};
    std::size_t n = start.memory_size();
    NodeSet r = all_roots(start) | supply_of(start);
    std::vector<NodeSet> bases;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      NodeSet x = set_from_mask(n, m);
      if (r.subset_of(x)) bases.push_back(x);
    }
    for (std::size_t d = 0; d < depth && o.ok; ++d) {
      std::vector<std::pair<std::vector<HeapGraph>, StoreState>> next;
      for (auto& [seq, st] : frontier)
        for (const MutatorOp& op : heap_moves(st)) {
          StoreState s2 = st;
          s2.apply(op);
          auto seq2 = seq;
          seq2.push_back(s2.graph());
          ++sequences;
          FnSequence fs = FnSequence::from_graphs(seq2);
          ApproxSequence run = micro_step_run(fs, r, seeded_chooser(tag + sequences));
          LemmaReport rep = check_sequence_lemmas(fs, bases, &run);
          for (const auto& v : rep.verdicts)
            if (!v.passed) o.fail(v.lemma + " after " + op.str(s2.graph()) + " (start " + std::to_string(tag) + "): " + v.witness);
          next.push_back({std::move(seq2), std::move(s2)});
        }
      frontier = std::move(next);
    }
  };
  for (std::size_t n = 1; n <= 3 && o.ok; ++n)
    for (std::uint64_t gm = 0; gm < (std::uint64_t{1} << (n * n)) && o.ok; ++gm)
      for (std::uint64_t rm = 0; rm < (std::uint64_t{1} << n) && o.ok; ++rm) {
        HeapGraph g = graph_from_mask(n, gm);
        NodeSet roots = set_from_mask(n, rm);
        explore_from(StoreState(g, {}, {PreRoot{kGlobals, roots.to_vector()}}), 2, gm);
        // Last node as supply when it is unreachable and has no arcs at all.
        NodeId last = static_cast<NodeId>(n - 1);
        bool isolated = g.slots(last).empty() && !relax_reach(g, roots).contains(last);
        for (NodeId a = 0; a < n && isolated; ++a)
          for (NodeId b : g.slots(a)) isolated &= b != last;
        if (isolated) explore_from(StoreState(g, {last}, {PreRoot{kGlobals, roots.to_vector()}}), 2, gm);
      }
  for (std::uint64_t gm = 0; gm < (std::uint64_t{1} << 16) && o.ok; ++gm)
    explore_from(StoreState(graph_from_mask(4, gm), {}, {PreRoot{kGlobals, {0}}}), 1, gm);

  if (o.ok) o.detail = std::to_string(graphs) + " graphs, " + std::to_string(sequences) + " op sequences";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> body;
  };
  std::size_t aim_cycles = 0, axiom_runs = 0;
  Outcome aim;
  std::vector<Criterion> criteria{
      {"program equivalence", program_equivalence},
      {"oracle agreement", oracle_agreement},
      {"bug reproduction and remedy", bug_reproduction},
      {"root race", root_race},
      {"axiom suites",
       [&] {
         return axiom_suites([&](const RunResult& r, Outcome&) { aim_sandwich(r, aim, aim_cycles); }, &axiom_runs);
       }},
      {"aim sandwich",
       [&] {
         Outcome o = aim;
         if (axiom_runs == 0) o.fail("no runs from the axiom suites");
         if (o.ok) o.detail = std::to_string(aim_cycles) + " completed cycles";
         return o;
       }},
      {"termination under adversarial dirtying", adversarial_termination},
      {"liveness across cycles", two_cycle_liveness},
      {"lemma suite", lemma_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].body();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %-40s %s  (%.1fs) %s\n", i + 1, criteria[i].name, o.ok ? "PASS" : "FAIL", s,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}

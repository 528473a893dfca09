#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gclab/scheduler.hpp"
#include "gclab/verifier.hpp"

using namespace gclab;

namespace {

std::size_t factorial(std::size_t n) { return n <= 1 ? 1 : n * factorial(n - 1); }

// Mutators whose ops are legal in any order (self-loops on the root), with
// the collector switched off.
Scenario independent_mutators(const std::vector<std::size_t>& lengths) {
  Scenario sc;
  sc.name = "independent";
  sc.graph = HeapGraph(1, {"R"});
  sc.pre_roots = {PreRoot{kGlobals, {0}}};
  for (std::size_t m = 0; m < lengths.size(); ++m) {
    sc.pre_roots.push_back(PreRoot{m + 1, {}});
    sc.mutators.push_back({std::vector<MutatorOp>(lengths[m], MutatorOp::add_arc(0, 0)), std::nullopt});
  }
  sc.collector_enabled = false;
  return sc;
}

std::vector<std::string> actions(const Trace& t) {
  std::vector<std::string> out;
  for (const auto& e : t.entries)
    if (e.kind == TraceEntry::Kind::Action) out.push_back(e.action + "@" + std::to_string(e.actor));
  return out;
}

}  // namespace

TEST_CASE("interleaving count is the multinomial coefficient") {
  for (const auto& lengths : std::vector<std::vector<std::size_t>>{{3, 2}, {2, 2, 1}, {1, 1, 1, 1}, {4}}) {
    std::size_t total = 0, denom = 1;
    for (std::size_t l : lengths) {
      total += l;
      denom *= factorial(l);
    }
    auto rep = explore_interleavings(independent_mutators(lengths), {}, CheckLevel::Safety, false);
    CHECK(rep.complete);
    CHECK(rep.interleavings == factorial(total) / denom);
  }
}

TEST_CASE("no collector steps: no cycle ends and nothing is violated") {
  Scenario sc = *builtin_scenario("dijkstra_bug");
  sc.collector_enabled = false;
  auto rep = explore_interleavings(sc, {}, CheckLevel::All, false);
  CHECK(rep.complete);
  CHECK(rep.violating == 0);
  CHECK(rep.interleavings == 1);
}

TEST_CASE("explorer reports incomplete when a bound is hit") {
  ExploreBounds b;
  b.max_states = 10;
  auto rep = explore_interleavings(*builtin_scenario("dijkstra_bug"), b);
  CHECK_FALSE(rep.complete);
  b = {};
  b.max_nodes = 3;
  CHECK_FALSE(explore_interleavings(*builtin_scenario("dijkstra_bug"), b).complete);
}

TEST_CASE("traces are deterministic") {
  RandomScenarioParams p;
  p.nodes = 20;
  p.mutators = 3;
  p.ops = 100;
  p.seed = 42;
  Scenario sc = random_scenario(p, CollectorConfig::for_variant(Variant::DirtySet));
  RunResult a = run(sc), b = run(sc);
  CHECK(a.sim.trace().str() == b.sim.trace().str());
  CHECK(a.report.to_json() == b.report.to_json());
}

TEST_CASE("a frozen run replays the same actions") {
  RandomScenarioParams p;
  p.nodes = 15;
  p.mutators = 2;
  p.ops = 60;
  p.seed = 7;
  Scenario sc = random_scenario(p, CollectorConfig::for_variant(Variant::Snapshot));
  RunResult r = run(sc);
  Scenario frozen = freeze(r.sim);
  CHECK(frozen.schedule.kind == ScheduleKind::Scripted);
  RunResult again = run(frozen);
  CHECK(actions(again.sim.trace()) == actions(r.sim.trace()));
  CHECK(again.sim.store().digest() == r.sim.store().digest());
}

TEST_CASE("counterexamples are minimized and still reproduce") {
  RunResult r = run(*builtin_scenario("dijkstra_bug"));
  REQUIRE(r.counterexample);
  const auto& cx = *r.counterexample;
  CHECK(cx.invariant == InvariantId::Safety);
  CHECK(cx.nodes == std::vector<std::string>{"E"});
  RunResult replay = run(cx.scenario, {CheckLevel::All, false});
  CHECK(replay.report.at(InvariantId::Safety).failed());
  CHECK(cx.scenario.mutators[0].script.size() == 2);
  CHECK(cx.trace.find("addArc A E") != std::string::npos);
}

TEST_CASE("allocation stalls are recorded and resumed") {
  RunResult r = run(*builtin_scenario("alloc_stall"));
  CHECK(r.report.passed());
  REQUIRE(r.sim.stalls().size() == 1);
  CHECK(r.sim.stalls()[0].resumed_entry);
  CHECK(r.sim.executed(1).size() == 3);
  std::string t = r.sim.trace().str();
  CHECK(t.find("stall") != std::string::npos);
  CHECK(t.find("resume") != std::string::npos);
}

TEST_CASE("a mutator token waits out a stop-all root scan") {
  Scenario sc = *builtin_scenario("root_race");
  apply_collector_setting(sc, "root_scan", "handshake");
  sc.schedule.tokens = {"c", "m1"};
  Simulation sim(sc);
  sim.run_token("c");
  CHECK(sim.mutators_paused());
  CHECK(sim.blocked_reason(1) == "paused");
  sim.run_token("m1");
  CHECK(sim.executed(1).size() == 1);
  CHECK(sim.collector().phase == Phase::Marking);
}

TEST_CASE("an illegal scripted op stops the run with an error") {
  Scenario sc = parse_scenario(R"([graph]
a: b
b:
c:
[preroots]
0: a
[mutator 1]
addArc a c
[schedule]
scripted m1
)");
  RunResult r = run(sc);
  REQUIRE(r.error);
  CHECK(r.error->find("not active") != std::string::npos);
  CHECK_FALSE(r.counterexample);
}

TEST_CASE("workloads are deterministic and legal") {
  RandomScenarioParams p;
  p.nodes = 50;
  p.supply = 5;
  p.seed = 3;
  Scenario sc = random_scenario(p, CollectorConfig{});
  WorkloadParams w;
  w.op_count = 500;
  w.local = 1;
  w.seed = 99;
  auto a = generate_workload(w, sc.initial_store(), 1);
  auto b = generate_workload(w, sc.initial_store(), 1);
  CHECK(a == b);
  CHECK(a.size() == 500);
  StoreState st = sc.initial_store();
  for (const auto& op : a) {
    REQUIRE(st.is_legal(op));
    st.apply(op);
  }
}

TEST_CASE("without deletions or drops the live set never shrinks") {
  RandomScenarioParams p;
  p.nodes = 30;
  p.supply = 4;
  p.seed = 8;
  Scenario sc = random_scenario(p, CollectorConfig{});
  WorkloadParams w;
  w.op_count = 300;
  w.del_arc = 0;
  w.local = 0;
  w.seed = 5;
  StoreState st = sc.initial_store();
  NodeSet live = oracle_live(st);
  for (const auto& op : generate_workload(w, st, 1)) {
    st.apply(op);
    CHECK(oracle_live(st) == live);
  }
}

TEST_CASE("long workloads keep the heap invariants") {
  RandomScenarioParams p;
  p.nodes = 50;
  p.supply = 5;
  p.mutators = 1;
  p.ops = 10000;
  p.seed = 12;
  Scenario sc = random_scenario(p, CollectorConfig{});
  sc.collector_enabled = false;
  RunResult r = run(sc, {CheckLevel::All, false});
  CHECK(r.sim.actions() > 1000);
  CHECK(r.report.at(InvariantId::Partition).status == Verdict::Status::Pass);
  CHECK(r.report.at(InvariantId::Antitone).status == Verdict::Status::Pass);
}

TEST_CASE("random schedules honor the collector weight") {
  RandomScenarioParams p;
  p.nodes = 20;
  p.ops = 100;
  p.seed = 1;
  p.mutator_weight = 0;
  p.collector_weight = 1;
  Scenario sc = random_scenario(p, CollectorConfig::for_variant(Variant::Workset));
  RunResult r = run(sc);
  // With mutator weight 0 the first cycle completes before any mutator moves.
  REQUIRE_FALSE(r.sim.cycles().empty());
  CHECK(r.sim.cycles()[0].mutator_actions == 0);
  CHECK(r.report.passed());
}

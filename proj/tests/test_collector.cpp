#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gclab/collector.hpp"
#include "gclab/scheduler.hpp"
#include "gclab/verifier.hpp"
#include "support.hpp"

using namespace gclab;

namespace {

// R -> A -> B, R -> C; D -> E unreachable.
StoreState store5(std::size_t mutators = 0) {
  HeapGraph g(6, {"R", "A", "B", "C", "D", "E"});
  g.append_arc(0, 1);
  g.append_arc(1, 2);
  g.append_arc(0, 3);
  g.append_arc(4, 5);
  std::vector<PreRoot> pr{PreRoot{kGlobals, {0}}};
  for (std::size_t m = 1; m <= mutators; ++m) pr.push_back(PreRoot{m, {}});
  return StoreState(g, {}, pr);
}

void run_until(CollectorState& cs, StoreState& st, const CollectorConfig& cfg, Phase p) {
  for (int i = 0; i < 1000 && cs.phase != p; ++i) collector_step(cs, st, cfg);
  REQUIRE(cs.phase == p);
}

}  // namespace

TEST_CASE("names round-trip") {
  for (Variant v : {Variant::StopTheWorld, Variant::Workset, Variant::DirtySet, Variant::Snapshot, Variant::DirtyCards})
    CHECK(parse_variant(to_string(v)) == v);
  for (Barrier b : {Barrier::None, Barrier::DijkstraInstall, Barrier::SteeleInstall, Barrier::YuasaDelete})
    CHECK(parse_barrier(to_string(b)) == b);
  for (GrayPolicy p : {GrayPolicy::IteratedScan, GrayPolicy::StackDFS, GrayPolicy::QueueBFS, GrayPolicy::BoundedCache})
    CHECK(parse_gray_policy(to_string(p)) == p);
  for (RootScan r : {RootScan::StopAllHandshake, RootScan::LoadBarrier, RootScan::DeleteBarrier, RootScan::Unprotected})
    CHECK(parse_root_scan(to_string(r)) == r);
  CHECK_FALSE(parse_variant("bogus"));
}

TEST_CASE("default barriers and normalization") {
  CHECK(CollectorConfig::for_variant(Variant::Snapshot).barrier == Barrier::YuasaDelete);
  CHECK(CollectorConfig::for_variant(Variant::DirtySet).barrier == Barrier::DijkstraInstall);
  CollectorConfig stw = CollectorConfig::for_variant(Variant::StopTheWorld);
  stw.barrier = Barrier::SteeleInstall;
  stw.root_scan = RootScan::Unprotected;
  CHECK(stw.normalized().barrier == Barrier::None);
  CHECK(stw.normalized().root_scan == RootScan::StopAllHandshake);
}

TEST_CASE("cards split memory evenly") {
  CHECK(card_of(0, 10, 3) == 0);
  CHECK(card_of(9, 10, 3) == 2);
  CHECK(card_members(1, 10, 3) == NodeSet(10, {4, 5, 6}));
  CHECK(card_of(7, 10, 1) == 0);
}

TEST_CASE("stopped world marks exactly the reachable nodes and recycles the rest") {
  for (Granularity gr : {Granularity::Coarse, Granularity::Fine})
    for (GrayPolicy gp : {GrayPolicy::IteratedScan, GrayPolicy::StackDFS, GrayPolicy::QueueBFS, GrayPolicy::BoundedCache}) {
      StoreState st = store5();
      CollectorConfig cfg = CollectorConfig::for_variant(Variant::StopTheWorld);
      cfg.granularity = gr;
      cfg.gray_policy = gp;
      cfg.cache_capacity = 1;
      cfg = cfg.normalized();
      CollectorState cs(st.memory_size());
      start_cycle(cs, st, cfg);
      run_until(cs, st, cfg, Phase::Sweep);
      CHECK(cs.black == NodeSet(6, {0, 1, 2, 3}));
      RecycleResult r = sweep(cs, st, cfg);
      CHECK(r.recycled == NodeSet(6, {4, 5}));
      CHECK(r.floating.empty());
      CHECK(cs.phase == Phase::Idle);
      CHECK(st.supply().size() == 2);
    }
}

TEST_CASE("the supply head is shaded at cycle start") {
  HeapGraph g(3);
  StoreState st(g, {2}, {PreRoot{kGlobals, {0}}});
  CollectorConfig cfg = CollectorConfig::for_variant(Variant::Workset);
  CollectorState cs(3);
  start_cycle(cs, st, cfg);
  CHECK(cs.gray == NodeSet(3, {0, 2}));
}

TEST_CASE("Dijkstra records the target, Steele regrays the source, Yuasa records deletions") {
  StoreState st = store5(1);
  CollectorConfig cfg = CollectorConfig::for_variant(Variant::Workset);
  cfg.root_scan = RootScan::LoadBarrier;
  CollectorState cs(6);
  start_cycle(cs, st, cfg);
  run_until(cs, st, cfg, Phase::Marking);
  mark_step(cs, st, cfg);  // R black; A, C gray
  REQUIRE(cs.black.contains(0));

  SUBCASE("dijkstra") {
    cs.gray.erase(3);
    CHECK(apply_barrier(cs, st, cfg, MutatorOp::add_arc(0, 3)));
    CHECK(cs.gray.contains(3));
  }
  SUBCASE("steele") {
    cfg.barrier = Barrier::SteeleInstall;
    CHECK(apply_barrier(cs, st, cfg, MutatorOp::add_arc(0, 1)));
    CHECK(cs.gray.contains(0));
    CHECK_FALSE(cs.black.contains(0));
    CHECK(cs.stats.regrays == 1);
  }
  SUBCASE("yuasa") {
    cfg.barrier = Barrier::YuasaDelete;
    CHECK_FALSE(apply_barrier(cs, st, cfg, MutatorOp::add_arc(0, 2)));
    CHECK(apply_barrier(cs, st, cfg, MutatorOp::del_arc(1, 2)));
    CHECK(cs.gray.contains(2));
  }
  SUBCASE("load barrier") {
    CHECK(apply_barrier(cs, st, cfg, MutatorOp::load(1, 2)));
    CHECK(cs.gray.contains(2));
  }
}

TEST_CASE("dirty family: barrier goes to dirty, cleanup drains it under pause") {
  StoreState st = store5();
  CollectorConfig cfg = CollectorConfig::for_variant(Variant::DirtyCards);
  cfg.card_count = 3;
  CollectorState cs(6);
  start_cycle(cs, st, cfg);
  run_until(cs, st, cfg, Phase::Marking);
  mark_step(cs, st, cfg);
  cs.gray.erase(1);  // pretend A is still white
  CHECK(apply_barrier(cs, st, cfg, MutatorOp::add_arc(0, 1)));
  CHECK(cs.dirty == NodeSet(6, {1}));
  CHECK(dirty_card_filter(cs) == std::vector<std::size_t>{0});
  CHECK_FALSE(check_dirty_cards_axiom(st, cs, cfg));
  while (!cs.gray.empty()) mark_step(cs, st, cfg);
  collector_step(cs, st, cfg);
  CHECK(cs.phase == Phase::DirtyCleanup);
  CHECK(cs.mutators_paused);
  CHECK(cs.dirty.empty());
  CHECK(dirty_card_filter(cs).empty());
  run_until(cs, st, cfg, Phase::Sweep);
  CHECK(cs.black == NodeSet(6, {0, 1, 2, 3}));
}

TEST_CASE("interim drains respect the budget") {
  StoreState st = store5();
  CollectorConfig cfg = CollectorConfig::for_variant(Variant::DirtySet);
  CollectorState cs(6);
  start_cycle(cs, st, cfg);
  run_until(cs, st, cfg, Phase::Marking);
  cs.dirty = NodeSet(6, {4, 5});
  interim_dirty_drain(cs, st, cfg, 1);
  CHECK(cs.dirty == NodeSet(6, {5}));
  CHECK(cs.gray.contains(4));
  CHECK(cs.stats.drains == 1);
}

TEST_CASE("fine steps: one arc per step, blacken after the last") {
  StoreState st = store5();
  CollectorConfig cfg = CollectorConfig::for_variant(Variant::Workset);
  cfg.granularity = Granularity::Fine;
  CollectorState cs(6);
  start_cycle(cs, st, cfg);
  run_until(cs, st, cfg, Phase::Marking);
  fine_step(cs, st, cfg);
  CHECK(cs.gray == NodeSet(6, {0, 1}));
  fine_step(cs, st, cfg);
  CHECK(cs.gray == NodeSet(6, {0, 1, 3}));
  fine_step(cs, st, cfg);
  CHECK(cs.black == NodeSet(6, {0}));
}

TEST_CASE("the printed guard never blackens a node whose successor is marked") {
  // R -> A -> R: once R is gray, A's only successor is marked, so A idles.
  Scenario sc;
  sc.name = "printed";
  sc.graph = HeapGraph(2, {"R", "A"});
  sc.graph.append_arc(0, 1);
  sc.graph.append_arc(1, 0);
  sc.pre_roots = {PreRoot{kGlobals, {0}}};
  sc.collector = CollectorConfig::for_variant(Variant::Workset);
  sc.collector.granularity = Granularity::Fine;
  sc.collector.blacken_guard = BlackenGuard::Printed;
  RunResult r = run(sc, {CheckLevel::All, false});
  CHECK(r.report.at(InvariantId::Termination).failed());

  sc.collector.blacken_guard = BlackenGuard::AllMarked;
  CHECK(run(sc, {CheckLevel::All, false}).report.passed());
}

TEST_CASE("sweep refuses to recycle live nodes and leaves the store alone") {
  StoreState st = store5();
  CollectorConfig cfg = CollectorConfig::for_variant(Variant::Workset);
  CollectorState cs(6);
  start_cycle(cs, st, cfg);
  cs.phase = Phase::Sweep;
  cs.gray.clear();
  cs.black = NodeSet(6, {0});
  auto digest = st.digest();
  try {
    sweep(cs, st, cfg);
    FAIL("expected SafetyViolation");
  } catch (const SafetyViolation& e) {
    CHECK(e.nodes() == NodeSet(6, {1, 2, 3}));
  }
  CHECK(st.digest() == digest);
}

TEST_CASE("snapshot marking reads the heap as of cycle start") {
  StoreState st = store5();
  CollectorConfig cfg = CollectorConfig::for_variant(Variant::Snapshot);
  CollectorState cs(6);
  start_cycle(cs, st, cfg);
  run_until(cs, st, cfg, Phase::Marking);
  // Cut A -> B before A is scanned; the overlay still shows the arc.
  MutatorOp op = MutatorOp::del_arc(1, 2);
  apply_barrier(cs, st, cfg, op);
  st.apply(op);
  run_until(cs, st, cfg, Phase::Sweep);
  CHECK(cs.black == NodeSet(6, {0, 1, 2, 3}));
  RecycleResult r = sweep(cs, st, cfg);
  CHECK(r.floating == NodeSet(6, {2}));
  CHECK_FALSE(st.clone_on_write());
}

TEST_CASE("phase errors are collector faults") {
  StoreState st = store5();
  CollectorConfig cfg;
  CollectorState cs(6);
  CHECK_THROWS_AS(coarse_step(cs, st, cfg), CollectorFault);
  CHECK_THROWS_AS(sweep(cs, st, cfg), CollectorFault);
  start_cycle(cs, st, cfg);
  CHECK_THROWS_AS(start_cycle(cs, st, cfg), CollectorFault);
}

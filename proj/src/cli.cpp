#include "gclab/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "gclab/fixpoint.hpp"
#include "gclab/scenario.hpp"
#include "gclab/scheduler.hpp"
#include "gclab/verifier.hpp"

namespace gclab {

namespace {

struct Source {
  std::string path;
  std::string builtin;
};

struct Overrides {
  std::string collector, barrier, granularity, gray_policy, root_scan, blacken_guard;
  std::string cards, cache;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_source(CLI::App* app, Source& src) {
  app->add_option("scenario", src.path, "Scenario file");
  app->add_option("--builtin", src.builtin, "Built-in scenario name");
}

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--collector", o.collector, "stw|workset|dirtyset|snapshot|dirtycards");
  app->add_option("--barrier", o.barrier, "none|dijkstra|steele|yuasa");
  app->add_option("--granularity", o.granularity, "coarse|fine");
  app->add_option("--gray-policy", o.gray_policy, "scan|stack|queue|cache");
  app->add_option("--cache", o.cache, "Bounded cache capacity");
  app->add_option("--cards", o.cards, "Card count (dirtycards)");
  app->add_option("--root-scan", o.root_scan, "handshake|load-barrier|delete-barrier|unprotected");
  app->add_option("--blacken-guard", o.blacken_guard, "all-marked|cursor-only|printed");
}

Scenario load(const Source& src) {
  if (src.path.empty() == src.builtin.empty())
    throw UsageError("give exactly one of a scenario file or --builtin");
  if (!src.builtin.empty()) {
    auto sc = builtin_scenario(src.builtin);
    if (!sc) throw UsageError("unknown builtin '" + src.builtin + "'");
    return *sc;
  }
  return load_scenario(src.path);
}

void apply(Scenario& sc, const Overrides& o) {
  // The variant goes first since it resets the barrier to its default.
  std::pair<const char*, const std::string*> order[] = {
      {"variant", &o.collector},       {"barrier", &o.barrier},     {"granularity", &o.granularity},
      {"gray_policy", &o.gray_policy}, {"cache", &o.cache},         {"cards", &o.cards},
      {"root_scan", &o.root_scan},     {"blacken_guard", &o.blacken_guard},
  };
  for (auto [key, value] : order)
    if (!value->empty()) apply_collector_setting(sc, key, *value);
}

CheckLevel check_level(const std::string& s) {
  auto c = parse_check_level(s);
  if (!c) throw UsageError("--check must be all, safety or none");
  return *c;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

std::string counterexample_text(const Counterexample& cx) {
  std::string out = "# violates " + to_string(cx.invariant) + ": " + cx.detail + "\n";
  std::istringstream trace(cx.trace);
  for (std::string line; std::getline(trace, line);) out += "#   " + line + "\n";
  return out + cx.scenario.to_text();
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

void print_stats(std::ostream& out, std::size_t k, const CycleStats& s) {
  std::pair<const char*, std::size_t> rows[] = {
      {"micro_steps", s.micro_steps},   {"coarse_steps", s.coarse_steps},   {"gray_arc_steps", s.gray_arc_steps},
      {"blacken_steps", s.blacken_steps}, {"idle_steps", s.idle_steps},     {"barrier_hits", s.barrier_hits},
      {"regrays", s.regrays},           {"rescans", s.rescans},             {"cache_overflows", s.cache_overflows},
      {"drains", s.drains},             {"root_scans", s.root_scans},       {"cleanup_steps", s.cleanup_steps},
      {"allocations", s.allocations},
  };
  for (auto [key, v] : rows) out << "cycle." << k << '.' << key << '=' << v << '\n';
}

nlohmann::json stats_json(const CycleStats& s) {
  return {{"micro_steps", s.micro_steps},   {"coarse_steps", s.coarse_steps},   {"gray_arc_steps", s.gray_arc_steps},
          {"blacken_steps", s.blacken_steps}, {"idle_steps", s.idle_steps},     {"barrier_hits", s.barrier_hits},
          {"regrays", s.regrays},           {"rescans", s.rescans},             {"cache_overflows", s.cache_overflows},
          {"drains", s.drains},             {"root_scans", s.root_scans},       {"cleanup_steps", s.cleanup_steps},
          {"allocations", s.allocations}};
}

std::string default_cx_path(const Scenario& sc) {
  return (sc.name.empty() ? std::string("scenario") : sc.name) + ".counterexample.scn";
}

// ---------------------------------------------------------------------------

struct RunArgs {
  Source src;
  Overrides o;
  std::optional<std::uint64_t> seed;
  std::string check = "all";
  std::string trace_out, report_out, cx_out;
  bool no_minimize = false;
  bool random = false;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  Scenario sc = load(a.src);
  apply(sc, a.o);
  if (a.random) sc.schedule.kind = ScheduleKind::Random;
  if (a.seed) {
    sc.schedule.seed = *a.seed;
    for (std::size_t m = 0; m < sc.mutators.size(); ++m)
      if (sc.mutators[m].workload) sc.mutators[m].workload->seed = *a.seed * 1000003 + m;
  }
  RunResult r = run(sc, {check_level(a.check), !a.no_minimize});
  const HeapGraph& g = r.sim.store().graph();

  out << r.report.summary();
  std::size_t k = 0;
  for (const auto& c : r.results()) {
    out << "cycle " << k << " recycled=" << g.format(c.recycled) << " floating=" << g.format(c.floating) << '\n';
    print_stats(out, k, c.stats);
    ++k;
  }
  if (!a.trace_out.empty()) write_file(a.trace_out, r.sim.trace().str());
  if (!a.report_out.empty()) {
    nlohmann::json j = r.report.to_json();
    auto& cyc = j["recycle"] = nlohmann::json::array();
    for (const auto& c : r.results()) {
      std::vector<std::string> rec, flo;
      for (NodeId n : c.recycled) rec.push_back(g.name(n));
      for (NodeId n : c.floating) flo.push_back(g.name(n));
      cyc.push_back({{"recycled", rec}, {"floating", flo}, {"stats", stats_json(c.stats)}});
    }
    if (r.error) j["error"] = *r.error;
    write_file(a.report_out, j.dump(2) + "\n");
  }
  if (r.error) {
    err << "error: " << *r.error << '\n';
    return kExitUsage;
  }
  if (r.counterexample) {
    const auto& cx = *r.counterexample;
    std::string path = a.cx_out.empty() ? default_cx_path(sc) : a.cx_out;
    write_file(path, counterexample_text(cx));
    out << "violation " << to_string(cx.invariant) << " nodes=" << join(cx.nodes) << '\n';
    out << "counterexample: " << path << '\n';
    return kExitViolation;
  }
  return r.report.passed() ? kExitPass : kExitViolation;
}

// ---------------------------------------------------------------------------

struct ExploreArgs {
  Source src;
  Overrides o;
  std::optional<std::size_t> max_depth, max_states;
  std::size_t max_nodes = 0, max_ops = 0;
  std::string check = "safety";
  std::string report_out, cx_out;
  bool no_minimize = false;
};

int cmd_explore(const ExploreArgs& a, std::ostream& out, std::ostream&) {
  Scenario sc = load(a.src);
  apply(sc, a.o);
  ExploreBounds b;
  b.max_depth = a.max_depth.value_or(sc.schedule.max_depth);
  b.max_states = a.max_states.value_or(sc.schedule.max_states);
  b.max_nodes = a.max_nodes;
  b.max_ops = a.max_ops;
  ExplorationReport rep = explore_interleavings(sc, b, check_level(a.check), !a.no_minimize);
  out << "scenario " << sc.name << "  [" << sc.collector.normalized().describe() << "]\n";
  out << "states=" << rep.states << " interleavings=" << rep.interleavings << " violating=" << rep.violating
      << " complete=" << (rep.complete ? "yes" : "no") << '\n';
  if (!rep.complete) out << "incomplete: " << rep.incomplete_reason << '\n';
  for (const auto& [id, n] : rep.violations) {
    const auto& cx = rep.counterexamples.at(id);
    out << "violation " << to_string(id) << " interleavings=" << n << " nodes=" << join(cx.nodes)
        << " schedule=" << join(cx.scenario.schedule.tokens, " ") << '\n';
  }
  if (!a.report_out.empty()) write_file(a.report_out, rep.to_json().dump(2) + "\n");
  if (!rep.violations.empty()) {
    const auto& cx = rep.counterexamples.begin()->second;
    std::string path = a.cx_out.empty() ? default_cx_path(sc) : a.cx_out;
    write_file(path, counterexample_text(cx));
    out << "counterexample: " << path << '\n';
    return kExitViolation;
  }
  return rep.complete ? kExitPass : kExitIncomplete;
}

// ---------------------------------------------------------------------------

struct MatrixArgs {
  Source src;
  Overrides o;
  std::vector<std::string> collectors, barriers, granularities, gray_policies, root_scans;
  std::string check = "all";
  bool explore = false;
  std::size_t max_states = 100'000;
};

int cmd_matrix(const MatrixArgs& a, std::ostream& out, std::ostream&) {
  Scenario base = load(a.src);
  apply(base, a.o);
  auto axis = [](const std::vector<std::string>& v) { return v.empty() ? std::vector<std::string>{""} : v; };
  struct Row {
    std::string config, verdict, failed;
    std::size_t recycled = 0, floating = 0, micro = 0;
  };
  std::vector<Row> rows;
  for (const auto& c : axis(a.collectors))
    for (const auto& b : axis(a.barriers))
      for (const auto& gr : axis(a.granularities))
        for (const auto& gp : axis(a.gray_policies))
          for (const auto& rs : axis(a.root_scans)) {
            Scenario sc = base;
            Overrides cell;
            cell.collector = c;
            cell.barrier = b;
            cell.granularity = gr;
            cell.gray_policy = gp;
            cell.root_scan = rs;
            apply(sc, cell);
            Row row;
            row.config = sc.collector.normalized().describe();
            std::vector<std::string> failed;
            if (a.explore) {
              ExploreBounds bounds;
              bounds.max_states = a.max_states;
              auto rep = explore_interleavings(sc, bounds, check_level(a.check), false);
              for (const auto& [id, n] : rep.violations) failed.push_back(to_string(id));
              row.verdict = !failed.empty() ? "FAIL" : rep.complete ? "pass" : "incomplete";
            } else {
              RunResult r = run(sc, {check_level(a.check), false});
              for (InvariantId id : r.report.failures()) failed.push_back(to_string(id));
              row.verdict = r.error ? "error" : failed.empty() ? "pass" : "FAIL";
              for (const auto& res : r.results()) {
                row.recycled += res.recycled.size();
                row.floating += res.floating.size();
                row.micro += res.stats.micro_steps;
              }
            }
            row.failed = failed.empty() ? "-" : join(failed);
            rows.push_back(std::move(row));
          }
  std::size_t w = 6;
  for (const auto& r : rows) w = std::max(w, r.config.size());
  out << std::left << std::setw(w + 2) << "config" << std::setw(11) << "verdict" << std::setw(9) << "recycled"
      << std::setw(9) << "floating" << std::setw(7) << "micro"
      << "violated\n";
  bool bad = false;
  for (const auto& r : rows) {
    out << std::left << std::setw(w + 2) << r.config << std::setw(11) << r.verdict << std::setw(9) << r.recycled
        << std::setw(9) << r.floating << std::setw(7) << r.micro << r.failed << '\n';
    bad |= r.verdict == "FAIL" || r.verdict == "error";
  }
  out << rows.size() << " cells, " << (bad ? "violations found" : "all pass") << '\n';
  return bad ? kExitViolation : kExitPass;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::size_t nodes = 30, ops = 200, runs = 20, mutators = 2;
  std::uint64_t seed = 1;
  std::vector<std::string> collectors;
  std::string check = "none";
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream&) {
  std::vector<std::string> variants = a.collectors;
  if (variants.empty()) variants = {"stw", "workset", "dirtyset", "snapshot", "dirtycards"};
  CheckLevel level = check_level(a.check);
  bool bad = false;
  out << std::left << std::setw(12) << "variant" << std::setw(8) << "runs" << std::setw(10) << "actions"
      << std::setw(10) << "cycles" << std::setw(10) << "ms" << "actions/s\n";
  for (const auto& v : variants) {
    auto variant = parse_variant(v);
    if (!variant) throw UsageError("unknown collector '" + v + "'");
    CollectorConfig cfg = CollectorConfig::for_variant(*variant);
    if (cfg.uses_cards()) cfg.card_count = 4;
    std::size_t actions = 0, cycles = 0;
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < a.runs; ++i) {
      RandomScenarioParams p;
      p.nodes = a.nodes;
      p.ops = a.ops;
      p.mutators = a.mutators;
      p.supply = std::max<std::size_t>(1, a.nodes / 10);
      p.seed = a.seed + i;
      RunResult r = run(random_scenario(p, cfg), {level, false});
      actions += r.sim.actions();
      cycles += r.report.cycles;
      bad |= !r.report.passed();
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out << std::left << std::setw(12) << v << std::setw(8) << a.runs << std::setw(10) << actions << std::setw(10)
        << cycles << std::setw(10) << std::fixed << std::setprecision(1) << ms << std::setprecision(0)
        << (ms > 0 ? actions / ms * 1000 : 0) << '\n';
  }
  return bad ? kExitViolation : kExitPass;
}

// ---------------------------------------------------------------------------

int cmd_selftest(std::uint64_t seed, std::ostream& out) {
  using namespace fixpoint;
  bool ok_all = true;
  auto report = [&](const std::string& name, bool ok, const std::string& why = "") {
    out << (ok ? "ok   " : "FAIL ") << name << (why.empty() ? "" : ": " + why) << '\n';
    ok_all &= ok;
  };

  {
    bool ok = true;
    std::string why;
    for (std::uint64_t s = 0; s < 100 && ok; ++s) {
      HeapGraph g = random_graph(4, 2, seed + s);
      std::vector<NodeSet> subsets;
      for (unsigned m = 0; m < 16; ++m) {
        NodeSet x(4);
        for (NodeId i = 0; i < 4; ++i)
          if (m >> i & 1u) x.insert(i);
        subsets.push_back(x);
      }
      LemmaReport r = check_closure_lemmas(successor_extension(g), subsets);
      if (!r.all_passed()) {
        ok = false;
        for (const auto& v : r.verdicts)
          if (!v.passed) why = v.lemma + " " + v.witness;
      }
    }
    report("closure lemmas", ok, why);
  }

  {
    bool ok = true;
    std::string why;
    std::mt19937_64 rng(seed);
    for (std::uint64_t s = 0; s < 200 && ok; ++s) {
      std::size_t n = 1 + rng() % 20;
      HeapGraph g = random_graph(n, 3, seed + s);
      NodeSet roots(n);
      for (NodeId i = 0; i < n; ++i)
        if (rng() % 4 == 0) roots.insert(i);
      NodeSet expect = reachability_oracle(g, roots).complement();
      NodeSet raw = raw_dead_iteration(g, roots);
      NodeSet ws = workset_dead_iteration(g, roots);
      NodeSet opt = optimized_workset_dead_iteration(g, roots).dead;
      if (raw != expect || ws != expect || opt != expect) {
        ok = false;
        why = "graph seed " + std::to_string(seed + s);
      }
    }
    report("dead-set programs agree with oracle", ok, why);
  }

  {
    bool ok = true;
    std::string why;
    for (Variant v : {Variant::StopTheWorld, Variant::Workset, Variant::DirtySet, Variant::Snapshot,
                      Variant::DirtyCards}) {
      for (std::uint64_t s = 0; s < 50 && ok; ++s) {
        RandomScenarioParams p;
        p.nodes = 15;
        p.mutators = 0;
        p.ops = 0;
        p.seed = seed + s;
        CollectorConfig cfg = CollectorConfig::for_variant(v);
        cfg.root_scan = RootScan::StopAllHandshake;
        Simulation sim(random_scenario(p, cfg));
        while (sim.collector().phase != Phase::Sweep && sim.enabled(kCollector)) sim.step(kCollector);
        NodeSet seeds = oracle_roots(sim.store());
        if (auto h = sim.store().supply_head()) seeds.insert(*h);
        if (sim.collector().black != reachability_oracle(sim.store().graph(), seeds)) {
          ok = false;
          why = to_string(v) + " seed " + std::to_string(seed + s);
        }
      }
    }
    report("quiescent marking agrees with oracle", ok, why);
  }

  for (const auto& name : builtin_names()) {
    Scenario sc = *builtin_scenario(name);
    RunResult r = run(sc, {CheckLevel::All, false});
    bool expect_fail = name == "dijkstra_bug" || name == "root_race";
    bool failed = r.report.at(InvariantId::Safety).failed();
    report("builtin " + name, failed == expect_fail && !r.error,
           failed == expect_fail ? "" : (failed ? "unexpected violation" : "expected violation missing"));
  }
  out << (ok_all ? "selftest passed" : "selftest FAILED") << '\n';
  return ok_all ? kExitPass : kExitViolation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concurrent marking collector lab"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and verify it");
  add_source(run_cmd, ra.src);
  add_overrides(run_cmd, ra.o);
  run_cmd->add_option("--seed", ra.seed, "Seed for the random schedule and workloads");
  run_cmd->add_option("--check", ra.check, "all|safety|none");
  run_cmd->add_option("--trace-out", ra.trace_out, "Write the trace here");
  run_cmd->add_option("--report-out", ra.report_out, "Write the JSON report here");
  run_cmd->add_option("--counterexample-out", ra.cx_out, "Where to write a counterexample");
  run_cmd->add_flag("--no-minimize", ra.no_minimize, "Keep the full counterexample");
  run_cmd->add_flag("--random", ra.random, "Use a random schedule instead of the scenario's");

  ExploreArgs ea;
  auto* explore_cmd = app.add_subcommand("explore", "Enumerate all interleavings within bounds");
  add_source(explore_cmd, ea.src);
  add_overrides(explore_cmd, ea.o);
  explore_cmd->add_option("--max-depth", ea.max_depth);
  explore_cmd->add_option("--max-states", ea.max_states);
  explore_cmd->add_option("--max-nodes", ea.max_nodes);
  explore_cmd->add_option("--max-ops", ea.max_ops);
  explore_cmd->add_option("--check", ea.check, "all|safety|none");
  explore_cmd->add_option("--report-out", ea.report_out, "Write the JSON report here");
  explore_cmd->add_option("--counterexample-out", ea.cx_out);
  explore_cmd->add_flag("--no-minimize", ea.no_minimize);

  MatrixArgs ma;
  auto* matrix_cmd = app.add_subcommand("matrix", "Run the cartesian product of configuration axes");
  add_source(matrix_cmd, ma.src);
  add_overrides(matrix_cmd, ma.o);
  matrix_cmd->add_option("--collectors", ma.collectors)->delimiter(',');
  matrix_cmd->add_option("--barriers", ma.barriers)->delimiter(',');
  matrix_cmd->add_option("--granularities", ma.granularities)->delimiter(',');
  matrix_cmd->add_option("--gray-policies", ma.gray_policies)->delimiter(',');
  matrix_cmd->add_option("--root-scans", ma.root_scans)->delimiter(',');
  matrix_cmd->add_option("--check", ma.check, "all|safety|none");
  matrix_cmd->add_flag("--explore", ma.explore, "Explore every cell exhaustively");
  matrix_cmd->add_option("--max-states", ma.max_states);

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Time random concurrent runs per variant");
  bench_cmd->add_option("--nodes", ba.nodes);
  bench_cmd->add_option("--ops", ba.ops);
  bench_cmd->add_option("--runs", ba.runs);
  bench_cmd->add_option("--mutators", ba.mutators);
  bench_cmd->add_option("--seed", ba.seed);
  bench_cmd->add_option("--collectors", ba.collectors)->delimiter(',');
  bench_cmd->add_option("--check", ba.check, "all|safety|none");

  std::uint64_t st_seed = 1;
  auto* selftest_cmd = app.add_subcommand("selftest", "Lemma, program-equivalence and oracle checks");
  selftest_cmd->add_option("--seed", st_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(ra, out, err);
    if (*explore_cmd) return cmd_explore(ea, out, err);
    if (*matrix_cmd) return cmd_matrix(ma, out, err);
    if (*bench_cmd) return cmd_bench(ba, out, err);
    if (*selftest_cmd) return cmd_selftest(st_seed, out);
  } catch (const ScenarioParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gclab

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gclab/collector.hpp"
#include "gclab/report.hpp"
#include "gclab/scenario.hpp"
#include "gclab/store.hpp"

namespace gclab {

/// Actor index of the collector; mutators are 1..q.
inline constexpr std::size_t kCollector = 0;

struct TraceEntry {
  enum class Kind { Action, Note };

  Kind kind = Kind::Action;
  std::size_t actor = kCollector;
  std::string action;
  std::uint64_t version_before = 0;
  /// Digest of the whole simulation state after this entry.
  std::uint64_t digest = 0;

  /// "v=<version> <action> @<actor> #<digest>"
  std::string str() const;
};

struct Trace {
  std::vector<TraceEntry> entries;
  /// Entry index of every sweep.
  std::vector<std::size_t> cycle_boundaries;

  std::string str() const;
  /// Actor of every action entry, in order.
  std::vector<std::size_t> actors() const;
  /// Lines 0..last inclusive.
  std::vector<std::string> slice(std::size_t last) const;
};

/// Everything the cycle-level checks need about one collection cycle.
struct CycleRecord {
  std::size_t index = 0;
  std::size_t start_entry = 0;
  std::size_t end_entry = 0;
  StoreState start_store;
  /// Store just before the sweep (or at the abort).
  StoreState end_store;
  NodeSet black_final;
  bool completed = false;
  bool safety_abort = false;
  NodeSet unsafe;
  bool bound_exceeded = false;
  std::size_t collector_actions = 0;
  std::size_t step_bound = 0;
  std::size_t mutator_actions = 0;
  RecycleResult result;
};

struct StallRecord {
  std::size_t mutator = 0;
  std::size_t entry = 0;
  std::optional<std::size_t> resumed_entry;
};

enum class CheckLevel { None, Safety, All };

std::optional<CheckLevel> parse_check_level(const std::string& s);

/// Samples always-legal mutator ops: heap ops on nodes the mutator can see,
/// loads of visible nodes into its own pre-root, drops of what it holds.
class WorkloadGen {
 public:
  WorkloadGen() = default;
  WorkloadGen(const WorkloadParams& params, std::size_t mutator);

  std::size_t remaining() const { return remaining_; }
  bool has_move(const StoreState& store) const;
  /// Consumes one op; nullopt when no legal move exists.
  std::optional<MutatorOp> next(const StoreState& store);

 private:
  WorkloadParams params_;
  std::size_t mutator_ = 1;
  std::size_t remaining_ = 0;
  std::mt19937_64 rng_;
};

/// Runs a mutator alone on a copy of `store`.
std::vector<MutatorOp> generate_workload(const WorkloadParams& params, StoreState store,
                                         std::size_t mutator = 1);

class HarnessIntegrityFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One simulation: store, collector and mutators advanced one atomic
/// action at a time by whoever drives it (a schedule or the explorer).
///
/// A mutator op and its barrier form one action. Copies are independent,
/// which is what the explorer relies on.
class Simulation {
 public:
  struct Halt {
    enum class Reason { SafetyViolation, Termination, IllegalMutation, CheckFailed };
    Reason reason;
    std::string detail;
    NodeSet nodes;
  };

  explicit Simulation(std::shared_ptr<const Scenario> scenario, CheckLevel checks = CheckLevel::None);
  explicit Simulation(const Scenario& scenario, CheckLevel checks = CheckLevel::None)
      : Simulation(std::make_shared<const Scenario>(scenario), checks) {}

  const Scenario& scenario() const { return *scenario_; }
  const StoreState& store() const { return store_; }
  const CollectorState& collector() const { return cs_; }
  const CollectorConfig& config() const { return cfg_; }
  const Trace& trace() const { return trace_; }
  const std::vector<CycleRecord>& cycles() const { return cycles_; }
  const std::vector<StallRecord>& stalls() const { return stalls_; }
  const std::optional<Halt>& halt() const { return halt_; }
  /// Per-step verdicts gathered while running with CheckLevel::All.
  const VerificationReport& online() const { return online_; }
  std::size_t actions() const { return actions_; }

  /// The cycle in progress, if any.
  const CycleRecord* open_cycle() const;
  bool mutators_paused() const { return cs_.phase != Phase::Idle && cs_.mutators_paused; }

  bool enabled(std::size_t actor) const;
  std::vector<std::size_t> enabled_actors() const;
  bool finished() const;

  /// Why mutator m is not enabled: "paused", "stalled", "done", "illegal: ..."
  std::string blocked_reason(std::size_t m) const;
  /// Ops mutator m has executed so far.
  const std::vector<MutatorOp>& executed(std::size_t m) const { return mutators_[m - 1].executed; }
  bool has_ops(std::size_t m) const;

  /// Executes one atomic action of `actor`. Throws CollectorFault if the
  /// actor is not enabled.
  void step(std::size_t actor);

  /// Scripted token: "c", "c<N>", "c:<node>", "m<k>". A mutator token for a
  /// paused or stalled mutator lets the collector run until it is released.
  void run_token(const std::string& token);
  /// Mutators first (lowest id), then the collector, until nothing is enabled.
  void run_to_completion(std::size_t max_actions = 10'000'000);
  /// Random interleaving with a mutator:collector weight ratio.
  void run_random(std::uint64_t seed, std::size_t mutator_weight, std::size_t collector_weight,
                  std::size_t max_actions = 10'000'000);

  std::uint64_t digest() const;

 private:
  struct MutatorRuntime {
    std::size_t next = 0;
    std::optional<WorkloadGen> gen;
    bool stalled = false;
    std::vector<MutatorOp> executed;
  };

  void collector_action();
  void mutator_action(std::size_t m);
  void log(TraceEntry::Kind kind, std::size_t actor, std::string action, std::uint64_t version_before);
  void update_stalls();
  bool wants_cycle() const;
  bool any_mutator_enabled() const;
  const MutatorOp* scripted_next(std::size_t m) const;
  void online_checks(const StoreState* before);
  void stop(Halt::Reason reason, std::string detail, NodeSet nodes);

  std::shared_ptr<const Scenario> scenario_;
  CheckLevel checks_;
  CollectorConfig cfg_;
  StoreState store_;
  CollectorState cs_;
  std::vector<MutatorRuntime> mutators_;
  Trace trace_;
  std::vector<CycleRecord> cycles_;
  std::vector<StallRecord> stalls_;
  std::optional<Halt> halt_;
  VerificationReport online_;
  std::size_t actions_ = 0;
  std::size_t voluntary_cycles_ = 0;
  bool final_started_ = false;
  bool stall_retry_ = true;
};

struct Counterexample {
  InvariantId invariant = InvariantId::Safety;
  std::string detail;
  std::vector<std::string> nodes;
  /// Fully scripted scenario that reproduces the violation when run.
  Scenario scenario;
  std::string trace;
};

struct RunOptions {
  CheckLevel checks = CheckLevel::All;
  bool minimize = true;
};

struct RunResult {
  Simulation sim;
  VerificationReport report;
  std::optional<Counterexample> counterexample;
  /// Set when the run stopped on an illegal scripted op.
  std::optional<std::string> error;

  std::vector<RecycleResult> results() const;
};

/// Executes the scenario's schedule (scripted or random), then verifies.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

/// Scripted scenario that replays `sim`'s actions exactly: workload ops are
/// frozen into scripts and the action order becomes the schedule.
Scenario freeze(const Simulation& sim);

/// Greedily drops schedule tokens (and the ops they drive) while the
/// scenario still violates `id`.
Scenario minimize_counterexample(const Scenario& scripted, InvariantId id);

struct ExploreBounds {
  std::size_t max_depth = 10'000;
  std::size_t max_states = 100'000;
  /// Refuse scenarios larger than this (0 = no limit).
  std::size_t max_nodes = 0;
  std::size_t max_ops = 0;
};

struct ExplorationReport {
  std::size_t states = 0;
  std::size_t interleavings = 0;
  std::size_t violating = 0;
  bool complete = true;
  std::string incomplete_reason;
  /// Per violated invariant: how many interleavings and one minimized example.
  std::map<InvariantId, std::size_t> violations;
  std::map<InvariantId, Counterexample> counterexamples;

  nlohmann::json to_json() const;
};

/// Depth-first enumeration of every interleaving of enabled actions, each
/// complete interleaving verified at `checks`.
ExplorationReport explore_interleavings(const Scenario& scenario, const ExploreBounds& bounds,
                                        CheckLevel checks = CheckLevel::Safety, bool minimize = true);

}  // namespace gclab

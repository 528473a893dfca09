#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gclab/collector.hpp"
#include "gclab/heap_graph.hpp"
#include "gclab/store.hpp"

namespace gclab {

struct WorkloadParams {
  std::size_t op_count = 0;
  double add_arc = 1;
  double del_arc = 1;
  double add_new = 1;
  double local = 0;
  std::uint64_t seed = 0;
};

struct MutatorSpec {
  std::vector<MutatorOp> script;
  /// When set, ops are sampled from the legal moves instead of `script`.
  std::optional<WorkloadParams> workload;
};

enum class ScheduleKind { Scripted, Random, Exhaustive };

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::Scripted;
  /// Scripted: "c", "c<N>", "c:<node>", "m<k>".
  std::vector<std::string> tokens;
  std::uint64_t seed = 0;
  std::size_t mutator_weight = 1;
  std::size_t collector_weight = 1;
  std::size_t max_depth = 10'000;
  std::size_t max_states = 100'000;
};

struct Scenario {
  std::string name;
  HeapGraph graph;
  std::vector<NodeId> supply;
  /// Index 0 holds the globals; 1..q the mutators.
  std::vector<PreRoot> pre_roots;
  /// mutators[k - 1] drives mutator k.
  std::vector<MutatorSpec> mutators;
  CollectorConfig collector;
  /// Cycles the collector may start on its own; stalls add more.
  std::size_t cycles = 1;
  /// Run one more cycle once every mutator is done.
  bool final_cycle = true;
  bool collector_enabled = true;
  ScheduleSpec schedule;

  std::size_t mutator_count() const { return mutators.size(); }
  std::size_t memory_size() const { return graph.size(); }
  StoreState initial_store() const;
  /// Back to the text format; parse_scenario(to_text()) round-trips.
  std::string to_text() const;
};

class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

Scenario parse_scenario(std::string_view text, std::string name = "");
Scenario load_scenario(const std::filesystem::path& path);

/// Applies one `key = value` collector setting. Shared by the parser and
/// the command line.
void apply_collector_setting(Scenario& sc, const std::string& key, const std::string& value);

struct RandomScenarioParams {
  std::size_t nodes = 10;
  /// Arcs per non-supply node are drawn from [0, max_out].
  std::size_t max_out = 2;
  std::size_t global_roots = 2;
  std::size_t supply = 2;
  std::size_t mutators = 1;
  /// Total mutator ops, split evenly.
  std::size_t ops = 50;
  double local_weight = 0.5;
  std::size_t mutator_weight = 1;
  std::size_t collector_weight = 1;
  std::size_t cycles = 2;
  std::uint64_t seed = 0;
};

/// Random heap with a random concurrent schedule; node names are n0, n1, ...
Scenario random_scenario(const RandomScenarioParams& params, const CollectorConfig& collector);

/// Graph on `nodes` nodes with up to `max_out` random arcs each.
HeapGraph random_graph(std::size_t nodes, std::size_t max_out, std::uint64_t seed);

std::vector<std::string> builtin_names();
std::optional<std::string> builtin_text(const std::string& name);
std::optional<Scenario> builtin_scenario(const std::string& name);

}  // namespace gclab

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gclab/heap_graph.hpp"
#include "gclab/node_set.hpp"

// Fixpoint engine over the powerset lattice of a finite node universe.
//
// Everything here is a pure function of its inputs. The dead-set programs
// compute the greatest fixpoint of
//
//   g(x) = nodes \ (roots ∪ {b | b ∈ sucs(a), a ∈ nodes \ x})
//
// which equals the complement of the nodes reachable from roots.

namespace gclab::fixpoint {

/// A monotone function on subsets of [0, universe).
struct MonotoneFn {
  std::size_t universe = 0;
  std::function<NodeSet(const NodeSet&)> apply;

  NodeSet operator()(const NodeSet& x) const { return apply(x); }
};

/// s ↦ s ∪ sucs(s); the reflexive successor extension of a graph.
MonotoneFn successor_extension(const HeapGraph& g);
/// s ↦ sucs(s); not inflationary, used with the transitive closure.
MonotoneFn successor_map(const HeapGraph& g);
/// s ↦ roots ∪ sucs(s); its least fixpoint is the reachable set.
MonotoneFn seeded_extension(const HeapGraph& g, NodeSet roots);
MonotoneFn identity(std::size_t universe);
MonotoneFn constant(NodeSet value);

/// f_0, f_1, f_2, ...; indices past the end reuse the last function.
class FnSequence {
 public:
  FnSequence() = default;
  explicit FnSequence(std::vector<MonotoneFn> fns) : fns_(std::move(fns)) {}

  /// One function per graph version; `reflexive` selects successor_extension
  /// over successor_map.
  static FnSequence from_graphs(std::span<const HeapGraph> graphs, bool reflexive = true);
  static FnSequence constant(MonotoneFn f) { return FnSequence({std::move(f)}); }

  const MonotoneFn& at(std::size_t i) const { return fns_[index(i)]; }
  std::size_t index(std::size_t i) const { return i < fns_.size() ? i : fns_.size() - 1; }
  std::size_t size() const { return fns_.size(); }
  std::size_t universe() const { return fns_.empty() ? 0 : fns_.front().universe; }

 private:
  std::vector<MonotoneFn> fns_;
};

/// s_0 ⊂ s_1 ⊂ ... ⊂ s_n with the graph-version index used at each step.
struct ApproxSequence {
  std::vector<NodeSet> steps;
  std::vector<std::size_t> fn_index;

  const NodeSet& last() const { return steps.back(); }
};

/// Least s ⊇ x that is closed under f (f(s) ⊆ s). For an inflationary f this
/// is the least fixpoint above x.
NodeSet closure(const MonotoneFn& f, const NodeSet& x);
/// Least closed s ⊇ f(x); x itself is included only if reachable from f(x).
NodeSet transitive_closure(const MonotoneFn& f, const NodeSet& x);

/// ∅, f(∅), f²(∅), ... ending at the first fixpoint (not repeated).
std::vector<NodeSet> kleene_iterates(const MonotoneFn& f);
NodeSet kleene_chain(const MonotoneFn& f);

/// (W ∩ roots) ∪ {b | b ∈ sucs(a), b ∈ W, a ∈ nodes \ W}
NodeSet workset_of(const HeapGraph& g, const NodeSet& roots, const NodeSet& w);
/// g(x) from the header comment.
NodeSet dead_step(const HeapGraph& g, const NodeSet& roots, const NodeSet& x);

/// Plain descending Kleene iteration from W = nodes.
NodeSet raw_dead_iteration(const HeapGraph& g, const NodeSet& roots);

/// Removes one workset element per iteration, lowest id first. When
/// `removed` is given it receives the removal order.
NodeSet workset_dead_iteration(const HeapGraph& g, const NodeSet& roots,
                               std::vector<NodeId>* removed = nullptr);

struct WorksetSnapshot {
  NodeSet w;
  NodeSet ws;
};

struct OptimizedRun {
  NodeSet dead;
  /// (W, WS) after initialization and after every joint update.
  std::vector<WorksetSnapshot> log;
};

/// Finite-differenced workset program: W and WS are updated jointly so that
/// WS = workset_of(g, roots, W) holds between iterations.
OptimizedRun optimized_workset_dead_iteration(const HeapGraph& g, const NodeSet& roots);

enum class StepRule {
  /// s_i ⊂ s_{i+1} ⊆ f_i(s_i); stop at s = f_i(s).
  Inflationary,
  /// s_i ⊂ s_{i+1} ⊆ s_i ∪ f_i(s_i); stop once f_i(s) ⊆ s.
  NonReflexive,
};

/// Proposes s_{i+1} given s_i and the admissible upper bound for step i.
using StepChooser =
    std::function<NodeSet(const NodeSet& current, const NodeSet& bound, std::size_t i)>;

StepChooser jump_chooser();
StepChooser single_element_chooser();
StepChooser seeded_chooser(std::uint64_t seed);

class PolicyFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Micro-step iteration from s_0 = r. Throws PolicyFault if the chooser
/// proposes an inadmissible successor or no admissible step exists.
ApproxSequence micro_step_run(const FnSequence& fs, const NodeSet& r,
                              const StepChooser& chooser,
                              StepRule rule = StepRule::Inflationary);

/// Checks the strict-growth and bound conditions of every step plus the
/// final fixpoint condition.
bool is_admissible(const ApproxSequence& seq, const FnSequence& fs,
                   StepRule rule = StepRule::Inflationary);

struct LemmaVerdict {
  std::string lemma;
  bool passed = true;
  std::string witness;
};

struct LemmaReport {
  std::vector<LemmaVerdict> verdicts;

  bool all_passed() const;
  const LemmaVerdict* find(const std::string& lemma) const;
};

/// Closure properties on each sample: x ⊆ f̂(x), f̂(f̂(x)) = f̂(x),
/// f(f̂(x)) ⊆ f̂(x) (= for inflationary f) and f̂(f(x)) = f̂(x) when x ⊆ f(x).
LemmaReport check_closure_lemmas(const MonotoneFn& f, std::span<const NodeSet> samples);

/// Sequence lemmas for f_0, f_1, ... and bases x ⊇ r:
///  - "antitone":   f̂_0(x) ⊇ f̂_1(x) ⊇ ...
///  - "decreasing": f̂_{i+1}(s_{i+1}) ⊆ f̂_i(s_i) along `run`
///  - "invariance": f̂(s_i) = f̂(r) along `run` when fs has a single function
LemmaReport check_sequence_lemmas(const FnSequence& fs, std::span<const NodeSet> bases,
                                  const ApproxSequence* run = nullptr);

}  // namespace gclab::fixpoint

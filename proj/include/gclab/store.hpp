#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gclab/heap_graph.hpp"
#include "gclab/node_set.hpp"

namespace gclab {

/// Pre-root index of the global variables; mutators are 1..q.
inline constexpr std::size_t kGlobals = 0;

/// Registers and stack of one mutator (or the globals) modelled as a single
/// pseudo-node. Pre-roots are not heap nodes: never marked, never recycled.
struct PreRoot {
  std::size_t owner = kGlobals;
  std::vector<NodeId> slots;
};

enum class OpKind { AddArc, DelArc, AddNew, LocalLoad, LocalDrop };

const char* op_name(OpKind k);

struct MutatorOp {
  OpKind kind = OpKind::AddArc;
  /// Source node for heap ops; unused for local ops.
  NodeId a = 0;
  /// Target node; unused for AddNew.
  NodeId b = 0;
  /// Pre-root index for LocalLoad / LocalDrop.
  std::size_t pre_root = 0;

  static MutatorOp add_arc(NodeId a, NodeId b) { return {OpKind::AddArc, a, b, 0}; }
  static MutatorOp del_arc(NodeId a, NodeId b) { return {OpKind::DelArc, a, b, 0}; }
  static MutatorOp add_new(NodeId a) { return {OpKind::AddNew, a, 0, 0}; }
  static MutatorOp load(std::size_t m, NodeId b) { return {OpKind::LocalLoad, 0, b, m}; }
  static MutatorOp drop(std::size_t m, NodeId b) { return {OpKind::LocalDrop, 0, b, m}; }

  bool is_heap_op() const { return kind == OpKind::AddArc || kind == OpKind::DelArc || kind == OpKind::AddNew; }

  /// Scenario syntax: "addArc A E", "addNew A", "load 1 b", ...
  std::string str(const HeapGraph& g) const;

  friend bool operator==(const MutatorOp&, const MutatorOp&) = default;
};

/// A mutator operation whose precondition does not hold.
class IllegalMutation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The shared store: heap graph, freelist and pre-roots.
///
/// Only the freelist is stored; active, live and dead are derived by
/// traversal so the model never carries the answer a collector computes.
/// Every mutator operation bumps the graph version by exactly one.
class StoreState {
 public:
  StoreState() = default;
  StoreState(HeapGraph graph, std::vector<NodeId> supply, std::vector<PreRoot> pre_roots);

  const HeapGraph& graph() const { return graph_; }
  std::size_t memory_size() const { return graph_.size(); }
  std::uint64_t version() const { return graph_.version(); }

  const std::deque<NodeId>& supply() const { return supply_; }
  NodeSet supply_set() const;
  std::optional<NodeId> supply_head() const;

  const std::vector<PreRoot>& pre_roots() const { return pre_roots_; }
  std::size_t mutator_count() const { return pre_roots_.empty() ? 0 : pre_roots_.size() - 1; }

  /// sucs(ρ): targets of every pre-root, globals included.
  NodeSet roots() const;
  /// sucs(ρ_m).
  NodeSet roots_of(std::size_t m) const;

  NodeSet reachable(const NodeSet& seeds) const;
  NodeSet active() const { return reachable(roots()); }
  /// What mutator m can see: reachable from its own pre-root and the globals.
  NodeSet visible_to(std::size_t m) const;
  /// active ⊎ supply
  NodeSet live() const { return active() | supply_set(); }
  /// nodes \ (reachable(roots) ∪ supply)
  NodeSet dead_set() const { return live().complement(); }

  void add_arc(NodeId a, NodeId b);
  void del_arc(NodeId a, NodeId b);
  /// Allocates the supply head b and appends a->b. Returns nullopt, leaving
  /// the store untouched, when the supply is empty (an allocation stall).
  std::optional<NodeId> add_new(NodeId a);
  void local_load(std::size_t m, NodeId b);
  void local_drop(std::size_t m, NodeId b);

  /// Dispatches on op.kind; the returned node is set only for AddNew.
  std::optional<NodeId> apply(const MutatorOp& op);
  /// Precondition check without applying. AddNew on an empty supply is
  /// legal; it stalls instead of failing.
  bool is_legal(const MutatorOp& op, std::string* why = nullptr) const;

  /// Clone-on-write overlay for snapshot tracing. While enabled, every heap
  /// op on a first records a's slots as they were before the change.
  void set_clone_on_write(bool on) { clone_on_write_ = on; }
  bool clone_on_write() const { return clone_on_write_; }
  void record_clone(NodeId a);
  const std::vector<NodeId>& sucs_under_overlay(NodeId a) const;
  const std::map<NodeId, std::vector<NodeId>>& clone_log() const { return clone_log_; }
  void clear_clones() { clone_log_.clear(); }

  /// Sweep support: clears each node's slots and appends it to the supply in
  /// ascending id order. Bumps the version once.
  void recycle(const NodeSet& nodes);

  std::uint64_t digest() const;

 private:
  void require(bool ok, const MutatorOp& op, const char* what) const;

  HeapGraph graph_;
  std::deque<NodeId> supply_;
  std::vector<PreRoot> pre_roots_;
  bool clone_on_write_ = false;
  std::map<NodeId, std::vector<NodeId>> clone_log_;
};

}  // namespace gclab

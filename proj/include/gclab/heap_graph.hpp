#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gclab/node_set.hpp"

namespace gclab {

/// Directed multigraph over a fixed node universe. Each node owns an ordered
/// list of successor slots; duplicate arcs a->b are allowed and counted.
///
/// The version counter is the index i of the graph sequence G_0, G_1, ...
/// and is bumped by whoever mutates the graph (see StoreState).
class HeapGraph {
 public:
  HeapGraph() = default;
  explicit HeapGraph(std::size_t memory_size);
  HeapGraph(std::size_t memory_size, std::vector<std::string> names);

  std::size_t size() const { return slots_.size(); }
  NodeSet nodes() const { return NodeSet::full(size()); }

  const std::vector<NodeId>& slots(NodeId a) const { return slots_[a]; }
  std::vector<NodeId>& slots_mut(NodeId a) { return slots_[a]; }

  /// Distinct successors of a.
  NodeSet sucs(NodeId a) const;
  /// Union of successors of every member of s.
  NodeSet sucs(const NodeSet& s) const;

  std::size_t arc_count(NodeId a, NodeId b) const;
  std::size_t total_arcs() const;

  void append_arc(NodeId a, NodeId b) { slots_[a].push_back(b); }
  /// Removes the lowest-index a->b slot. Returns false if none exists.
  bool remove_arc(NodeId a, NodeId b);
  void clear_slots(NodeId a) { slots_[a].clear(); }

  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }

  const std::string& name(NodeId n) const { return names_[n]; }
  const std::vector<std::string>& names() const { return names_; }
  /// Looks up a node by name; returns size() when unknown.
  NodeId find(const std::string& name) const;

  /// Adjacency dump, one line per node: "name: t1 t2 t3" (multiplicity by
  /// repetition).
  std::string dump() const;
  std::string format(const NodeSet& s) const;

  friend bool operator==(const HeapGraph& a, const HeapGraph& b) {
    return a.slots_ == b.slots_;
  }

 private:
  std::vector<std::vector<NodeId>> slots_;
  std::vector<std::string> names_;
  std::uint64_t version_ = 0;
};

}  // namespace gclab

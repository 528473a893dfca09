#pragma once

// Test-side helpers. The reachability here is deliberately a different
// algorithm (repeated relaxation over an adjacency matrix) from both the
// library's worklist oracle and the fixpoint engine.

#include <cstdint>
#include <random>
#include <vector>

#include "gclab/heap_graph.hpp"
#include "gclab/node_set.hpp"

namespace gclab::testing {

inline NodeSet relax_reach(const HeapGraph& g, const NodeSet& seeds) {
  std::size_t n = g.size();
  std::vector<char> in(n, 0);
  for (NodeId s : seeds) in[s] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (NodeId a = 0; a < n; ++a) {
      if (!in[a]) continue;
      for (NodeId b : g.slots(a))
        if (!in[b]) in[b] = changed = 1;
    }
  }
  NodeSet out(n);
  for (NodeId a = 0; a < n; ++a)
    if (in[a]) out.insert(a);
  return out;
}

/// Graph on n nodes whose arc a -> b exists iff bit a*n+b of mask is set.
inline HeapGraph graph_from_mask(std::size_t n, std::uint64_t mask) {
  HeapGraph g(n);
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = 0; b < n; ++b)
      if (mask >> (a * n + b) & 1u) g.append_arc(a, b);
  return g;
}

inline NodeSet set_from_mask(std::size_t n, std::uint64_t mask) {
  NodeSet s(n);
  for (NodeId i = 0; i < n; ++i)
    if (mask >> i & 1u) s.insert(i);
  return s;
}

/// Random multigraph with a random root subset.
struct RandomGraph {
  HeapGraph graph;
  NodeSet roots;
};

inline RandomGraph random_rooted_graph(std::mt19937_64& rng, std::size_t max_nodes) {
  std::size_t n = 1 + rng() % max_nodes;
  HeapGraph g(n);
  double density = 0.5 + static_cast<double>(rng() % 300) / 100.0;
  std::size_t arcs = static_cast<std::size_t>(density * n);
  for (std::size_t i = 0; i < arcs; ++i) g.append_arc(rng() % n, rng() % n);
  NodeSet roots(n);
  std::size_t k = rng() % 4;
  for (std::size_t i = 0; i < k; ++i) roots.insert(rng() % n);
  return {std::move(g), std::move(roots)};
}

}  // namespace gclab::testing

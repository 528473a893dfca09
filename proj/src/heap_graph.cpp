#include "gclab/heap_graph.hpp"

#include <algorithm>
#include <sstream>

namespace gclab {

std::string NodeSet::str() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (NodeId n : *this) {
    if (!first) os << ',';
    os << n;
    first = false;
  }
  os << '}';
  return os.str();
}

HeapGraph::HeapGraph(std::size_t memory_size) : slots_(memory_size) {
  names_.reserve(memory_size);
  for (std::size_t i = 0; i < memory_size; ++i) names_.push_back(std::to_string(i));
}

HeapGraph::HeapGraph(std::size_t memory_size, std::vector<std::string> names)
    : slots_(memory_size), names_(std::move(names)) {
  for (std::size_t i = names_.size(); i < memory_size; ++i)
    names_.push_back(std::to_string(i));
}

NodeSet HeapGraph::sucs(NodeId a) const {
  NodeSet s(size());
  for (NodeId b : slots_[a]) s.insert(b);
  return s;
}

NodeSet HeapGraph::sucs(const NodeSet& s) const {
  NodeSet out(size());
  for (NodeId a : s)
    for (NodeId b : slots_[a]) out.insert(b);
  return out;
}

std::size_t HeapGraph::arc_count(NodeId a, NodeId b) const {
  return static_cast<std::size_t>(std::count(slots_[a].begin(), slots_[a].end(), b));
}

std::size_t HeapGraph::total_arcs() const {
  std::size_t n = 0;
  for (const auto& s : slots_) n += s.size();
  return n;
}

bool HeapGraph::remove_arc(NodeId a, NodeId b) {
  auto& s = slots_[a];
  auto it = std::find(s.begin(), s.end(), b);
  if (it == s.end()) return false;
  s.erase(it);
  return true;
}

NodeId HeapGraph::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return static_cast<NodeId>(it - names_.begin());
}

std::string HeapGraph::dump() const {
  std::ostringstream os;
  for (NodeId a = 0; a < size(); ++a) {
    os << names_[a] << ':';
    for (NodeId b : slots_[a]) os << ' ' << names_[b];
    os << '\n';
  }
  return os.str();
}

std::string HeapGraph::format(const NodeSet& s) const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (NodeId n : s) {
    if (!first) os << ',';
    os << (n < names_.size() ? names_[n] : std::to_string(n));
    first = false;
  }
  os << '}';
  return os.str();
}

}  // namespace gclab

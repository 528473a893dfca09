#include "gclab/store.hpp"

#include <algorithm>
#include <sstream>

namespace gclab {

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::AddArc: return "addArc";
    case OpKind::DelArc: return "delArc";
    case OpKind::AddNew: return "addNew";
    case OpKind::LocalLoad: return "load";
    case OpKind::LocalDrop: return "drop";
  }
  return "?";
}

std::string MutatorOp::str(const HeapGraph& g) const {
  std::ostringstream os;
  os << op_name(kind);
  switch (kind) {
    case OpKind::AddArc:
    case OpKind::DelArc: os << ' ' << g.name(a) << ' ' << g.name(b); break;
    case OpKind::AddNew: os << ' ' << g.name(a); break;
    case OpKind::LocalLoad:
    case OpKind::LocalDrop: os << ' ' << pre_root << ' ' << g.name(b); break;
  }
  return os.str();
}

StoreState::StoreState(HeapGraph graph, std::vector<NodeId> supply, std::vector<PreRoot> pre_roots)
    : graph_(std::move(graph)),
      supply_(supply.begin(), supply.end()),
      pre_roots_(std::move(pre_roots)) {
  if (pre_roots_.empty()) pre_roots_.push_back({kGlobals, {}});
}

NodeSet StoreState::supply_set() const { return NodeSet::of(memory_size(), supply_); }

std::optional<NodeId> StoreState::supply_head() const {
  if (supply_.empty()) return std::nullopt;
  return supply_.front();
}

NodeSet StoreState::roots() const {
  NodeSet r(memory_size());
  for (const auto& p : pre_roots_)
    for (NodeId b : p.slots) r.insert(b);
  return r;
}

NodeSet StoreState::roots_of(std::size_t m) const {
  return NodeSet::of(memory_size(), pre_roots_.at(m).slots);
}

NodeSet StoreState::reachable(const NodeSet& seeds) const {
  NodeSet seen = seeds;
  std::vector<NodeId> stack = seeds.to_vector();
  while (!stack.empty()) {
    NodeId a = stack.back();
    stack.pop_back();
    for (NodeId b : graph_.slots(a))
      if (!seen.contains(b)) {
        seen.insert(b);
        stack.push_back(b);
      }
  }
  return seen;
}

NodeSet StoreState::visible_to(std::size_t m) const {
  return reachable(roots_of(m) | roots_of(kGlobals));
}

void StoreState::require(bool ok, const MutatorOp& op, const char* what) const {
  if (!ok) throw IllegalMutation(op.str(graph_) + ": " + what);
}

bool StoreState::is_legal(const MutatorOp& op, std::string* why) const {
  auto no = [&](const char* w) {
    if (why) *why = w;
    return false;
  };
  std::size_t n = memory_size();
  switch (op.kind) {
    case OpKind::AddArc: {
      if (op.a >= n || op.b >= n) return no("unknown node");
      NodeSet act = active();
      if (!act.contains(op.a)) return no("source is not active");
      if (!act.contains(op.b)) return no("target is not active");
      return true;
    }
    case OpKind::DelArc:
      if (op.a >= n || op.b >= n) return no("unknown node");
      if (!active().contains(op.a)) return no("source is not active");
      if (graph_.arc_count(op.a, op.b) == 0) return no("no such arc");
      return true;
    case OpKind::AddNew:
      if (op.a >= n) return no("unknown node");
      if (!active().contains(op.a)) return no("source is not active");
      return true;
    case OpKind::LocalLoad:
      if (op.pre_root >= pre_roots_.size() || op.b >= n) return no("unknown pre-root or node");
      if (!visible_to(op.pre_root).contains(op.b)) return no("node is not visible to the mutator");
      return true;
    case OpKind::LocalDrop: {
      if (op.pre_root >= pre_roots_.size() || op.b >= n) return no("unknown pre-root or node");
      const auto& s = pre_roots_[op.pre_root].slots;
      if (std::find(s.begin(), s.end(), op.b) == s.end()) return no("pre-root does not hold the node");
      return true;
    }
  }
  return no("unknown op");
}

void StoreState::add_arc(NodeId a, NodeId b) {
  auto op = MutatorOp::add_arc(a, b);
  std::string why;
  require(is_legal(op, &why), op, why.c_str());
  if (clone_on_write_) record_clone(a);
  graph_.append_arc(a, b);
  graph_.bump_version();
}

void StoreState::del_arc(NodeId a, NodeId b) {
  auto op = MutatorOp::del_arc(a, b);
  std::string why;
  require(is_legal(op, &why), op, why.c_str());
  if (clone_on_write_) record_clone(a);
  graph_.remove_arc(a, b);
  graph_.bump_version();
}

std::optional<NodeId> StoreState::add_new(NodeId a) {
  auto op = MutatorOp::add_new(a);
  std::string why;
  require(is_legal(op, &why), op, why.c_str());
  if (supply_.empty()) return std::nullopt;
  NodeId b = supply_.front();
  supply_.pop_front();
  if (clone_on_write_) record_clone(a);
  graph_.append_arc(a, b);
  graph_.bump_version();
  return b;
}

void StoreState::local_load(std::size_t m, NodeId b) {
  auto op = MutatorOp::load(m, b);
  std::string why;
  require(is_legal(op, &why), op, why.c_str());
  pre_roots_[m].slots.push_back(b);
  graph_.bump_version();
}

void StoreState::local_drop(std::size_t m, NodeId b) {
  auto op = MutatorOp::drop(m, b);
  std::string why;
  require(is_legal(op, &why), op, why.c_str());
  auto& s = pre_roots_[m].slots;
  s.erase(std::find(s.begin(), s.end(), b));
  graph_.bump_version();
}

std::optional<NodeId> StoreState::apply(const MutatorOp& op) {
  switch (op.kind) {
    case OpKind::AddArc: add_arc(op.a, op.b); return std::nullopt;
    case OpKind::DelArc: del_arc(op.a, op.b); return std::nullopt;
    case OpKind::AddNew: return add_new(op.a);
    case OpKind::LocalLoad: local_load(op.pre_root, op.b); return std::nullopt;
    case OpKind::LocalDrop: local_drop(op.pre_root, op.b); return std::nullopt;
  }
  return std::nullopt;
}

void StoreState::record_clone(NodeId a) {
  clone_log_.try_emplace(a, graph_.slots(a));
}

const std::vector<NodeId>& StoreState::sucs_under_overlay(NodeId a) const {
  auto it = clone_log_.find(a);
  return it != clone_log_.end() ? it->second : graph_.slots(a);
}

void StoreState::recycle(const NodeSet& nodes) {
  for (NodeId n : nodes) {
    graph_.clear_slots(n);
    supply_.push_back(n);
  }
  graph_.bump_version();
}

std::uint64_t StoreState::digest() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(graph_.version());
  for (NodeId a = 0; a < graph_.size(); ++a) {
    mix(0xA000 + a);
    for (NodeId b : graph_.slots(a)) mix(b);
  }
  mix(0xB000);
  for (NodeId s : supply_) mix(s);
  for (const auto& p : pre_roots_) {
    mix(0xC000 + p.owner);
    for (NodeId b : p.slots) mix(b);
  }
  for (const auto& [a, slots] : clone_log_) {
    mix(0xD000 + a);
    for (NodeId b : slots) mix(b);
  }
  return h;
}

}  // namespace gclab

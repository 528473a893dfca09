#include "gclab/collector.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <utility>

namespace gclab {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<const char*, E>, N>& table, const std::string& s) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string reverse(const std::array<std::pair<const char*, E>, N>& table, E v) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "?";
}

// First name per value is the canonical spelling; the rest are aliases.
constexpr std::array<std::pair<const char*, Variant>, 10> kVariants{{
    {"stw", Variant::StopTheWorld},
    {"workset", Variant::Workset},
    {"dirtyset", Variant::DirtySet},
    {"snapshot", Variant::Snapshot},
    {"dirtycards", Variant::DirtyCards},
    {"stop-the-world", Variant::StopTheWorld},
    {"dirty", Variant::DirtySet},
    {"cards", Variant::DirtyCards},
    {"dirty-cards", Variant::DirtyCards},
    {"dirty-set", Variant::DirtySet},
}};

constexpr std::array<std::pair<const char*, Barrier>, 7> kBarriers{{
    {"none", Barrier::None},
    {"dijkstra", Barrier::DijkstraInstall},
    {"steele", Barrier::SteeleInstall},
    {"yuasa", Barrier::YuasaDelete},
    {"nobarrier", Barrier::None},
    {"dijkstra-install", Barrier::DijkstraInstall},
    {"yuasa-delete", Barrier::YuasaDelete},
}};

constexpr std::array<std::pair<const char*, Granularity>, 2> kGranularities{{
    {"coarse", Granularity::Coarse},
    {"fine", Granularity::Fine},
}};

constexpr std::array<std::pair<const char*, GrayPolicy>, 8> kPolicies{{
    {"scan", GrayPolicy::IteratedScan},
    {"stack", GrayPolicy::StackDFS},
    {"queue", GrayPolicy::QueueBFS},
    {"cache", GrayPolicy::BoundedCache},
    {"iterated-scan", GrayPolicy::IteratedScan},
    {"dfs", GrayPolicy::StackDFS},
    {"bfs", GrayPolicy::QueueBFS},
    {"bounded-cache", GrayPolicy::BoundedCache},
}};

constexpr std::array<std::pair<const char*, RootScan>, 5> kRootScans{{
    {"handshake", RootScan::StopAllHandshake},
    {"load-barrier", RootScan::LoadBarrier},
    {"delete-barrier", RootScan::DeleteBarrier},
    {"unprotected", RootScan::Unprotected},
    {"stop-all", RootScan::StopAllHandshake},
}};

constexpr std::array<std::pair<const char*, BlackenGuard>, 3> kGuards{{
    {"all-marked", BlackenGuard::AllMarked},
    {"cursor-only", BlackenGuard::CursorOnly},
    {"printed", BlackenGuard::Printed},
}};

constexpr std::array<std::pair<const char*, Phase>, 5> kPhases{{
    {"idle", Phase::Idle},
    {"root-scan", Phase::RootScan},
    {"marking", Phase::Marking},
    {"dirty-cleanup", Phase::DirtyCleanup},
    {"sweep", Phase::Sweep},
}};

}  // namespace

std::string to_string(Variant v) { return reverse(kVariants, v); }
std::string to_string(Barrier b) { return reverse(kBarriers, b); }
std::string to_string(Granularity g) { return reverse(kGranularities, g); }
std::string to_string(GrayPolicy p) { return reverse(kPolicies, p); }
std::string to_string(RootScan r) { return reverse(kRootScans, r); }
std::string to_string(BlackenGuard g) { return reverse(kGuards, g); }
std::string to_string(Phase p) { return reverse(kPhases, p); }

std::optional<Variant> parse_variant(const std::string& s) { return lookup(kVariants, s); }
std::optional<Barrier> parse_barrier(const std::string& s) { return lookup(kBarriers, s); }
std::optional<Granularity> parse_granularity(const std::string& s) { return lookup(kGranularities, s); }
std::optional<GrayPolicy> parse_gray_policy(const std::string& s) { return lookup(kPolicies, s); }
std::optional<RootScan> parse_root_scan(const std::string& s) { return lookup(kRootScans, s); }
std::optional<BlackenGuard> parse_blacken_guard(const std::string& s) { return lookup(kGuards, s); }

CollectorConfig CollectorConfig::for_variant(Variant v) {
  CollectorConfig c;
  c.variant = v;
  switch (v) {
    case Variant::StopTheWorld: c.barrier = Barrier::None; break;
    case Variant::Snapshot: c.barrier = Barrier::YuasaDelete; break;
    default: c.barrier = Barrier::DijkstraInstall; break;
  }
  return c;
}

CollectorConfig CollectorConfig::normalized() const {
  CollectorConfig c = *this;
  if (c.stops_world()) {
    c.barrier = Barrier::None;
    c.root_scan = RootScan::StopAllHandshake;
  }
  if (c.card_count == 0) c.card_count = 1;
  if (c.cache_capacity == 0) c.cache_capacity = 1;
  return c;
}

std::string CollectorConfig::describe() const {
  std::ostringstream os;
  os << to_string(variant) << '/' << to_string(barrier) << '/' << to_string(granularity) << '/'
     << to_string(gray_policy);
  if (gray_policy == GrayPolicy::BoundedCache) os << '(' << cache_capacity << ')';
  if (uses_cards()) os << "/cards=" << card_count;
  os << '/' << to_string(root_scan);
  if (granularity == Granularity::Fine && blacken_guard != BlackenGuard::AllMarked)
    os << '/' << to_string(blacken_guard);
  return os.str();
}

CollectorState::CollectorState(std::size_t memory_size)
    : black(memory_size), gray(memory_size), dirty(memory_size) {}

std::uint64_t CollectorState::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(static_cast<std::uint64_t>(phase));
  mix(black.hash());
  mix(gray.hash());
  mix(dirty.hash());
  mix(cursor ? (std::uint64_t{cursor->node} << 32 | cursor->slot) : ~0ull);
  for (bool c : card_dirty) mix(c);
  mix(0xE000);
  for (NodeId n : order) mix(n);
  mix(scan_pointer);
  mix(overflow);
  mix(next_scan);
  mix(mutators_paused);
  mix(steps_since_drain);
  return h;
}

std::size_t card_of(NodeId n, std::size_t memory_size, std::size_t card_count) {
  if (memory_size == 0 || card_count <= 1) return 0;
  return static_cast<std::size_t>(n) * card_count / memory_size;
}

NodeSet card_members(std::size_t card, std::size_t memory_size, std::size_t card_count) {
  NodeSet s(memory_size);
  for (NodeId n = 0; n < memory_size; ++n)
    if (card_of(n, memory_size, card_count) == card) s.insert(n);
  return s;
}

std::size_t cycle_step_bound(std::size_t nodes, std::size_t mutators, std::size_t regrays) {
  return 3 * nodes + 2 * regrays + mutators + 4;
}

namespace {

void require_phase(const CollectorState& cs, std::initializer_list<Phase> ok, const char* op) {
  for (Phase p : ok)
    if (cs.phase == p) return;
  throw CollectorFault(std::string(op) + ": collector is in phase " + to_string(cs.phase));
}

void push_order(CollectorState& cs, const CollectorConfig& cfg, NodeId n) {
  switch (cfg.gray_policy) {
    case GrayPolicy::IteratedScan: return;
    case GrayPolicy::StackDFS:
    case GrayPolicy::QueueBFS: cs.order.push_back(n); return;
    case GrayPolicy::BoundedCache:
      if (cs.order.size() < cfg.cache_capacity) {
        cs.order.push_back(n);
      } else {
        cs.overflow = true;
        ++cs.stats.cache_overflows;
      }
      return;
  }
}

// Collector-side shading: white -> gray.
void shade_gray(CollectorState& cs, const CollectorConfig& cfg, NodeId n) {
  if (cs.black.contains(n) || cs.gray.contains(n) || cs.dirty.contains(n)) return;
  cs.gray.insert(n);
  push_order(cs, cfg, n);
}

// Mutator-side recording: gray for the workset family, dirty (plus the
// node's card) for the dirty-set family.
bool record(CollectorState& cs, const CollectorConfig& cfg, std::size_t memory_size, NodeId n) {
  if (cs.black.contains(n) || cs.gray.contains(n) || cs.dirty.contains(n)) return false;
  if (cfg.uses_dirty()) {
    cs.dirty.insert(n);
    if (cfg.uses_cards()) mark_card_dirty(cs, cfg, memory_size, n);
  } else {
    cs.gray.insert(n);
    push_order(cs, cfg, n);
  }
  return true;
}

// Steele: the source goes back to the pending side even if it is black.
bool regray_source(CollectorState& cs, const CollectorConfig& cfg, std::size_t memory_size, NodeId a) {
  if (!cs.black.contains(a)) return record(cs, cfg, memory_size, a);
  cs.black.erase(a);
  ++cs.stats.regrays;
  if (cfg.uses_dirty()) {
    cs.dirty.insert(a);
    if (cfg.uses_cards()) mark_card_dirty(cs, cfg, memory_size, a);
  } else {
    cs.gray.insert(a);
    push_order(cs, cfg, a);
  }
  return true;
}

const std::vector<NodeId>& successors(const StoreState& store, const CollectorConfig& cfg, NodeId x) {
  return cfg.reads_snapshot() ? store.sucs_under_overlay(x) : store.graph().slots(x);
}

NodeId iterated_scan_pick(CollectorState& cs) {
  NodeId x = cs.gray.lowest_from(cs.scan_pointer);
  if (x == cs.gray.universe()) {
    // Work behind the scan point: another sweep over the heap.
    ++cs.stats.rescans;
    x = cs.gray.lowest();
  }
  cs.scan_pointer = x + 1;
  return x;
}

void blacken(CollectorState& cs, NodeId x) {
  cs.gray.erase(x);
  cs.black.insert(x);
  cs.cursor.reset();
  ++cs.stats.blacken_steps;
}

void scan_pre_root(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg, std::size_t m) {
  for (NodeId b : store.pre_roots()[m].slots) shade_gray(cs, cfg, b);
  ++cs.stats.root_scans;
}

void after_marking_step(CollectorState& cs, const CollectorConfig& cfg) {
  ++cs.steps_since_drain;
  if (cs.phase == Phase::DirtyCleanup) ++cs.stats.cleanup_steps;
  (void)cfg;
}

}  // namespace

void start_cycle(CollectorState& cs, StoreState& store, const CollectorConfig& cfg) {
  require_phase(cs, {Phase::Idle}, "start_cycle");
  std::size_t n = store.memory_size();
  cs = CollectorState(n);
  cs.card_dirty.assign(cfg.uses_cards() ? cfg.card_count : 0, false);
  cs.phase = Phase::RootScan;
  scan_pre_root(cs, store, cfg, kGlobals);
  if (auto head = store.supply_head()) shade_gray(cs, cfg, *head);
  cs.mutators_paused = cfg.stops_world() || cfg.root_scan == RootScan::StopAllHandshake;
  if (cfg.reads_snapshot()) {
    store.clear_clones();
    store.set_clone_on_write(true);
  }
  ++cs.stats.micro_steps;
}

void root_scan_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg) {
  require_phase(cs, {Phase::RootScan}, "root_scan_step");
  ++cs.stats.micro_steps;
  if (cs.next_scan <= store.mutator_count()) {
    scan_pre_root(cs, store, cfg, cs.next_scan++);
    return;
  }
  if (!cfg.stops_world()) cs.mutators_paused = false;
  cs.phase = Phase::Marking;
}

NodeId gray_select(CollectorState& cs, const CollectorConfig& cfg) {
  if (cs.gray.empty()) throw CollectorFault("gray_select: gray is empty");
  switch (cfg.gray_policy) {
    case GrayPolicy::IteratedScan: return iterated_scan_pick(cs);
    case GrayPolicy::StackDFS:
    case GrayPolicy::BoundedCache:
      while (!cs.order.empty()) {
        NodeId x = cs.order.back();
        cs.order.pop_back();
        if (cs.gray.contains(x)) return x;
      }
      break;
    case GrayPolicy::QueueBFS:
      while (!cs.order.empty()) {
        NodeId x = cs.order.front();
        cs.order.pop_front();
        if (cs.gray.contains(x)) return x;
      }
      break;
  }
  // Cache empty (or an order entry was lost): fall back to scanning. For the
  // bounded cache this is the overflowed residue.
  return iterated_scan_pick(cs);
}

void coarse_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg) {
  require_phase(cs, {Phase::Marking, Phase::DirtyCleanup}, "coarse_step");
  NodeId x = gray_select(cs, cfg);
  for (NodeId y : successors(store, cfg, x)) shade_gray(cs, cfg, y);
  blacken(cs, x);
  ++cs.stats.coarse_steps;
  ++cs.stats.micro_steps;
  after_marking_step(cs, cfg);
}

void fine_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg) {
  require_phase(cs, {Phase::Marking, Phase::DirtyCleanup}, "fine_step");
  ++cs.stats.micro_steps;
  after_marking_step(cs, cfg);
  if (!cs.cursor) cs.cursor = CollectorState::Cursor{gray_select(cs, cfg), 0};
  NodeId x = cs.cursor->node;
  const auto& slots = successors(store, cfg, x);
  auto unmarked = [&cs](NodeId y) {
    return !cs.black.contains(y) && !cs.gray.contains(y) && !cs.dirty.contains(y);
  };
  for (std::size_t k = cs.cursor->slot; k < slots.size(); ++k) {
    if (unmarked(slots[k])) {
      shade_gray(cs, cfg, slots[k]);
      cs.cursor->slot = k + 1;
      ++cs.stats.gray_arc_steps;
      return;
    }
  }
  cs.cursor->slot = slots.size();
  switch (cfg.blacken_guard) {
    case BlackenGuard::AllMarked:
      // Slots before the cursor may have changed since they were passed.
      for (NodeId y : slots)
        if (unmarked(y)) {
          shade_gray(cs, cfg, y);
          ++cs.stats.gray_arc_steps;
          return;
        }
      blacken(cs, x);
      return;
    case BlackenGuard::CursorOnly:
      blacken(cs, x);
      return;
    case BlackenGuard::Printed: {
      bool disjoint = std::none_of(slots.begin(), slots.end(), [&cs](NodeId y) {
        return cs.black.contains(y) || cs.gray.contains(y);
      });
      if (disjoint)
        blacken(cs, x);
      else
        ++cs.stats.idle_steps;
      return;
    }
  }
}

void mark_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg) {
  if (cfg.granularity == Granularity::Coarse)
    coarse_step(cs, store, cfg);
  else
    fine_step(cs, store, cfg);
}

void snapshot_mark_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg) {
  if (!cfg.reads_snapshot()) throw CollectorFault("snapshot_mark_step: variant is not Snapshot");
  if (!store.clone_on_write()) throw CollectorFault("snapshot_mark_step: clone-on-write is off");
  mark_step(cs, store, cfg);
}

bool apply_barrier(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg,
                   const MutatorOp& op) {
  if (cs.phase == Phase::Idle) return false;
  std::size_t n = store.memory_size();
  bool changed = false;
  switch (op.kind) {
    case OpKind::AddArc:
      if (cfg.barrier == Barrier::DijkstraInstall) changed |= record(cs, cfg, n, op.b);
      if (cfg.barrier == Barrier::SteeleInstall) changed |= regray_source(cs, cfg, n, op.a);
      break;
    case OpKind::DelArc:
      if (cfg.barrier == Barrier::YuasaDelete || cfg.root_scan == RootScan::DeleteBarrier)
        changed |= record(cs, cfg, n, op.b);
      break;
    case OpKind::AddNew:
      // Allocation during a cycle is never white.
      if (auto head = store.supply_head()) {
        changed |= record(cs, cfg, n, *head);
        ++cs.stats.allocations;
      }
      break;
    case OpKind::LocalLoad:
      if (cfg.root_scan == RootScan::LoadBarrier) changed |= record(cs, cfg, n, op.b);
      break;
    case OpKind::LocalDrop: break;
  }
  if (changed) ++cs.stats.barrier_hits;
  return changed;
}

void mark_card_dirty(CollectorState& cs, const CollectorConfig& cfg, std::size_t memory_size, NodeId n) {
  if (cs.card_dirty.size() != cfg.card_count) cs.card_dirty.resize(cfg.card_count, false);
  cs.card_dirty[card_of(n, memory_size, cfg.card_count)] = true;
}

std::vector<std::size_t> dirty_card_filter(const CollectorState& cs) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < cs.card_dirty.size(); ++c)
    if (cs.card_dirty[c]) out.push_back(c);
  return out;
}

namespace {

// Dirty nodes the collector may consult: all of them, or only those on
// dirty cards.
NodeSet consultable_dirty(const CollectorState& cs, const StoreState& store, const CollectorConfig& cfg) {
  if (!cfg.uses_cards()) return cs.dirty;
  NodeSet on_cards(store.memory_size());
  for (std::size_t c : dirty_card_filter(cs)) on_cards |= card_members(c, store.memory_size(), cfg.card_count);
  return cs.dirty & on_cards;
}

void move_dirty_to_gray(CollectorState& cs, const CollectorConfig& cfg, NodeId n) {
  cs.dirty.erase(n);
  cs.gray.insert(n);
  push_order(cs, cfg, n);
}

void clean_cards(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg) {
  if (!cfg.uses_cards()) return;
  for (std::size_t c = 0; c < cs.card_dirty.size(); ++c)
    if (cs.card_dirty[c] && !cs.dirty.intersects(card_members(c, store.memory_size(), cfg.card_count)))
      cs.card_dirty[c] = false;
}

}  // namespace

void interim_dirty_drain(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg,
                         std::size_t budget) {
  require_phase(cs, {Phase::Marking}, "interim_dirty_drain");
  if (budget == 0) return;
  ++cs.stats.micro_steps;
  ++cs.stats.drains;
  cs.steps_since_drain = 0;
  for (NodeId d : consultable_dirty(cs, store, cfg)) {
    if (budget-- == 0) break;
    move_dirty_to_gray(cs, cfg, d);
  }
  clean_cards(cs, store, cfg);
}

void dirty_cleanup(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg) {
  require_phase(cs, {Phase::Marking}, "dirty_cleanup");
  if (!cs.gray.empty()) throw CollectorFault("dirty_cleanup: gray is not empty");
  ++cs.stats.micro_steps;
  cs.mutators_paused = true;
  cs.phase = Phase::DirtyCleanup;
  cs.scanned_cards = dirty_card_filter(cs);
  for (NodeId d : consultable_dirty(cs, store, cfg)) move_dirty_to_gray(cs, cfg, d);
  clean_cards(cs, store, cfg);
  if (cfg.root_scan == RootScan::StopAllHandshake)
    for (std::size_t m = 0; m < store.pre_roots().size(); ++m) scan_pre_root(cs, store, cfg, m);
  if (cs.gray.empty()) cs.phase = Phase::Sweep;
}

void collector_step(CollectorState& cs, StoreState& store, const CollectorConfig& cfg) {
  switch (cs.phase) {
    case Phase::Idle: start_cycle(cs, store, cfg); return;
    case Phase::RootScan: root_scan_step(cs, store, cfg); return;
    case Phase::Marking:
      if (cs.gray.empty() && !cs.cursor) {
        dirty_cleanup(cs, store, cfg);
        return;
      }
      if (cfg.uses_dirty() && cfg.drain_period > 0 && cs.steps_since_drain >= cfg.drain_period &&
          !consultable_dirty(cs, store, cfg).empty()) {
        interim_dirty_drain(cs, store, cfg, cfg.drain_budget);
        return;
      }
      mark_step(cs, store, cfg);
      return;
    case Phase::DirtyCleanup:
      mark_step(cs, store, cfg);
      if (cs.gray.empty() && !cs.cursor) cs.phase = Phase::Sweep;
      return;
    case Phase::Sweep: throw CollectorFault("collector_step: sweep must be run through sweep()");
  }
}

RecycleResult sweep(CollectorState& cs, StoreState& store, const CollectorConfig& cfg) {
  require_phase(cs, {Phase::Sweep}, "sweep");
  ++cs.stats.micro_steps;
  NodeSet recycled = (cs.black | store.supply_set()).complement();
  NodeSet live = store.live();
  NodeSet bad = recycled & live;
  if (!bad.empty())
    throw SafetyViolation(bad, "sweep would recycle live nodes " + store.graph().format(bad));
  NodeSet floating = store.dead_set() - recycled;
  store.recycle(recycled);
  if (cfg.reads_snapshot()) {
    store.set_clone_on_write(false);
    store.clear_clones();
  }
  RecycleResult out{std::move(recycled), std::move(floating), cs.stats};
  cs = CollectorState(store.memory_size());
  return out;
}

}  // namespace gclab

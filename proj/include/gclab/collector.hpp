#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gclab/node_set.hpp"
#include "gclab/store.hpp"

namespace gclab {

enum class Variant { StopTheWorld, Workset, DirtySet, Snapshot, DirtyCards };
enum class Barrier { None, DijkstraInstall, SteeleInstall, YuasaDelete };
enum class Granularity { Coarse, Fine };
enum class GrayPolicy { IteratedScan, StackDFS, QueueBFS, BoundedCache };

/// How mutator-local roots are protected while the cycle runs.
enum class RootScan {
  /// All mutators paused while every pre-root is copied, once at cycle start
  /// and again before the sweep.
  StopAllHandshake,
  /// Per-mutator scans; loads into a pre-root are recorded for the cycle.
  LoadBarrier,
  /// Per-mutator scans; every deleted arc's target is recorded for the cycle.
  DeleteBarrier,
  /// Per-mutator scans with no protection at all.
  Unprotected,
};

/// When a fine-grained step may blacken its cursor node.
enum class BlackenGuard {
  /// Every current successor is already marked (rechecked at blacken time).
  AllMarked,
  /// The cursor reached the last slot; earlier slots are not rechecked.
  CursorOnly,
  /// sucs(x) ∩ (black ∪ gray) = ∅, exactly as typeset in the step figure.
  Printed,
};

enum class Phase { Idle, RootScan, Marking, DirtyCleanup, Sweep };

std::string to_string(Variant v);
std::string to_string(Barrier b);
std::string to_string(Granularity g);
std::string to_string(GrayPolicy p);
std::string to_string(RootScan r);
std::string to_string(BlackenGuard g);
std::string to_string(Phase p);

std::optional<Variant> parse_variant(const std::string& s);
std::optional<Barrier> parse_barrier(const std::string& s);
std::optional<Granularity> parse_granularity(const std::string& s);
std::optional<GrayPolicy> parse_gray_policy(const std::string& s);
std::optional<RootScan> parse_root_scan(const std::string& s);
std::optional<BlackenGuard> parse_blacken_guard(const std::string& s);

struct CollectorConfig {
  Variant variant = Variant::Workset;
  Barrier barrier = Barrier::DijkstraInstall;
  Granularity granularity = Granularity::Coarse;
  GrayPolicy gray_policy = GrayPolicy::StackDFS;
  std::size_t cache_capacity = 4;
  std::size_t card_count = 1;
  RootScan root_scan = RootScan::StopAllHandshake;
  BlackenGuard blacken_guard = BlackenGuard::AllMarked;
  /// Interim dirty drains during marking: nodes moved per drain and marking
  /// steps between drains (0 disables them).
  std::size_t drain_budget = 0;
  std::size_t drain_period = 0;

  /// Variant with its default barrier: Yuasa for Snapshot, none for
  /// StopTheWorld, Dijkstra otherwise.
  static CollectorConfig for_variant(Variant v);

  /// StopTheWorld forces no barrier and the stop-all root scan.
  CollectorConfig normalized() const;

  bool uses_dirty() const { return variant == Variant::DirtySet || variant == Variant::DirtyCards; }
  bool uses_cards() const { return variant == Variant::DirtyCards; }
  bool reads_snapshot() const { return variant == Variant::Snapshot; }
  bool stops_world() const { return variant == Variant::StopTheWorld; }

  std::string describe() const;
};

struct CycleStats {
  std::size_t micro_steps = 0;
  std::size_t coarse_steps = 0;
  std::size_t gray_arc_steps = 0;
  std::size_t blacken_steps = 0;
  std::size_t idle_steps = 0;
  std::size_t barrier_hits = 0;
  std::size_t regrays = 0;
  std::size_t rescans = 0;
  std::size_t cache_overflows = 0;
  std::size_t drains = 0;
  std::size_t root_scans = 0;
  std::size_t cleanup_steps = 0;
  std::size_t allocations = 0;
};

/// Result of one completed cycle.
struct RecycleResult {
  NodeSet recycled;
  /// Dead at cycle end but not recycled.
  NodeSet floating;
  CycleStats stats;
};

struct CollectorState {
  struct Cursor {
    NodeId node = 0;
    std::size_t slot = 0;
  };

  Phase phase = Phase::Idle;
  NodeSet black;
  NodeSet gray;
  NodeSet dirty;
  std::optional<Cursor> cursor;
  std::vector<bool> card_dirty;
  /// Cards whose members were consulted by the last dirty cleanup.
  std::vector<std::size_t> scanned_cards;

  /// Gray-selection bookkeeping: stack / queue / bounded cache entries and
  /// the iterated-scan position.
  std::deque<NodeId> order;
  NodeId scan_pointer = 0;
  bool overflow = false;

  /// Next pre-root to scan during RootScan (1-based mutator index).
  std::size_t next_scan = 1;
  bool mutators_paused = false;
  std::size_t steps_since_drain = 0;
  CycleStats stats;

  explicit CollectorState(std::size_t memory_size = 0);

  NodeSet marked() const { return black | gray | dirty; }
  std::uint64_t digest() const;
};

class CollectorFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised by sweep when it would recycle a live node; the store is left
/// untouched.
class SafetyViolation : public std::runtime_error {
 public:
  SafetyViolation(NodeSet nodes, const std::string& what)
      : std::runtime_error(what), nodes_(std::move(nodes)) {}
  const NodeSet& nodes() const { return nodes_; }

 private:
  NodeSet nodes_;
};

std::size_t card_of(NodeId n, std::size_t memory_size, std::size_t card_count);
NodeSet card_members(std::size_t card, std::size_t memory_size, std::size_t card_count);

/// Upper bound on collector actions in one cycle: start, q+1 root-scan
/// actions, at most 2N marking steps plus one re-blacken and one re-drain per
/// regray, N drains, the cleanup entry and the sweep.
std::size_t cycle_step_bound(std::size_t nodes, std::size_t mutators, std::size_t regrays);

/// Idle -> RootScan. Seeds gray with the globals' targets and the supply
/// head; a stop-all root scan pauses every mutator here.
void start_cycle(CollectorState& cs, StoreState& store, const CollectorConfig& cfg);

/// One root-scan action: copy the next mutator's pre-root targets into gray,
/// or, once all are scanned, resume the mutators and begin marking.
void root_scan_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg);

/// Picks the next gray node according to cfg.gray_policy.
NodeId gray_select(CollectorState& cs, const CollectorConfig& cfg);

/// Blackens one selected gray node after graying all its unmarked
/// successors. Snapshot reads successors through the clone overlay.
void coarse_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg);

/// Grays one unmarked successor of the cursor node, or blackens the cursor
/// node when cfg.blacken_guard allows it.
void fine_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg);

/// coarse_step / fine_step per cfg.granularity.
void mark_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg);

/// Snapshot variant's step; identical to mark_step but checks the variant.
void snapshot_mark_step(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg);

/// Write/read barrier for a mutator op about to be applied to `store`.
/// Returns true if the collector state changed.
bool apply_barrier(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg,
                   const MutatorOp& op);

/// Sets the dirty bit of n's card.
void mark_card_dirty(CollectorState& cs, const CollectorConfig& cfg, std::size_t memory_size, NodeId n);
/// Indices of cards whose bit is set.
std::vector<std::size_t> dirty_card_filter(const CollectorState& cs);

/// Moves up to `budget` dirty nodes (lowest ids, dirty cards only) to gray.
void interim_dirty_drain(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg,
                         std::size_t budget);

/// Marking -> DirtyCleanup once gray is empty: pauses mutators, moves the
/// dirty nodes found on dirty cards into gray and, for the stop-all root
/// scan, rescans every pre-root. Goes straight to Sweep if nothing is gray.
void dirty_cleanup(CollectorState& cs, const StoreState& store, const CollectorConfig& cfg);

/// One collector action in whatever phase the collector is in (Idle starts
/// a cycle; Sweep is handled by sweep()).
void collector_step(CollectorState& cs, StoreState& store, const CollectorConfig& cfg);

/// Recycles nodes \ (black ∪ supply). Throws SafetyViolation if any of them
/// is still live.
RecycleResult sweep(CollectorState& cs, StoreState& store, const CollectorConfig& cfg);

}  // namespace gclab

#include "gclab/scheduler.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <sstream>

#include "gclab/verifier.hpp"

namespace gclab {

std::string TraceEntry::str() const {
  std::ostringstream os;
  os << "v=" << version_before << ' ' << action << " @";
  if (actor == kCollector)
    os << 'c';
  else
    os << 'm' << actor;
  os << " #" << std::hex << std::setw(16) << std::setfill('0') << digest;
  return os.str();
}

std::string Trace::str() const {
  std::string out;
  for (const auto& e : entries) {
    if (e.kind == TraceEntry::Kind::Note) out += "  ";
    out += e.str();
    out += '\n';
  }
  return out;
}

std::vector<std::size_t> Trace::actors() const {
  std::vector<std::size_t> out;
  for (const auto& e : entries)
    if (e.kind == TraceEntry::Kind::Action) out.push_back(e.actor);
  return out;
}

std::vector<std::string> Trace::slice(std::size_t last) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i <= last && i < entries.size(); ++i) out.push_back(entries[i].str());
  return out;
}

std::optional<CheckLevel> parse_check_level(const std::string& s) {
  if (s == "none") return CheckLevel::None;
  if (s == "safety") return CheckLevel::Safety;
  if (s == "all") return CheckLevel::All;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

WorkloadGen::WorkloadGen(const WorkloadParams& params, std::size_t mutator)
    : params_(params), mutator_(mutator), remaining_(params.op_count),
      rng_(params.seed * 0x9e3779b97f4a7c15ull + mutator) {}

namespace {

struct Moves {
  std::vector<NodeId> visible;
  std::vector<std::pair<NodeId, NodeId>> arcs;
  std::vector<NodeId> held;
  bool can_alloc = false;
};

Moves legal_moves(const StoreState& store, std::size_t m) {
  Moves mv;
  // visible_to(m) ⊆ active, so every heap op on these nodes is legal.
  NodeSet vis = store.visible_to(m);
  mv.visible = vis.to_vector();
  for (NodeId a : mv.visible)
    for (NodeId b : store.graph().slots(a)) mv.arcs.push_back({a, b});
  mv.held = store.pre_roots()[m].slots;
  mv.can_alloc = !mv.visible.empty() && !store.supply().empty();
  return mv;
}

}  // namespace

bool WorkloadGen::has_move(const StoreState& store) const {
  if (remaining_ == 0) return false;
  Moves mv = legal_moves(store, mutator_);
  return (params_.add_arc > 0 && !mv.visible.empty()) || (params_.del_arc > 0 && !mv.arcs.empty()) ||
         (params_.add_new > 0 && mv.can_alloc) ||
         (params_.local > 0 && (!mv.visible.empty() || !mv.held.empty()));
}

std::optional<MutatorOp> WorkloadGen::next(const StoreState& store) {
  if (remaining_ == 0) return std::nullopt;
  Moves mv = legal_moves(store, mutator_);
  bool local_ok = !mv.visible.empty() || !mv.held.empty();
  double w[4] = {
      mv.visible.empty() ? 0 : params_.add_arc,
      mv.arcs.empty() ? 0 : params_.del_arc,
      mv.can_alloc ? params_.add_new : 0,
      local_ok ? params_.local : 0,
  };
  double total = w[0] + w[1] + w[2] + w[3];
  if (total <= 0) {
    remaining_ = 0;
    return std::nullopt;
  }
  double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53 * total;
  int kind = 0;
  while (kind < 3 && (u >= w[kind] || w[kind] == 0)) {
    u -= w[kind];
    ++kind;
  }
  auto pick = [this](std::size_t n) { return static_cast<std::size_t>(rng_() % n); };
  --remaining_;
  switch (kind) {
    case 0: return MutatorOp::add_arc(mv.visible[pick(mv.visible.size())], mv.visible[pick(mv.visible.size())]);
    case 1: {
      auto [a, b] = mv.arcs[pick(mv.arcs.size())];
      return MutatorOp::del_arc(a, b);
    }
    case 2: return MutatorOp::add_new(mv.visible[pick(mv.visible.size())]);
    default: {
      bool load = mv.held.empty() || (!mv.visible.empty() && (rng_() & 1u));
      if (load) return MutatorOp::load(mutator_, mv.visible[pick(mv.visible.size())]);
      return MutatorOp::drop(mutator_, mv.held[pick(mv.held.size())]);
    }
  }
}

std::vector<MutatorOp> generate_workload(const WorkloadParams& params, StoreState store, std::size_t mutator) {
  WorkloadGen gen(params, mutator);
  std::vector<MutatorOp> out;
  while (auto op = gen.next(store)) {
    store.apply(*op);
    out.push_back(*op);
  }
  return out;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(std::shared_ptr<const Scenario> scenario, CheckLevel checks)
    : scenario_(std::move(scenario)),
      checks_(checks),
      cfg_(scenario_->collector.normalized()),
      store_(scenario_->initial_store()),
      cs_(store_.memory_size()) {
  mutators_.resize(scenario_->mutator_count());
  for (std::size_t m = 0; m < mutators_.size(); ++m)
    if (const auto& w = scenario_->mutators[m].workload) mutators_[m].gen = WorkloadGen(*w, m + 1);
  online_.scenario = scenario_->name;
  online_.config = cfg_.describe();
  update_stalls();
  for (auto& e : trace_.entries) e.digest = digest();
}

const CycleRecord* Simulation::open_cycle() const {
  if (cycles_.empty() || cs_.phase == Phase::Idle) return nullptr;
  return &cycles_.back();
}

const MutatorOp* Simulation::scripted_next(std::size_t m) const {
  const auto& rt = mutators_[m - 1];
  const auto& script = scenario_->mutators[m - 1].script;
  if (rt.gen || rt.next >= script.size()) return nullptr;
  return &script[rt.next];
}

bool Simulation::has_ops(std::size_t m) const {
  const auto& rt = mutators_[m - 1];
  if (rt.gen) return rt.gen->remaining() > 0;
  return rt.next < scenario_->mutators[m - 1].script.size();
}

std::string Simulation::blocked_reason(std::size_t m) const {
  if (m == 0 || m > mutators_.size()) return "no such mutator";
  const auto& rt = mutators_[m - 1];
  if (!has_ops(m)) return "done";
  if (mutators_paused()) return "paused";
  if (rt.stalled) return "stalled";
  if (rt.gen) return rt.gen->has_move(store_) ? "" : "done";
  std::string why;
  if (!store_.is_legal(*scripted_next(m), &why)) return "illegal: " + scripted_next(m)->str(store_.graph()) + ": " + why;
  return "";
}

bool Simulation::enabled(std::size_t actor) const {
  if (halt_) return false;
  if (actor == kCollector) return scenario_->collector_enabled && (cs_.phase != Phase::Idle || wants_cycle());
  if (actor > mutators_.size() || mutators_paused()) return false;
  const auto& rt = mutators_[actor - 1];
  if (rt.stalled) return false;
  if (rt.gen) return rt.gen->has_move(store_);
  const MutatorOp* op = scripted_next(actor);
  if (!op) return false;
  if (op->kind == OpKind::AddNew && store_.supply().empty()) return false;
  return store_.is_legal(*op);
}

bool Simulation::any_mutator_enabled() const {
  for (std::size_t m = 1; m <= mutators_.size(); ++m)
    if (enabled(m)) return true;
  return false;
}

bool Simulation::wants_cycle() const {
  if (voluntary_cycles_ < scenario_->cycles) return true;
  bool stalled = std::any_of(mutators_.begin(), mutators_.end(), [](const auto& rt) { return rt.stalled; });
  if (stalled && stall_retry_) return true;
  return scenario_->final_cycle && !final_started_ && !any_mutator_enabled();
}

std::vector<std::size_t> Simulation::enabled_actors() const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a <= mutators_.size(); ++a)
    if (enabled(a)) out.push_back(a);
  return out;
}

bool Simulation::finished() const { return halt_ || enabled_actors().empty(); }

std::uint64_t Simulation::digest() const {
  std::uint64_t h = store_.digest();
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(cs_.digest());
  for (const auto& rt : mutators_) {
    mix(rt.next);
    mix(rt.gen ? rt.gen->remaining() : 0);
    mix(rt.stalled);
  }
  mix(voluntary_cycles_);
  mix(final_started_);
  mix(stall_retry_);
  mix(cycles_.size());
  return h;
}

void Simulation::log(TraceEntry::Kind kind, std::size_t actor, std::string action, std::uint64_t version_before) {
  trace_.entries.push_back({kind, actor, std::move(action), version_before, 0});
}

void Simulation::stop(Halt::Reason reason, std::string detail, NodeSet nodes) {
  if (!halt_) halt_ = Halt{reason, std::move(detail), std::move(nodes)};
}

void Simulation::update_stalls() {
  for (std::size_t m = 1; m <= mutators_.size(); ++m) {
    auto& rt = mutators_[m - 1];
    const MutatorOp* op = scripted_next(m);
    bool blocked = op && op->kind == OpKind::AddNew && store_.supply().empty() && store_.is_legal(*op);
    if (blocked && !rt.stalled) {
      rt.stalled = true;
      stall_retry_ = true;
      stalls_.push_back({m, trace_.entries.size(), std::nullopt});
      log(TraceEntry::Kind::Note, m, "stall", store_.version());
    } else if (!blocked && rt.stalled) {
      rt.stalled = false;
      for (auto it = stalls_.rbegin(); it != stalls_.rend(); ++it)
        if (it->mutator == m && !it->resumed_entry) {
          it->resumed_entry = trace_.entries.size();
          break;
        }
      log(TraceEntry::Kind::Note, m, "resume", store_.version());
    }
  }
}

namespace {

std::string describe_marking(const HeapGraph& g, const CollectorState& before, const CollectorState& after) {
  std::ostringstream os;
  NodeSet blackened = after.black - before.black;
  NodeSet grayed = after.gray - before.gray - before.dirty;
  NodeSet from_dirty = before.dirty - after.dirty;
  if (!blackened.empty()) os << " black " << g.format(blackened);
  if (!grayed.empty()) os << " gray " << g.format(grayed);
  if (!from_dirty.empty()) os << " undirty " << g.format(from_dirty);
  return os.str();
}

}  // namespace

void Simulation::collector_action() {
  std::uint64_t vb = store_.version();
  const auto& g = store_.graph();
  std::size_t q = mutators_.size();
  std::string action;

  if (cs_.phase == Phase::Idle) {
    const char* why = "start";
    if (voluntary_cycles_ < scenario_->cycles) {
      ++voluntary_cycles_;
    } else if (std::any_of(mutators_.begin(), mutators_.end(), [](const auto& rt) { return rt.stalled; }) &&
               stall_retry_) {
      why = "start (stall)";
    } else {
      final_started_ = true;
      why = "start (final)";
    }
    CycleRecord rec;
    rec.index = cycles_.size();
    rec.start_entry = trace_.entries.size();
    rec.start_store = store_;
    start_cycle(cs_, store_, cfg_);
    rec.start_store.set_clone_on_write(false);
    cycles_.push_back(std::move(rec));
    action = std::string(why) + " gray " + g.format(cs_.gray);
  } else if (cs_.phase == Phase::Sweep) {
    CycleRecord& rec = cycles_.back();
    rec.end_store = store_;
    rec.black_final = cs_.black;
    ++rec.collector_actions;
    try {
      rec.result = sweep(cs_, store_, cfg_);
      rec.completed = true;
      action = "sweep recycled " + g.format(rec.result.recycled);
      bool still = std::any_of(mutators_.begin(), mutators_.end(), [](const auto& rt) { return rt.stalled; });
      if (still && rec.result.recycled.empty()) stall_retry_ = false;
    } catch (const SafetyViolation& e) {
      rec.safety_abort = true;
      rec.unsafe = e.nodes();
      action = "sweep aborted: would recycle live " + g.format(e.nodes());
      stop(Halt::Reason::SafetyViolation, e.what(), e.nodes());
    }
    rec.end_entry = trace_.entries.size();
    trace_.cycle_boundaries.push_back(rec.end_entry);
    log(TraceEntry::Kind::Action, kCollector, std::move(action), vb);
    return;
  } else {
    CollectorState before = cs_;
    if (cs_.phase == Phase::RootScan) {
      action = cs_.next_scan <= q ? "scan " + std::to_string(cs_.next_scan) : "mark";
    } else if (cs_.phase == Phase::Marking && cs_.gray.empty() && !cs_.cursor) {
      action = "cleanup";
    } else {
      action = cfg_.granularity == Granularity::Coarse ? "coarse" : "fine";
    }
    collector_step(cs_, store_, cfg_);
    if (cs_.stats.drains != before.stats.drains) action = "drain";
    action += describe_marking(g, before, cs_);
    if (cs_.phase == Phase::Sweep && before.phase != Phase::Sweep) action += " -> sweep";
  }

  CycleRecord& rec = cycles_.back();
  ++rec.collector_actions;
  rec.step_bound = cycle_step_bound(store_.memory_size(), q, cs_.stats.regrays);
  log(TraceEntry::Kind::Action, kCollector, std::move(action), vb);
  if (rec.collector_actions > rec.step_bound) {
    rec.bound_exceeded = true;
    rec.end_store = store_;
    rec.black_final = cs_.black;
    stop(Halt::Reason::Termination,
         "cycle " + std::to_string(rec.index) + " exceeded " + std::to_string(rec.step_bound) + " collector actions",
         NodeSet(store_.memory_size()));
  }
}

void Simulation::mutator_action(std::size_t m) {
  auto& rt = mutators_[m - 1];
  std::uint64_t vb = store_.version();
  MutatorOp op = rt.gen ? *rt.gen->next(store_) : *scripted_next(m);
  std::string text = op.str(store_.graph());
  bool hit = apply_barrier(cs_, store_, cfg_, op);
  try {
    store_.apply(op);
  } catch (const IllegalMutation& e) {
    stop(Halt::Reason::IllegalMutation, e.what(), NodeSet(store_.memory_size()));
    log(TraceEntry::Kind::Action, m, text + " (illegal)", vb);
    return;
  }
  if (!rt.gen) ++rt.next;
  rt.executed.push_back(op);
  if (!cycles_.empty() && cs_.phase != Phase::Idle) ++cycles_.back().mutator_actions;
  stall_retry_ = true;
  if (hit) text += " [barrier]";
  log(TraceEntry::Kind::Action, m, std::move(text), vb);
}

void Simulation::step(std::size_t actor) {
  if (!enabled(actor)) {
    throw CollectorFault("actor " + std::to_string(actor) + " is not enabled" +
                         (actor ? " (" + blocked_reason(actor) + ")" : std::string()));
  }
  std::size_t first = trace_.entries.size();
  std::optional<StoreState> before;
  if (actor != kCollector) {
    if (checks_ == CheckLevel::All) before = store_;
    mutator_action(actor);
  } else {
    collector_action();
  }
  ++actions_;
  update_stalls();
  if (checks_ == CheckLevel::All && !halt_) online_checks(before ? &*before : nullptr);
  std::uint64_t d = digest();
  for (std::size_t i = first; i < trace_.entries.size(); ++i) trace_.entries[i].digest = d;
}

void Simulation::online_checks(const StoreState* before) {
  std::vector<InvariantId> checked;
  auto failures = check_state(*this, before, &checked);
  std::size_t entry = trace_.entries.size() - 1;
  for (InvariantId id : checked) {
    auto f = std::find_if(failures.begin(), failures.end(), [id](const Failure& x) { return x.id == id; });
    if (f == failures.end()) {
      online_.pass(id);
      continue;
    }
    std::vector<std::string> names;
    for (NodeId n : f->nodes) names.push_back(store_.graph().name(n));
    bool first = !online_.at(id).failed();
    online_.fail(id, f->detail, std::move(names), entry);
    if (first) online_.at(id).slice = trace_.slice(entry);
  }
}

void Simulation::run_token(const std::string& token) {
  if (halt_ || token.empty()) return;
  if (token[0] == 'c') {
    if (token.size() > 1 && token[1] == ':') {
      NodeId x = store_.graph().find(token.substr(2));
      std::size_t done = std::count_if(cycles_.begin(), cycles_.end(), [](const auto& c) { return c.completed; });
      while (enabled(kCollector) && !(x < store_.memory_size() && cs_.black.contains(x))) {
        step(kCollector);
        std::size_t now = std::count_if(cycles_.begin(), cycles_.end(), [](const auto& c) { return c.completed; });
        if (now != done) break;
      }
      return;
    }
    std::size_t n = 1;
    if (token.size() > 1) std::from_chars(token.data() + 1, token.data() + token.size(), n);
    for (std::size_t i = 0; i < n && enabled(kCollector); ++i) step(kCollector);
    return;
  }
  std::size_t m = 0;
  std::from_chars(token.data() + 1, token.data() + token.size(), m);
  if (m == 0 || m > mutators_.size() || !has_ops(m)) return;
  while (!enabled(m) && !halt_ && (mutators_paused() || mutators_[m - 1].stalled) && enabled(kCollector))
    step(kCollector);
  if (enabled(m)) {
    step(m);
    return;
  }
  std::string why = blocked_reason(m);
  if (why.rfind("illegal", 0) == 0) {
    log(TraceEntry::Kind::Note, m, why, store_.version());
    trace_.entries.back().digest = digest();
    stop(Halt::Reason::IllegalMutation, why, NodeSet(store_.memory_size()));
  }
}

void Simulation::run_to_completion(std::size_t max_actions) {
  for (std::size_t i = 0; i < max_actions; ++i) {
    if (halt_) return;
    std::size_t pick = 0;
    bool found = false;
    for (std::size_t m = 1; m <= mutators_.size() && !found; ++m)
      if (enabled(m)) {
        pick = m;
        found = true;
      }
    if (!found) {
      if (!enabled(kCollector)) return;
      pick = kCollector;
    }
    step(pick);
  }
  stop(Halt::Reason::Termination, "action limit reached", NodeSet(store_.memory_size()));
}

void Simulation::run_random(std::uint64_t seed, std::size_t mutator_weight, std::size_t collector_weight,
                            std::size_t max_actions) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < max_actions; ++i) {
    auto actors = enabled_actors();
    if (actors.empty()) return;
    bool collector = actors.front() == kCollector;
    std::size_t muts = actors.size() - (collector ? 1 : 0);
    std::size_t pick;
    if (muts == 0) {
      pick = kCollector;
    } else if (!collector) {
      pick = actors[rng() % muts];
    } else {
      std::size_t total = mutator_weight + collector_weight;
      bool take_mutator = total == 0 ? true : rng() % total < mutator_weight;
      pick = take_mutator ? actors[1 + rng() % muts] : kCollector;
    }
    step(pick);
  }
  stop(Halt::Reason::Termination, "action limit reached", NodeSet(store_.memory_size()));
}

// ---------------------------------------------------------------------------

std::vector<RecycleResult> RunResult::results() const {
  std::vector<RecycleResult> out;
  for (const auto& c : sim.cycles())
    if (c.completed) out.push_back(c.result);
  return out;
}

Scenario freeze(const Simulation& sim) {
  Scenario sc = sim.scenario();
  for (std::size_t m = 1; m <= sc.mutators.size(); ++m) {
    sc.mutators[m - 1].workload.reset();
    sc.mutators[m - 1].script = sim.executed(m);
  }
  sc.schedule = ScheduleSpec{};
  sc.schedule.kind = ScheduleKind::Scripted;
  for (std::size_t a : sim.trace().actors()) sc.schedule.tokens.push_back(a == kCollector ? "c" : "m" + std::to_string(a));
  return sc;
}

namespace {

void drive(Simulation& sim, const Scenario& sc) {
  switch (sc.schedule.kind) {
    case ScheduleKind::Scripted:
      for (const auto& t : sc.schedule.tokens) {
        if (sim.halt()) break;
        sim.run_token(t);
      }
      sim.run_to_completion();
      break;
    case ScheduleKind::Random:
      sim.run_random(sc.schedule.seed, sc.schedule.mutator_weight, sc.schedule.collector_weight);
      break;
    case ScheduleKind::Exhaustive:
      sim.run_to_completion();
      break;
  }
}

bool still_violates(const Scenario& sc, InvariantId id) {
  Simulation sim(sc, CheckLevel::All);
  drive(sim, sc);
  if (sim.halt() && sim.halt()->reason == Simulation::Halt::Reason::IllegalMutation) return false;
  return verify(sim, CheckLevel::All).at(id).failed();
}

std::vector<std::string> expand_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (t[0] == 'c' && t.size() > 1 && t[1] != ':') {
      std::size_t n = 0;
      std::from_chars(t.data() + 1, t.data() + t.size(), n);
      out.insert(out.end(), n, "c");
    } else {
      out.push_back(t);
    }
  }
  return out;
}

std::vector<std::string> compress_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size();) {
    if (tokens[i] != "c") {
      out.push_back(tokens[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < tokens.size() && tokens[j] == "c") ++j;
    out.push_back(j - i == 1 ? "c" : "c" + std::to_string(j - i));
    i = j;
  }
  return out;
}

Counterexample make_counterexample(const Simulation& sim, const VerificationReport& report, InvariantId id,
                                   bool minimize) {
  Counterexample cx;
  cx.invariant = id;
  cx.detail = report.at(id).detail;
  cx.nodes = report.at(id).nodes;
  cx.scenario = freeze(sim);
  if (minimize) cx.scenario = minimize_counterexample(cx.scenario, id);
  Simulation replay(cx.scenario, CheckLevel::All);
  drive(replay, cx.scenario);
  cx.trace = replay.trace().str();
  return cx;
}

InvariantId primary_failure(const VerificationReport& report) {
  auto f = report.failures();
  if (std::find(f.begin(), f.end(), InvariantId::Safety) != f.end()) return InvariantId::Safety;
  return f.front();
}

}  // namespace

Scenario minimize_counterexample(const Scenario& scripted, InvariantId id) {
  Scenario best = scripted;
  best.schedule.tokens = expand_tokens(best.schedule.tokens);
  if (!still_violates(best, id)) return scripted;
  std::size_t budget = 4000;
  bool progress = true;
  while (progress && budget > 0) {
    progress = false;
    for (std::size_t i = best.schedule.tokens.size(); i-- > 0 && budget > 0;) {
      Scenario cand = best;
      const std::string tok = cand.schedule.tokens[i];
      if (tok[0] == 'm') {
        // Drop the op this token would run as well.
        std::size_t m = std::stoul(tok.substr(1));
        std::size_t nth = std::count(cand.schedule.tokens.begin(), cand.schedule.tokens.begin() + i, tok);
        auto& script = cand.mutators[m - 1].script;
        if (nth < script.size()) script.erase(script.begin() + nth);
      }
      cand.schedule.tokens.erase(cand.schedule.tokens.begin() + i);
      --budget;
      if (still_violates(cand, id)) {
        best = std::move(cand);
        progress = true;
      }
    }
  }
  best.schedule.tokens = compress_tokens(best.schedule.tokens);
  return best;
}

RunResult run(const Scenario& scenario, const RunOptions& options) {
  RunResult out{Simulation(scenario, options.checks), {}, std::nullopt, std::nullopt};
  drive(out.sim, scenario);
  out.report = verify(out.sim, options.checks);
  if (const auto& h = out.sim.halt(); h && h->reason == Simulation::Halt::Reason::IllegalMutation)
    out.error = h->detail;
  if (!out.report.passed() && !out.error)
    out.counterexample = make_counterexample(out.sim, out.report, primary_failure(out.report), options.minimize);
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json ExplorationReport::to_json() const {
  nlohmann::json j{{"states", states},   {"interleavings", interleavings},
                   {"violating", violating}, {"complete", complete}};
  if (!complete) j["incomplete_reason"] = incomplete_reason;
  auto& v = j["violations"] = nlohmann::json::object();
  for (const auto& [id, n] : violations) {
    nlohmann::json e{{"interleavings", n}};
    if (auto it = counterexamples.find(id); it != counterexamples.end()) {
      e["detail"] = it->second.detail;
      e["nodes"] = it->second.nodes;
      e["schedule"] = it->second.scenario.schedule.tokens;
    }
    v[to_string(id)] = std::move(e);
  }
  return j;
}

namespace {

struct Explorer {
  const ExploreBounds& bounds;
  CheckLevel checks;
  bool minimize;
  ExplorationReport report;

  void leaf(const Simulation& sim) {
    ++report.interleavings;
    VerificationReport r = verify(sim, checks);
    if (r.passed()) return;
    ++report.violating;
    for (InvariantId id : r.failures()) {
      ++report.violations[id];
      if (!report.counterexamples.count(id))
        report.counterexamples.emplace(id, make_counterexample(sim, r, id, minimize));
    }
  }

  void dfs(Simulation sim, std::size_t depth) {
    if (report.states >= bounds.max_states) {
      report.complete = false;
      report.incomplete_reason = "max_states reached";
      return;
    }
    ++report.states;
    auto actors = sim.finished() ? std::vector<std::size_t>{} : sim.enabled_actors();
    if (actors.empty()) {
      leaf(sim);
      return;
    }
    if (depth >= bounds.max_depth) {
      report.complete = false;
      report.incomplete_reason = "max_depth reached";
      return;
    }
    for (std::size_t i = 0; i + 1 < actors.size(); ++i) {
      Simulation child = sim;
      child.step(actors[i]);
      dfs(std::move(child), depth + 1);
    }
    sim.step(actors.back());
    dfs(std::move(sim), depth + 1);
  }
};

}  // namespace

ExplorationReport explore_interleavings(const Scenario& scenario, const ExploreBounds& bounds, CheckLevel checks,
                                        bool minimize) {
  Explorer ex{bounds, checks, minimize, {}};
  std::size_t ops = 0;
  for (const auto& m : scenario.mutators) ops += m.workload ? m.workload->op_count : m.script.size();
  if (bounds.max_nodes && scenario.memory_size() > bounds.max_nodes) {
    ex.report.complete = false;
    ex.report.incomplete_reason = "scenario has more than max_nodes nodes";
    return ex.report;
  }
  if (bounds.max_ops && ops > bounds.max_ops) {
    ex.report.complete = false;
    ex.report.incomplete_reason = "scenario has more than max_ops mutator ops";
    return ex.report;
  }
  ex.dfs(Simulation(scenario, checks == CheckLevel::All ? CheckLevel::All : CheckLevel::None), 0);
  return ex.report;
}

}  // namespace gclab

#include "gclab/fixpoint.hpp"

#include <memory>
#include <random>
#include <sstream>

namespace gclab::fixpoint {

MonotoneFn successor_extension(const HeapGraph& g) {
  return {g.size(), [g](const NodeSet& s) { return s | g.sucs(s); }};
}

MonotoneFn successor_map(const HeapGraph& g) {
  return {g.size(), [g](const NodeSet& s) { return g.sucs(s); }};
}

MonotoneFn seeded_extension(const HeapGraph& g, NodeSet roots) {
  return {g.size(), [g, roots = std::move(roots)](const NodeSet& s) { return roots | g.sucs(s); }};
}

MonotoneFn identity(std::size_t universe) {
  return {universe, [](const NodeSet& s) { return s; }};
}

MonotoneFn constant(NodeSet value) {
  std::size_t u = value.universe();
  return {u, [value = std::move(value)](const NodeSet&) { return value; }};
}

FnSequence FnSequence::from_graphs(std::span<const HeapGraph> graphs, bool reflexive) {
  std::vector<MonotoneFn> fns;
  fns.reserve(graphs.size());
  for (const auto& g : graphs)
    fns.push_back(reflexive ? successor_extension(g) : successor_map(g));
  return FnSequence(std::move(fns));
}

NodeSet closure(const MonotoneFn& f, const NodeSet& x) {
  NodeSet s = x;
  while (true) {
    NodeSet next = s | f(s);
    if (next == s) return s;
    s = std::move(next);
  }
}

NodeSet transitive_closure(const MonotoneFn& f, const NodeSet& x) {
  return closure(f, f(x));
}

std::vector<NodeSet> kleene_iterates(const MonotoneFn& f) {
  std::vector<NodeSet> chain{NodeSet(f.universe)};
  while (true) {
    NodeSet next = f(chain.back());
    if (next == chain.back()) return chain;
    chain.push_back(std::move(next));
  }
}

NodeSet kleene_chain(const MonotoneFn& f) { return kleene_iterates(f).back(); }

NodeSet workset_of(const HeapGraph& g, const NodeSet& roots, const NodeSet& w) {
  NodeSet outside = w.complement();
  return (w & roots) | (g.sucs(outside) & w);
}

NodeSet dead_step(const HeapGraph& g, const NodeSet& roots, const NodeSet& x) {
  NodeSet marked = roots | g.sucs(x.complement());
  return marked.complement();
}

NodeSet raw_dead_iteration(const HeapGraph& g, const NodeSet& roots) {
  NodeSet w = g.nodes();
  while (true) {
    NodeSet next = dead_step(g, roots, w);
    if (next == w) return w;
    w = std::move(next);
  }
}

NodeSet workset_dead_iteration(const HeapGraph& g, const NodeSet& roots,
                               std::vector<NodeId>* removed) {
  NodeSet w = g.nodes();
  while (true) {
    NodeSet ws = workset_of(g, roots, w);
    if (ws.empty()) return w;
    NodeId z = ws.lowest();
    if (removed) removed->push_back(z);
    w.erase(z);
  }
}

OptimizedRun optimized_workset_dead_iteration(const HeapGraph& g, const NodeSet& roots) {
  OptimizedRun run;
  NodeSet w = g.nodes();
  NodeSet ws = roots;
  run.log.push_back({w, ws});
  while (!ws.empty()) {
    NodeId z = ws.lowest();
    // Joint update: both right-hand sides read the pre-update W.
    NodeSet next_ws = ws | (g.sucs(z) & w);
    next_ws.erase(z);
    w.erase(z);
    ws = std::move(next_ws);
    run.log.push_back({w, ws});
  }
  run.dead = std::move(w);
  return run;
}

StepChooser jump_chooser() {
  return [](const NodeSet&, const NodeSet& bound, std::size_t) { return bound; };
}

StepChooser single_element_chooser() {
  return [](const NodeSet& current, const NodeSet& bound, std::size_t) {
    NodeSet next = current;
    next.insert((bound - current).lowest());
    return next;
  };
}

StepChooser seeded_chooser(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng](const NodeSet& current, const NodeSet& bound, std::size_t) {
    NodeSet fresh = bound - current;
    auto candidates = fresh.to_vector();
    NodeSet next = current;
    // At least one new element, each further one with probability 1/2.
    next.insert(candidates[(*rng)() % candidates.size()]);
    for (NodeId n : candidates)
      if ((*rng)() & 1u) next.insert(n);
    return next;
  };
}

namespace {

NodeSet step_bound(const NodeSet& s, const NodeSet& fs, StepRule rule) {
  return rule == StepRule::Inflationary ? fs : s | fs;
}

bool is_stable(const NodeSet& s, const NodeSet& fs, StepRule rule) {
  return rule == StepRule::Inflationary ? fs == s : fs.subset_of(s);
}

}  // namespace

ApproxSequence micro_step_run(const FnSequence& fs, const NodeSet& r,
                              const StepChooser& chooser, StepRule rule) {
  ApproxSequence seq;
  seq.steps.push_back(r);
  for (std::size_t i = 0;; ++i) {
    const NodeSet& s = seq.steps.back();
    seq.fn_index.push_back(fs.index(i));
    NodeSet image = fs.at(i)(s);
    if (is_stable(s, image, rule)) return seq;
    NodeSet bound = step_bound(s, image, rule);
    if (!s.proper_subset_of(bound)) {
      std::ostringstream os;
      os << "no admissible step at i=" << i << ": f_i(s_i) does not extend s_i";
      throw PolicyFault(os.str());
    }
    NodeSet next = chooser(s, bound, i);
    if (!s.proper_subset_of(next) || !next.subset_of(bound)) {
      std::ostringstream os;
      os << "chooser proposal " << next.str() << " at i=" << i << " violates s_i "
         << s.str() << " ⊂ s' ⊆ " << bound.str();
      throw PolicyFault(os.str());
    }
    seq.steps.push_back(std::move(next));
  }
}

bool is_admissible(const ApproxSequence& seq, const FnSequence& fs, StepRule rule) {
  if (seq.steps.empty() || seq.fn_index.size() != seq.steps.size()) return false;
  if (seq.steps.size() > fs.universe() + 1) return false;
  for (std::size_t i = 0; i + 1 < seq.steps.size(); ++i) {
    const NodeSet& s = seq.steps[i];
    NodeSet bound = step_bound(s, fs.at(seq.fn_index[i])(s), rule);
    if (!s.proper_subset_of(seq.steps[i + 1]) || !seq.steps[i + 1].subset_of(bound))
      return false;
  }
  const NodeSet& last = seq.steps.back();
  return is_stable(last, fs.at(seq.fn_index.back())(last), rule);
}

bool LemmaReport::all_passed() const {
  for (const auto& v : verdicts)
    if (!v.passed) return false;
  return true;
}

const LemmaVerdict* LemmaReport::find(const std::string& lemma) const {
  for (const auto& v : verdicts)
    if (v.lemma == lemma) return &v;
  return nullptr;
}

namespace {

void fail(LemmaVerdict& v, std::string witness) {
  if (v.passed) {
    v.passed = false;
    v.witness = std::move(witness);
  }
}

}  // namespace

LemmaReport check_closure_lemmas(const MonotoneFn& f, std::span<const NodeSet> samples) {
  LemmaVerdict inflationary{"closure.inflationary", true, {}};
  LemmaVerdict idempotent{"closure.idempotent", true, {}};
  LemmaVerdict fixpoint{"closure.fixpoint", true, {}};
  LemmaVerdict absorb{"closure.absorbs_step", true, {}};
  LemmaVerdict monotone{"closure.monotone", true, {}};
  for (const auto& x : samples) {
    NodeSet cx = closure(f, x);
    if (!x.subset_of(cx)) fail(inflationary, "x=" + x.str());
    if (closure(f, cx) != cx) fail(idempotent, "x=" + x.str());
    if (!f(cx).subset_of(cx)) fail(fixpoint, "x=" + x.str());
    NodeSet fx = f(x);
    if (x.subset_of(fx) && closure(f, fx) != cx) fail(absorb, "x=" + x.str());
    for (const auto& y : samples)
      if (x.subset_of(y) && !cx.subset_of(closure(f, y)))
        fail(monotone, "x=" + x.str() + " y=" + y.str());
  }
  return {{inflationary, idempotent, fixpoint, absorb, monotone}};
}

LemmaReport check_sequence_lemmas(const FnSequence& fs, std::span<const NodeSet> bases,
                                  const ApproxSequence* run) {
  LemmaVerdict antitone{"antitone", true, {}};
  LemmaVerdict decreasing{"decreasing", true, {}};
  LemmaVerdict invariance{"invariance", true, {}};
  for (const auto& x : bases) {
    NodeSet prev = closure(fs.at(0), x);
    for (std::size_t i = 1; i < fs.size(); ++i) {
      NodeSet cur = closure(fs.at(i), x);
      if (!cur.subset_of(prev)) {
        std::ostringstream os;
        os << "x=" << x.str() << " i=" << i << ": " << cur.str() << " ⊄ " << prev.str();
        fail(antitone, os.str());
      }
      prev = std::move(cur);
    }
  }
  if (run) {
    for (std::size_t i = 0; i + 1 < run->steps.size(); ++i) {
      NodeSet here = closure(fs.at(run->fn_index[i]), run->steps[i]);
      NodeSet next = closure(fs.at(run->fn_index[i + 1]), run->steps[i + 1]);
      if (!next.subset_of(here)) {
        std::ostringstream os;
        os << "i=" << i << ": " << next.str() << " ⊄ " << here.str();
        fail(decreasing, os.str());
      }
    }
    if (fs.size() == 1) {
      NodeSet base = closure(fs.at(0), run->steps.front());
      for (std::size_t i = 0; i < run->steps.size(); ++i)
        if (closure(fs.at(0), run->steps[i]) != base)
          fail(invariance, "i=" + std::to_string(i));
    }
  }
  return {{antitone, decreasing, invariance}};
}

}  // namespace gclab::fixpoint

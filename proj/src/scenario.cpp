#include "gclab/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace gclab {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

struct Line {
  std::size_t number;
  std::string text;
};

struct Section {
  std::string header;
  std::size_t number;
  std::vector<Line> lines;
};

template <typename T>
T parse_number(const std::string& s, std::size_t line, const char* what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ScenarioParseError(line, std::string("bad ") + what + " '" + s + "'");
  return v;
}

double parse_weight(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size() && v >= 0) return v;
  } catch (const std::exception&) {
  }
  throw ScenarioParseError(line, "bad weight '" + s + "'");
}

bool parse_bool(const std::string& s, std::size_t line) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ScenarioParseError(line, "bad boolean '" + s + "'");
}

std::pair<std::string, std::string> split_kv(const std::string& s, char sep, std::size_t line) {
  auto at = s.find(sep);
  if (at == std::string::npos) throw ScenarioParseError(line, "expected key" + std::string(1, sep) + "value, got '" + s + "'");
  return {trim(s.substr(0, at)), trim(s.substr(at + 1))};
}

class NameTable {
 public:
  NodeId intern(const std::string& n) {
    auto [it, fresh] = ids_.try_emplace(n, static_cast<NodeId>(names_.size()));
    if (fresh) names_.push_back(n);
    return it->second;
  }
  NodeId at(const std::string& n, std::size_t line) const {
    auto it = ids_.find(n);
    if (it == ids_.end()) throw ScenarioParseError(line, "unknown node '" + n + "'");
    return it->second;
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::map<std::string, NodeId> ids_;
  std::vector<std::string> names_;
};

MutatorOp parse_op(const std::vector<std::string>& w, const NameTable& names, std::size_t mutator,
                   std::size_t line) {
  auto arity = [&](std::size_t n) {
    if (w.size() != n + 1) throw ScenarioParseError(line, "'" + w[0] + "' takes " + std::to_string(n) + " arguments");
  };
  if (w[0] == "addArc") {
    arity(2);
    return MutatorOp::add_arc(names.at(w[1], line), names.at(w[2], line));
  }
  if (w[0] == "delArc") {
    arity(2);
    return MutatorOp::del_arc(names.at(w[1], line), names.at(w[2], line));
  }
  if (w[0] == "addNew") {
    arity(1);
    return MutatorOp::add_new(names.at(w[1], line));
  }
  if (w[0] == "load" || w[0] == "drop") {
    // "load b" is shorthand for the section's own pre-root.
    std::size_t m = mutator;
    std::string target;
    if (w.size() == 2) {
      target = w[1];
    } else {
      arity(2);
      m = parse_number<std::size_t>(w[1], line, "pre-root index");
      target = w[2];
    }
    NodeId b = names.at(target, line);
    return w[0] == "load" ? MutatorOp::load(m, b) : MutatorOp::drop(m, b);
  }
  throw ScenarioParseError(line, "unknown op '" + w[0] + "'");
}

WorkloadParams parse_workload(const std::vector<std::string>& w, std::size_t line) {
  WorkloadParams p;
  for (std::size_t i = 1; i < w.size(); ++i) {
    auto [k, v] = split_kv(w[i], '=', line);
    if (k == "ops") p.op_count = parse_number<std::size_t>(v, line, "op count");
    else if (k == "addArc") p.add_arc = parse_weight(v, line);
    else if (k == "delArc") p.del_arc = parse_weight(v, line);
    else if (k == "addNew") p.add_new = parse_weight(v, line);
    else if (k == "local") p.local = parse_weight(v, line);
    else if (k == "seed") p.seed = parse_number<std::uint64_t>(v, line, "seed");
    else throw ScenarioParseError(line, "unknown workload key '" + k + "'");
  }
  if (p.add_arc + p.del_arc + p.add_new + p.local <= 0)
    throw ScenarioParseError(line, "workload weights are all zero");
  return p;
}

ScheduleSpec parse_schedule(const std::vector<std::string>& w, std::size_t line) {
  ScheduleSpec s;
  if (w.empty()) return s;
  if (w[0] == "scripted") {
    s.kind = ScheduleKind::Scripted;
    s.tokens.assign(w.begin() + 1, w.end());
    for (const auto& t : s.tokens) {
      bool ok = !t.empty() && (t[0] == 'c' || (t[0] == 'm' && t.size() > 1));
      if (!ok) throw ScenarioParseError(line, "bad schedule token '" + t + "'");
    }
    return s;
  }
  if (w[0] == "random") s.kind = ScheduleKind::Random;
  else if (w[0] == "exhaustive") s.kind = ScheduleKind::Exhaustive;
  else throw ScenarioParseError(line, "unknown schedule '" + w[0] + "'");
  for (std::size_t i = 1; i < w.size(); ++i) {
    auto [k, v] = split_kv(w[i], '=', line);
    if (k == "seed") {
      s.seed = parse_number<std::uint64_t>(v, line, "seed");
    } else if (k == "ratio") {
      auto [a, b] = split_kv(v, ':', line);
      s.mutator_weight = parse_number<std::size_t>(a, line, "ratio");
      s.collector_weight = parse_number<std::size_t>(b, line, "ratio");
      if (s.mutator_weight + s.collector_weight == 0) throw ScenarioParseError(line, "ratio 0:0");
    } else if (k == "max_depth") {
      s.max_depth = parse_number<std::size_t>(v, line, "max_depth");
    } else if (k == "max_states") {
      s.max_states = parse_number<std::size_t>(v, line, "max_states");
    } else {
      throw ScenarioParseError(line, "unknown schedule key '" + k + "'");
    }
  }
  return s;
}

template <typename E>
E parse_enum(std::optional<E> (*fn)(const std::string&), const std::string& v, const char* what) {
  if (auto e = fn(v)) return *e;
  throw ScenarioParseError(0, std::string("unknown ") + what + " '" + v + "'");
}

}  // namespace

void apply_collector_setting(Scenario& sc, const std::string& key, const std::string& value) {
  auto& c = sc.collector;
  if (key == "variant") {
    // A variant brings its default barrier; a later barrier line overrides.
    auto v = parse_enum(parse_variant, value, "variant");
    c.variant = v;
    c.barrier = CollectorConfig::for_variant(v).barrier;
  } else if (key == "barrier") {
    c.barrier = parse_enum(parse_barrier, value, "barrier");
  } else if (key == "granularity") {
    c.granularity = parse_enum(parse_granularity, value, "granularity");
  } else if (key == "gray_policy") {
    c.gray_policy = parse_enum(parse_gray_policy, value, "gray policy");
  } else if (key == "cache") {
    c.cache_capacity = parse_number<std::size_t>(value, 0, "cache capacity");
  } else if (key == "cards") {
    c.card_count = parse_number<std::size_t>(value, 0, "card count");
    if (c.card_count == 0) throw ScenarioParseError(0, "cards must be >= 1");
  } else if (key == "root_scan") {
    c.root_scan = parse_enum(parse_root_scan, value, "root scan");
  } else if (key == "blacken_guard") {
    c.blacken_guard = parse_enum(parse_blacken_guard, value, "blacken guard");
  } else if (key == "drain_budget") {
    c.drain_budget = parse_number<std::size_t>(value, 0, "drain budget");
  } else if (key == "drain_period") {
    c.drain_period = parse_number<std::size_t>(value, 0, "drain period");
  } else if (key == "cycles") {
    sc.cycles = parse_number<std::size_t>(value, 0, "cycle count");
  } else if (key == "final_cycle") {
    sc.final_cycle = parse_bool(value, 0);
  } else if (key == "enabled") {
    sc.collector_enabled = parse_bool(value, 0);
  } else {
    throw ScenarioParseError(0, "unknown collector key '" + key + "'");
  }
}

StoreState Scenario::initial_store() const { return StoreState(graph, supply, pre_roots); }

Scenario parse_scenario(std::string_view text, std::string name) {
  std::vector<Section> sections;
  std::istringstream is{std::string(text)};
  std::size_t number = 0;
  for (std::string raw; std::getline(is, raw);) {
    ++number;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ScenarioParseError(number, "unterminated section header");
      sections.push_back({trim(line.substr(1, line.size() - 2)), number, {}});
      continue;
    }
    if (sections.empty()) throw ScenarioParseError(number, "text before the first section");
    sections.back().lines.push_back({number, line});
  }

  Scenario sc;
  sc.name = std::move(name);
  NameTable names;

  // Node ids: graph sources in order, then graph targets, then supply.
  std::vector<std::pair<std::size_t, std::vector<std::string>>> adjacency;
  for (const auto& s : sections)
    if (s.header == "graph")
      for (const auto& l : s.lines) {
        auto colon = l.text.find(':');
        std::string src = trim(l.text.substr(0, colon));
        if (src.empty() || src.find_first_of(" \t") != std::string::npos)
          throw ScenarioParseError(l.number, "expected 'node: targets'");
        names.intern(src);
        adjacency.push_back({l.number, {src}});
        if (colon != std::string::npos)
          for (auto& t : words(l.text.substr(colon + 1))) adjacency.back().second.push_back(t);
      }
  for (const auto& [line, row] : adjacency)
    for (std::size_t i = 1; i < row.size(); ++i) names.intern(row[i]);
  std::vector<std::string> supply_names;
  for (const auto& s : sections)
    if (s.header == "supply")
      for (const auto& l : s.lines)
        for (auto& w : words(l.text)) {
          names.intern(w);
          supply_names.push_back(w);
        }

  sc.graph = HeapGraph(names.names().size(), names.names());
  for (const auto& [line, row] : adjacency) {
    NodeId a = names.at(row[0], line);
    for (std::size_t i = 1; i < row.size(); ++i) sc.graph.append_arc(a, names.at(row[i], line));
  }
  for (const auto& n : supply_names) {
    NodeId id = names.at(n, 0);
    if (std::find(sc.supply.begin(), sc.supply.end(), id) != sc.supply.end())
      throw ScenarioParseError(0, "supply lists '" + n + "' twice");
    if (!sc.graph.slots(id).empty()) throw ScenarioParseError(0, "supply node '" + n + "' has arcs");
    for (NodeId a = 0; a < sc.graph.size(); ++a)
      if (sc.graph.arc_count(a, id)) throw ScenarioParseError(0, "supply node '" + n + "' is an arc target");
    sc.supply.push_back(id);
  }

  sc.pre_roots.push_back({kGlobals, {}});
  auto ensure_pre_root = [&sc](std::size_t m) {
    while (sc.pre_roots.size() <= m) sc.pre_roots.push_back({sc.pre_roots.size(), {}});
    while (sc.mutators.size() < m) sc.mutators.emplace_back();
  };

  bool saw_schedule = false;
  for (const auto& s : sections) {
    auto head = words(s.header);
    if (head.empty()) throw ScenarioParseError(s.number, "empty section header");
    if (head[0] == "graph" || head[0] == "supply") continue;
    if (head[0] == "preroots") {
      for (const auto& l : s.lines) {
        auto [k, v] = split_kv(l.text, ':', l.number);
        std::size_t m = parse_number<std::size_t>(k, l.number, "pre-root index");
        ensure_pre_root(m);
        for (auto& t : words(v)) sc.pre_roots[m].slots.push_back(names.at(t, l.number));
      }
    } else if (head[0] == "mutator") {
      if (head.size() != 2) throw ScenarioParseError(s.number, "expected [mutator <k>]");
      std::size_t m = parse_number<std::size_t>(head[1], s.number, "mutator index");
      if (m == 0) throw ScenarioParseError(s.number, "mutators are numbered from 1");
      ensure_pre_root(m);
      auto& spec = sc.mutators[m - 1];
      for (const auto& l : s.lines) {
        auto w = words(l.text);
        if (w[0] == "workload")
          spec.workload = parse_workload(w, l.number);
        else
          spec.script.push_back(parse_op(w, names, m, l.number));
      }
    } else if (head[0] == "collector") {
      for (const auto& l : s.lines) {
        auto [k, v] = split_kv(l.text, '=', l.number);
        try {
          apply_collector_setting(sc, k, v);
        } catch (const ScenarioParseError& e) {
          throw ScenarioParseError(l.number, e.what());
        }
      }
    } else if (head[0] == "schedule") {
      if (saw_schedule || s.lines.size() > 1) throw ScenarioParseError(s.number, "one schedule line expected");
      saw_schedule = true;
      if (!s.lines.empty()) sc.schedule = parse_schedule(words(s.lines[0].text), s.lines[0].number);
    } else {
      throw ScenarioParseError(s.number, "unknown section [" + s.header + "]");
    }
  }

  for (std::size_t m = 0; m < sc.mutators.size(); ++m)
    for (const auto& op : sc.mutators[m].script)
      if (!op.is_heap_op() && op.pre_root >= sc.pre_roots.size())
        throw ScenarioParseError(0, "mutator " + std::to_string(m + 1) + " uses unknown pre-root " +
                                        std::to_string(op.pre_root));
  for (const auto& pr : sc.pre_roots)
    for (NodeId n : pr.slots)
      if (std::find(sc.supply.begin(), sc.supply.end(), n) != sc.supply.end())
        throw ScenarioParseError(0, "pre-root holds supply node '" + sc.graph.name(n) + "'");
  for (const auto& t : sc.schedule.tokens)
    if (t[0] == 'm') {
      std::size_t m = parse_number<std::size_t>(t.substr(1), 0, "schedule mutator");
      if (m == 0 || m > sc.mutators.size()) throw ScenarioParseError(0, "schedule names unknown mutator " + t);
    } else if (t.size() > 1 && t[1] == ':') {
      names.at(t.substr(2), 0);
    } else if (t.size() > 1) {
      parse_number<std::size_t>(t.substr(1), 0, "collector step count");
    }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError(0, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.stem().string());
}

std::string Scenario::to_text() const {
  std::ostringstream os;
  os << "[graph]\n";
  // Every node is listed as a source so ids survive the round trip.
  for (NodeId a = 0; a < graph.size(); ++a) {
    os << graph.name(a) << ':';
    for (NodeId b : graph.slots(a)) os << ' ' << graph.name(b);
    os << '\n';
  }
  if (!supply.empty()) {
    os << "[supply]\n";
    for (std::size_t i = 0; i < supply.size(); ++i) os << (i ? " " : "") << graph.name(supply[i]);
    os << '\n';
  }
  os << "[preroots]\n";
  for (std::size_t m = 0; m < pre_roots.size(); ++m) {
    os << m << ':';
    for (NodeId b : pre_roots[m].slots) os << ' ' << graph.name(b);
    os << '\n';
  }
  for (std::size_t m = 0; m < mutators.size(); ++m) {
    os << "[mutator " << m + 1 << "]\n";
    if (const auto& w = mutators[m].workload) {
      os << "workload ops=" << w->op_count << " addArc=" << w->add_arc << " delArc=" << w->del_arc
         << " addNew=" << w->add_new << " local=" << w->local << " seed=" << w->seed << '\n';
    }
    for (const auto& op : mutators[m].script) os << op.str(graph) << '\n';
  }
  const auto& c = collector;
  os << "[collector]\n"
     << "variant = " << to_string(c.variant) << '\n'
     << "barrier = " << to_string(c.barrier) << '\n'
     << "granularity = " << to_string(c.granularity) << '\n'
     << "gray_policy = " << to_string(c.gray_policy) << '\n'
     << "cache = " << c.cache_capacity << '\n'
     << "cards = " << c.card_count << '\n'
     << "root_scan = " << to_string(c.root_scan) << '\n'
     << "blacken_guard = " << to_string(c.blacken_guard) << '\n'
     << "drain_budget = " << c.drain_budget << '\n'
     << "drain_period = " << c.drain_period << '\n'
     << "cycles = " << cycles << '\n'
     << "final_cycle = " << (final_cycle ? "true" : "false") << '\n'
     << "enabled = " << (collector_enabled ? "true" : "false") << '\n';
  os << "[schedule]\n";
  switch (schedule.kind) {
    case ScheduleKind::Scripted:
      os << "scripted";
      for (const auto& t : schedule.tokens) os << ' ' << t;
      break;
    case ScheduleKind::Random:
      os << "random seed=" << schedule.seed << " ratio=" << schedule.mutator_weight << ':'
         << schedule.collector_weight;
      break;
    case ScheduleKind::Exhaustive:
      os << "exhaustive max_depth=" << schedule.max_depth << " max_states=" << schedule.max_states;
      break;
  }
  os << '\n';
  return os.str();
}

namespace {

constexpr const char* kDijkstraBug = R"(# A black node gains the only reference to E, then the gray path to E
# is cut. Without a barrier E is swept while still reachable from A.
[graph]
A: B C
B: C D
C: A I D
D: E
E:
F: G
G: H
H:
I: J
J:
[preroots]
0: A
1:
[mutator 1]
addArc A E
delArc D E
[collector]
variant = workset
barrier = none
[schedule]
scripted c:A m1 m1
)";

constexpr const char* kRootRace = R"(# Mutator 1 copies a->b into a register after its roots were scanned;
# mutator 2 then deletes a->b. Only mutator 1 still knows b.
[graph]
a: b
b:
[preroots]
0:
1: a
2: a
[mutator 1]
load 1 b
[mutator 2]
delArc a b
[collector]
variant = workset
barrier = none
root_scan = unprotected
[schedule]
scripted c c m1 m2
)";

constexpr const char* kTwoCycleFloating = R"(# X and Y die after marking reached them: floating garbage of cycle 1,
# recycled by the quiescent cycle 2.
[graph]
R: X
X: Y
Y:
[preroots]
0: R
1: R
[mutator 1]
delArc R X
[collector]
variant = workset
barrier = dijkstra
cycles = 1
final_cycle = true
[schedule]
scripted c:Y m1
)";

constexpr const char* kAllocStall = R"(# The second allocation finds the supply empty; the mutator stalls until
# a collection returns G and H to the supply.
[graph]
R: A
A:
G: H
H: G
[supply]
S
[preroots]
0: R
1: A
[mutator 1]
addNew A
addNew A
addNew R
[collector]
variant = dirtyset
cycles = 0
[schedule]
scripted m1 m1 m1
)";

constexpr const char* kEmpty = R"([graph]
[preroots]
0:
[collector]
variant = workset
)";

const std::vector<std::pair<std::string, const char*>>& builtins() {
  static const std::vector<std::pair<std::string, const char*>> table{
      {"dijkstra_bug", kDijkstraBug},
      {"root_race", kRootRace},
      {"two_cycle_floating", kTwoCycleFloating},
      {"alloc_stall", kAllocStall},
      {"empty", kEmpty},
  };
  return table;
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [n, t] : builtins()) out.push_back(n);
  return out;
}

std::optional<std::string> builtin_text(const std::string& name) {
  for (const auto& [n, t] : builtins())
    if (n == name) return std::string(t);
  return std::nullopt;
}

std::optional<Scenario> builtin_scenario(const std::string& name) {
  if (auto t = builtin_text(name)) return parse_scenario(*t, name);
  return std::nullopt;
}

HeapGraph random_graph(std::size_t nodes, std::size_t max_out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < nodes; ++i) names.push_back("n" + std::to_string(i));
  HeapGraph g(nodes, std::move(names));
  if (nodes == 0) return g;
  for (NodeId a = 0; a < nodes; ++a) {
    std::size_t k = rng() % (max_out + 1);
    for (std::size_t i = 0; i < k; ++i) g.append_arc(a, static_cast<NodeId>(rng() % nodes));
  }
  return g;
}

Scenario random_scenario(const RandomScenarioParams& p, const CollectorConfig& collector) {
  std::mt19937_64 rng(p.seed);
  std::size_t supply = std::min(p.supply, p.nodes);
  std::size_t heap = p.nodes - supply;
  Scenario sc;
  sc.name = "random-" + std::to_string(p.seed);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < p.nodes; ++i) names.push_back("n" + std::to_string(i));
  sc.graph = HeapGraph(p.nodes, std::move(names));
  for (NodeId a = 0; a < heap; ++a) {
    std::size_t k = rng() % (p.max_out + 1);
    for (std::size_t i = 0; i < k; ++i) sc.graph.append_arc(a, static_cast<NodeId>(rng() % heap));
  }
  for (std::size_t i = heap; i < p.nodes; ++i) sc.supply.push_back(static_cast<NodeId>(i));
  PreRoot globals{kGlobals, {}};
  for (std::size_t i = 0; i < p.global_roots && heap > 0; ++i) globals.slots.push_back(static_cast<NodeId>(rng() % heap));
  sc.pre_roots.push_back(globals);
  for (std::size_t m = 1; m <= p.mutators; ++m) {
    PreRoot pr{m, {}};
    if (heap > 0) pr.slots.push_back(static_cast<NodeId>(rng() % heap));
    sc.pre_roots.push_back(pr);
    WorkloadParams w;
    w.op_count = p.ops / std::max<std::size_t>(p.mutators, 1) + (m <= p.ops % std::max<std::size_t>(p.mutators, 1));
    w.local = p.local_weight;
    w.seed = rng();
    sc.mutators.push_back({{}, w});
  }
  sc.collector = collector;
  sc.cycles = p.cycles;
  sc.schedule.kind = ScheduleKind::Random;
  sc.schedule.seed = rng();
  sc.schedule.mutator_weight = p.mutator_weight;
  sc.schedule.collector_weight = p.collector_weight;
  return sc;
}

}  // namespace gclab

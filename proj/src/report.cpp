#include "gclab/report.hpp"

#include <iomanip>
#include <sstream>

namespace gclab {

namespace {

const std::vector<std::pair<InvariantId, const char*>>& names() {
  static const std::vector<std::pair<InvariantId, const char*>> table{
      {InvariantId::Partition, "Partition"},
      {InvariantId::Antitone, "Antitone"},
      {InvariantId::WSAxiom, "WSAxiom"},
      {InvariantId::DirtyAxiom, "DirtyAxiom"},
      {InvariantId::DirtyCardsAxiom, "DirtyCardsAxiom"},
      {InvariantId::SnapshotAxiom, "SnapshotAxiom"},
      {InvariantId::AimSandwich, "AimSandwich"},
      {InvariantId::Safety, "Safety"},
      {InvariantId::Liveness, "Liveness"},
      {InvariantId::Termination, "Termination"},
      {InvariantId::Disjointness, "Disjointness"},
  };
  return table;
}

}  // namespace

const std::vector<InvariantId>& all_invariants() {
  static const std::vector<InvariantId> ids = [] {
    std::vector<InvariantId> v;
    for (const auto& [id, n] : names()) v.push_back(id);
    return v;
  }();
  return ids;
}

std::string to_string(InvariantId id) {
  for (const auto& [i, n] : names())
    if (i == id) return n;
  return "?";
}

std::optional<InvariantId> parse_invariant(const std::string& s) {
  for (const auto& [i, n] : names())
    if (s == n) return i;
  return std::nullopt;
}

std::string to_string(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::Pass: return "pass";
    case Verdict::Status::Fail: return "fail";
    case Verdict::Status::NotApplicable: return "n/a";
  }
  return "?";
}

VerificationReport::VerificationReport() {
  for (InvariantId id : all_invariants()) verdicts[id];
}

bool VerificationReport::passed() const { return failures().empty(); }

std::vector<InvariantId> VerificationReport::failures() const {
  std::vector<InvariantId> out;
  for (const auto& [id, v] : verdicts)
    if (v.failed()) out.push_back(id);
  return out;
}

void VerificationReport::pass(InvariantId id) {
  Verdict& v = verdicts[id];
  ++v.checks;
  if (v.status == Verdict::Status::NotApplicable) v.status = Verdict::Status::Pass;
}

void VerificationReport::fail(InvariantId id, std::string detail, std::vector<std::string> nodes,
                              std::optional<std::size_t> entry) {
  Verdict& v = verdicts[id];
  ++v.checks;
  if (v.failed()) return;
  v.status = Verdict::Status::Fail;
  v.detail = std::move(detail);
  v.nodes = std::move(nodes);
  v.entry = entry;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["config"] = config;
  j["passed"] = passed();
  j["steps"] = steps;
  j["cycles"] = cycles;
  auto& inv = j["invariants"] = nlohmann::json::object();
  for (const auto& [id, v] : verdicts) {
    nlohmann::json e{{"status", to_string(v.status)}, {"checks", v.checks}};
    if (v.failed()) {
      e["detail"] = v.detail;
      e["nodes"] = v.nodes;
      if (v.entry) e["entry"] = *v.entry;
      e["slice"] = v.slice;
    }
    inv[to_string(id)] = std::move(e);
  }
  return j;
}

std::string VerificationReport::summary() const {
  std::ostringstream os;
  os << "scenario " << scenario << "  [" << config << "]  steps=" << steps << " cycles=" << cycles << '\n';
  for (const auto& [id, v] : verdicts) {
    os << "  " << std::left << std::setw(16) << to_string(id) << std::setw(5) << to_string(v.status);
    if (v.failed()) {
      os << ' ' << v.detail;
      if (v.entry) os << " (at entry " << *v.entry << ')';
    }
    os << '\n';
  }
  os << (passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

}  // namespace gclab

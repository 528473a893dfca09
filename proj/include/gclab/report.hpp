#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gclab {

enum class InvariantId {
  Partition,
  Antitone,
  WSAxiom,
  DirtyAxiom,
  DirtyCardsAxiom,
  SnapshotAxiom,
  AimSandwich,
  Safety,
  Liveness,
  Termination,
  Disjointness,
};

const std::vector<InvariantId>& all_invariants();
std::string to_string(InvariantId id);
std::optional<InvariantId> parse_invariant(const std::string& s);

struct Verdict {
  enum class Status { Pass, Fail, NotApplicable };

  Status status = Status::NotApplicable;
  std::string detail;
  /// Offending node names.
  std::vector<std::string> nodes;
  /// Trace entry index of the first failure.
  std::optional<std::size_t> entry;
  /// Trace lines up to and including the failing entry.
  std::vector<std::string> slice;
  std::size_t checks = 0;

  bool failed() const { return status == Status::Fail; }
};

std::string to_string(Verdict::Status s);

struct VerificationReport {
  std::string scenario;
  std::string config;
  std::map<InvariantId, Verdict> verdicts;
  std::size_t steps = 0;
  std::size_t cycles = 0;

  VerificationReport();

  bool passed() const;
  std::vector<InvariantId> failures() const;
  Verdict& at(InvariantId id) { return verdicts[id]; }
  const Verdict& at(InvariantId id) const { return verdicts.at(id); }

  /// Records a passing check unless the invariant already failed.
  void pass(InvariantId id);
  /// Keeps the first failure per invariant.
  void fail(InvariantId id, std::string detail, std::vector<std::string> nodes = {},
            std::optional<std::size_t> entry = std::nullopt);

  nlohmann::json to_json() const;
  std::string summary() const;
};

}  // namespace gclab

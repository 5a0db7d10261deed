#pragma once

// Synthetic evidence generator. A scenario script describes what the device
// owner and the other actors do over time; generate_bundle writes the
// resulting databases, logs, backups, media and avatar files and returns the
// exact results the parsers and the correlator are expected to produce.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wafx/correlator.hpp"
#include "wafx/model.hpp"

namespace wafx {

struct ScenarioActor {
  std::string alias;
  std::string phone;
  std::optional<std::string> name;
  std::optional<std::int64_t> session;  // first session start, epoch seconds
};

struct ScenarioAction {
  EpochMillis at;
  std::string verb;
  std::map<std::string, std::string> args;
  int line = 0;
};

struct ScenarioScript {
  ScenarioActor owner{"me", "", std::nullopt, std::nullopt};
  std::uint64_t seed = 0;
  std::vector<ScenarioActor> actors;
  std::vector<ScenarioAction> timeline;
  std::filesystem::path base_dir;  // resolves relative `file=` arguments
};

/// Throws Error{InvalidScript} naming the offending line.
ScenarioScript parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioScript load_scenario(const std::filesystem::path& path);
std::string format_scenario(const ScenarioScript& script);

/// Random valid script: an owner, 3..6 actors and up to `max_actions` actions.
ScenarioScript random_scenario(std::uint64_t seed, std::size_t max_actions);

// Ground truth, expressed independently of the correlator's own types so a
// comparison checks field values rather than shared code paths.

struct TruthHistoryEntry {
  std::int64_t message_id = 0;
  std::string key;
  Direction direction = Direction::Incoming;
  EpochMillis time;
  bool recovered = false;
  bool operator==(const TruthHistoryEntry&) const = default;
};

struct TruthPartners {
  PartnerKind kind = PartnerKind::Unknown;
  bool authored_by_owner = false;
  std::string originator;  // empty when none
  std::vector<std::string> partners;
  std::vector<std::string> members;
  bool operator==(const TruthPartners&) const = default;
};

struct TruthGroupEvent {
  EpochMillis time;
  GroupEventKind kind = GroupEventKind::Created;
  std::string member;
  bool log_sourced = false;
  bool operator==(const TruthGroupEvent&) const = default;
};

struct TruthGroup {
  std::string group_id;
  std::optional<std::string> name;
  std::vector<TruthGroupEvent> events;
  bool operator==(const TruthGroup&) const = default;
};

struct TruthDeletedMessage {
  std::string key;
  std::optional<EpochMillis> deleted_at;
  std::optional<EpochMillis> exchanged_at;
  std::optional<Direction> direction;
  std::vector<std::string> partners;
  StateCode last_state = StateCode::Unknown;
  bool operator==(const TruthDeletedMessage&) const = default;
};

struct TruthDeletedContact {
  std::string jid;
  std::optional<EpochMillis> added_at;
  bool operator==(const TruthDeletedContact&) const = default;
};

struct TruthAddition {
  std::string jid;
  EpochMillis added_at;
  bool operator==(const TruthAddition&) const = default;
};

struct ScenarioTruth {
  CaseBundle bundle;  // exact expected load_bundle result
  std::map<std::string, std::vector<TruthHistoryEntry>> histories;
  std::map<std::int64_t, TruthPartners> partners;
  std::vector<TruthGroup> groups;                      // by group id
  std::vector<TruthDeletedMessage> deleted_messages;   // by key
  std::vector<TruthDeletedContact> deleted_contacts;   // by jid
  std::vector<TruthAddition> additions;                // by jid
};

/// Writes the evidence tree under `out_dir` (replacing its contents) and
/// returns the expected results. Same script and seed give identical bytes.
ScenarioTruth generate_bundle(const ScenarioScript& script, const std::filesystem::path& out_dir);

/// Runs the correlator over `bundle` and projects its results onto the
/// truth shape (the `bundle` member is copied verbatim).
ScenarioTruth observe(const CaseBundle& bundle);

/// Human-readable differences; empty when equal.
std::vector<std::string> compare_truth(const ScenarioTruth& expected, const ScenarioTruth& observed);
std::vector<std::string> compare_bundles(const CaseBundle& expected, const CaseBundle& observed);

}  // namespace wafx

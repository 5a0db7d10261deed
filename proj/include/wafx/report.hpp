#pragma once

// Serialisation of an analysis into the canonical JSON report and the CSV
// timeline. Output is a pure function of its inputs: keys are sorted, arrays
// keep the correlator's order, and no wall-clock time is embedded.

#include <string>

#include <json.hpp>

#include "wafx/correlator.hpp"
#include "wafx/epoch.hpp"
#include "wafx/model.hpp"

namespace wafx {

inline constexpr std::string_view kToolVersion = "1.0.0";

struct ReportOptions {
  UtcOffset tz;  // rendering only; stored values stay UTC
};

/// {"epoch_ms": n, "utc": "...Z", "local": "... +hh:mm"} or null.
nlohmann::json time_value(const std::optional<EpochMillis>& t, UtcOffset tz);

nlohmann::json bundle_summary(const CaseBundle& bundle, UtcOffset tz);
nlohmann::json history_entry_json(const HistoryEntry& e, UtcOffset tz);
nlohmann::json content_json(const MessageContent& c);

nlohmann::json build_report(const CaseBundle& bundle, const Analysis& analysis, const ReportOptions& options = {});
/// Conversations and group timelines only.
nlohmann::json build_timeline(const Analysis& analysis, const ReportOptions& options = {});

/// Two-space indented JSON with a trailing newline.
std::string render_json(const nlohmann::json& doc);

/// One row per history entry and group event, ordered by time.
std::string timeline_csv(const Analysis& analysis, const ReportOptions& options = {});
std::string csv_field(const std::string& v);

}  // namespace wafx

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "wafx/model.hpp"

namespace wafx {

using UtcTime = std::chrono::sys_time<std::chrono::milliseconds>;

enum class EpochUnit { Seconds, Millis };

/// -1 (and any other negative value) decodes to absent.
std::optional<UtcTime> decode_epoch(std::int64_t value, EpochUnit unit);

/// A fixed UTC offset used only when rendering.
struct UtcOffset {
  int minutes = 0;
  static UtcOffset parse(std::string_view text);  // "+01:00", "-0530", "Z", "UTC"
  std::string to_string() const;                  // "+01:00"
  bool operator==(const UtcOffset&) const = default;
};

/// "2013-10-16 14:15:37.884+00:00"
std::string render_time(UtcTime t, UtcOffset offset = {});
std::string render_time(EpochMillis t, UtcOffset offset = {});

/// ISO-8601 in UTC with millisecond precision: "2013-10-16T14:15:37.884Z".
std::string iso_utc(EpochMillis t);

/// Parses "YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+hh:mm]"; a missing zone means
/// `assumed` offset. Returns nullopt on malformed text.
std::optional<EpochMillis> parse_datetime(std::string_view text, UtcOffset assumed = {});

/// "YYYY-MM-DD" of the UTC day containing `t`.
std::string utc_date(EpochMillis t);

}  // namespace wafx

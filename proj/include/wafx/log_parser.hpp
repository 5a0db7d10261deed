#pragma once

#include <filesystem>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wafx/epoch.hpp"
#include "wafx/model.hpp"

namespace wafx {

struct LogRule {
  std::string name;
  LogEventKind kind = LogEventKind::Other;
  std::string pattern_text;
  std::regex pattern;
  // Capture-group indices; 0 means "not captured".
  int jid_group = 0;
  int key_group = 0;
  int group_group = 0;
  int text_group = 0;
};

/// Line syntax plus ordered classification rules. Lines are split into a
/// timestamp and a body by `line_pattern`; the first rule whose pattern is
/// found in the body decides the event kind, and unmatched lines are Other.
struct LogGrammar {
  int version = 1;
  std::string line_pattern_text;
  std::regex line_pattern;
  int timestamp_group = 1;
  int body_group = 2;
  UtcOffset clock_offset;  // zone of the timestamps written in the log
  std::vector<LogRule> rules;

  static const LogGrammar& default_grammar();
  /// Throws Error{InvalidGrammar}.
  static LogGrammar from_json(std::string_view json_text);
  static LogGrammar from_file(const std::filesystem::path& path);
  std::string to_json() const;
};

/// The grammar file shipped as the default, in the documented format.
std::string_view default_grammar_json();

std::vector<LogEvent> parse_log_text(std::string_view text, const std::string& source_file,
                                     const LogGrammar& grammar, std::vector<Warning>& warnings);

/// One event per line of the file. Throws Error{UnreadableFile}.
std::vector<LogEvent> parse_log_file(const std::filesystem::path& path, const LogGrammar& grammar,
                                     std::vector<Warning>& warnings, const std::string& source_name = {});

/// Merges per-file streams by occurred_at, then (source_file, line_number).
/// Lines without a timestamp go last, in file order.
std::vector<LogEvent> merge_log_events(std::vector<std::vector<LogEvent>> streams);

struct BlockEntry {
  WaJid jid;
  EpochMillis at;
  std::size_t order = 0;  // position in the event stream
  std::string source_file;
  std::int64_t line_number = 0;
};

struct UnblockEntry {
  EpochMillis at;
  std::size_t order = 0;
  std::string source_file;
  std::int64_t line_number = 0;
};

struct BlockEvents {
  std::vector<BlockEntry> blocks;
  std::vector<UnblockEntry> unblocks;  // anonymous: no jid is ever attached
};

BlockEvents classify_block_events(std::span<const LogEvent> events);

}  // namespace wafx

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wafx {

enum class ErrorCode {
  MalformedJid,
  MalformedGroupId,
  MalformedKey,
  NotSqlite,
  MissingTable,
  MissingColumn,
  SqliteFailure,
  BadBlockLength,
  MagicMismatch,
  BadKey,
  UnreadableFile,
  InvalidGrammar,
  InvalidScript,
  NoEvidence,
};

std::string_view to_string(ErrorCode code);

// Every failure the library reports carries one of the codes above so that
// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wafx

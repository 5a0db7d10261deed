#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wafx/model.hpp"

struct sqlite3;
struct sqlite3_stmt;

namespace wafx {

/// Move-only owner of a sqlite3 connection.
class SqliteDb {
 public:
  /// Opens an evidence file without ever writing to it (immutable URI mode,
  /// so no journal, lock or -shm file is created either).
  static SqliteDb open_evidence(const std::filesystem::path& path);
  /// Loads an in-memory image (e.g. a decrypted backup) as a read-only DB.
  static SqliteDb open_image(std::span<const std::uint8_t> image);
  /// Creates a fresh writable database, replacing any existing file.
  static SqliteDb create(const std::filesystem::path& path);

  SqliteDb(SqliteDb&& other) noexcept;
  SqliteDb& operator=(SqliteDb&& other) noexcept;
  SqliteDb(const SqliteDb&) = delete;
  SqliteDb& operator=(const SqliteDb&) = delete;
  ~SqliteDb();

  void exec(const std::string& sql);
  std::vector<std::string> table_names() const;
  std::vector<std::string> column_names(const std::string& table) const;
  sqlite3* handle() const { return db_; }

 private:
  explicit SqliteDb(sqlite3* db) : db_(db) {}
  sqlite3* db_ = nullptr;
};

using SqlValue = std::variant<std::monostate, std::int64_t, double, std::string, Bytes>;

/// Move-only prepared statement.
class SqliteStatement {
 public:
  SqliteStatement(const SqliteDb& db, const std::string& sql);
  SqliteStatement(SqliteStatement&& other) noexcept;
  SqliteStatement(const SqliteStatement&) = delete;
  SqliteStatement& operator=(const SqliteStatement&) = delete;
  SqliteStatement& operator=(SqliteStatement&&) = delete;
  ~SqliteStatement();

  /// Advances to the next row; false when done.
  bool step();
  void reset();

  void bind(int index, const SqlValue& value);

  int column_count() const;
  std::string column_name(int index) const;
  SqlValue column(int index) const;

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

inline constexpr std::string_view kSqliteMagic{"SQLite format 3\0", 16};

bool has_sqlite_magic(std::span<const std::uint8_t> bytes);

}  // namespace wafx

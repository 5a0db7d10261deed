#include "wafx/sqlite_db.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include "wafx/error.hpp"

namespace wafx {
namespace {

std::string uri_escape(const std::string& path) {
  std::string out;
  for (unsigned char c : path) {
    if (std::isalnum(c) || c == '/' || c == '.' || c == '-' || c == '_' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

[[noreturn]] void fail(sqlite3* db, const std::string& context) {
  throw Error(ErrorCode::SqliteFailure, context + ": " + (db ? sqlite3_errmsg(db) : "out of memory"));
}

}  // namespace

bool has_sqlite_magic(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= kSqliteMagic.size() &&
         std::memcmp(bytes.data(), kSqliteMagic.data(), kSqliteMagic.size()) == 0;
}

SqliteDb SqliteDb::open_evidence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, path.string());
  std::uint8_t header[16] = {};
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (in.gcount() != sizeof header || !has_sqlite_magic(header))
    throw Error(ErrorCode::NotSqlite, path.string() + " lacks the SQLite header");

  const std::string uri = "file:" + uri_escape(std::filesystem::absolute(path).string()) + "?immutable=1";
  sqlite3* db = nullptr;
  if (sqlite3_open_v2(uri.c_str(), &db, SQLITE_OPEN_READONLY | SQLITE_OPEN_URI, nullptr) != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "open failed";
    sqlite3_close(db);
    throw Error(ErrorCode::SqliteFailure, path.string() + ": " + msg);
  }
  SqliteDb out(db);
  out.table_names();  // surfaces "file is not a database" early
  return out;
}

SqliteDb SqliteDb::open_image(std::span<const std::uint8_t> image) {
  if (!has_sqlite_magic(image)) throw Error(ErrorCode::NotSqlite, "image lacks the SQLite header");
  sqlite3* db = nullptr;
  if (sqlite3_open_v2(":memory:", &db, SQLITE_OPEN_READWRITE, nullptr) != SQLITE_OK) {
    sqlite3_close(db);
    throw Error(ErrorCode::SqliteFailure, "cannot open in-memory database");
  }
  SqliteDb out(db);
  auto* buf = static_cast<unsigned char*>(sqlite3_malloc64(image.size()));
  if (!buf) fail(db, "deserialize");
  std::memcpy(buf, image.data(), image.size());
  const int rc = sqlite3_deserialize(db, "main", buf, static_cast<sqlite3_int64>(image.size()),
                                     static_cast<sqlite3_int64>(image.size()),
                                     SQLITE_DESERIALIZE_FREEONCLOSE | SQLITE_DESERIALIZE_READONLY);
  if (rc != SQLITE_OK) fail(db, "deserialize");
  out.table_names();
  return out;
}

SqliteDb SqliteDb::create(const std::filesystem::path& path) {
  std::filesystem::remove(path);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  sqlite3* db = nullptr;
  if (sqlite3_open_v2(path.string().c_str(), &db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "open failed";
    sqlite3_close(db);
    throw Error(ErrorCode::SqliteFailure, path.string() + ": " + msg);
  }
  return SqliteDb(db);
}

SqliteDb::SqliteDb(SqliteDb&& other) noexcept : db_(std::exchange(other.db_, nullptr)) {}

SqliteDb& SqliteDb::operator=(SqliteDb&& other) noexcept {
  if (this != &other) {
    sqlite3_close(db_);
    db_ = std::exchange(other.db_, nullptr);
  }
  return *this;
}

SqliteDb::~SqliteDb() { sqlite3_close(db_); }

void SqliteDb::exec(const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "exec failed";
    sqlite3_free(err);
    throw Error(ErrorCode::SqliteFailure, msg);
  }
}

std::vector<std::string> SqliteDb::table_names() const {
  SqliteStatement st(*this, "SELECT name FROM sqlite_master WHERE type='table' ORDER BY name");
  std::vector<std::string> names;
  while (st.step()) names.push_back(std::get<std::string>(st.column(0)));
  return names;
}

std::vector<std::string> SqliteDb::column_names(const std::string& table) const {
  SqliteStatement st(*this, "SELECT * FROM \"" + table + "\" LIMIT 0");
  std::vector<std::string> names;
  for (int i = 0; i < st.column_count(); ++i) names.push_back(st.column_name(i));
  return names;
}

SqliteStatement::SqliteStatement(const SqliteDb& db, const std::string& sql) : db_(db.handle()) {
  if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
    const std::string msg = sqlite3_errmsg(db_);
    if (msg.find("not a database") != std::string::npos) throw Error(ErrorCode::NotSqlite, msg);
    throw Error(ErrorCode::SqliteFailure, msg + " in: " + sql);
  }
}

SqliteStatement::SqliteStatement(SqliteStatement&& other) noexcept
    : db_(other.db_), stmt_(std::exchange(other.stmt_, nullptr)) {}

SqliteStatement::~SqliteStatement() { sqlite3_finalize(stmt_); }

bool SqliteStatement::step() {
  const int rc = sqlite3_step(stmt_);
  if (rc == SQLITE_ROW) return true;
  if (rc == SQLITE_DONE) return false;
  fail(db_, "step");
}

void SqliteStatement::reset() {
  sqlite3_reset(stmt_);
  sqlite3_clear_bindings(stmt_);
}

void SqliteStatement::bind(int index, const SqlValue& value) {
  int rc = SQLITE_OK;
  if (std::holds_alternative<std::monostate>(value)) {
    rc = sqlite3_bind_null(stmt_, index);
  } else if (auto* i = std::get_if<std::int64_t>(&value)) {
    rc = sqlite3_bind_int64(stmt_, index, *i);
  } else if (auto* d = std::get_if<double>(&value)) {
    rc = sqlite3_bind_double(stmt_, index, *d);
  } else if (auto* s = std::get_if<std::string>(&value)) {
    rc = sqlite3_bind_text(stmt_, index, s->data(), static_cast<int>(s->size()), SQLITE_TRANSIENT);
  } else {
    const auto& b = std::get<Bytes>(value);
    rc = sqlite3_bind_blob(stmt_, index, b.data(), static_cast<int>(b.size()), SQLITE_TRANSIENT);
  }
  if (rc != SQLITE_OK) fail(db_, "bind");
}

int SqliteStatement::column_count() const { return sqlite3_column_count(stmt_); }

std::string SqliteStatement::column_name(int index) const { return sqlite3_column_name(stmt_, index); }

SqlValue SqliteStatement::column(int index) const {
  switch (sqlite3_column_type(stmt_, index)) {
    case SQLITE_INTEGER:
      return static_cast<std::int64_t>(sqlite3_column_int64(stmt_, index));
    case SQLITE_FLOAT:
      return sqlite3_column_double(stmt_, index);
    case SQLITE_TEXT: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, index));
      return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, index)));
    }
    case SQLITE_BLOB: {
      const auto* p = static_cast<const std::uint8_t*>(sqlite3_column_blob(stmt_, index));
      return Bytes(p, p + sqlite3_column_bytes(stmt_, index));
    }
    default:
      return std::monostate{};
  }
}

}  // namespace wafx

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wafx/model.hpp"
#include "wafx/sqlite_db.hpp"

namespace wafx {

enum class DbKind { Contacts, ChatStore };

/// An opened evidence database whose required tables have been verified.
/// Contacts needs `wa_contacts`; ChatStore needs `messages` and `chat_list`.
class DbSource {
 public:
  /// Throws Error{NotSqlite | MissingTable | UnreadableFile}.
  static DbSource open(const std::filesystem::path& path, DbKind kind);
  /// Same checks over an in-memory image; `label` names it in warnings.
  static DbSource from_image(std::string label, std::span<const std::uint8_t> image, DbKind kind);

  const std::string& path() const { return path_; }
  DbKind db_kind() const { return kind_; }
  const std::vector<std::string>& table_names_found() const { return tables_; }
  const SqliteDb& db() const { return db_; }

 private:
  DbSource(std::string path, DbKind kind, SqliteDb db);
  std::string path_;
  DbKind kind_;
  SqliteDb db_;
  std::vector<std::string> tables_;
};

// Loaders read columns by name, in ascending _id order. Type mismatches keep
// the row, leave the field absent and append a warning.
std::vector<ContactRecord> load_contacts(const DbSource& source, std::vector<Warning>& warnings);
std::vector<MessageRecord> load_messages(const DbSource& source, std::vector<Warning>& warnings);
std::vector<ChatListRecord> load_chat_list(const DbSource& source, std::vector<Warning>& warnings);

/// Flags chat_list rows whose message_table_id names no loaded message.
void check_chat_list_consistency(const std::vector<ChatListRecord>& chat_list,
                                 const std::vector<MessageRecord>& messages, const std::string& source,
                                 std::vector<Warning>& warnings);

/// Column sets written by the forge and expected by the loaders.
extern const std::vector<std::string> kPhonebookColumns;

}  // namespace wafx

#include "wafx/db_reader.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "wafx/codec.hpp"
#include "wafx/error.hpp"
#include "wafx/identifiers.hpp"

namespace wafx {

const std::vector<std::string> kPhonebookColumns = {"number",     "display_name", "given_name",
                                                    "family_name", "phone_type",   "phone_label",
                                                    "raw_contact_id", "sort_name"};

DbSource::DbSource(std::string path, DbKind kind, SqliteDb db)
    : path_(std::move(path)), kind_(kind), db_(std::move(db)), tables_(db_.table_names()) {
  std::vector<std::string> required;
  if (kind_ == DbKind::Contacts) {
    required = {"wa_contacts"};
  } else {
    required = {"messages", "chat_list"};
  }
  for (const auto& t : required)
    if (std::find(tables_.begin(), tables_.end(), t) == tables_.end())
      throw Error(ErrorCode::MissingTable, path_ + " has no table '" + t + "'");
}

DbSource DbSource::open(const std::filesystem::path& path, DbKind kind) {
  return DbSource(path.string(), kind, SqliteDb::open_evidence(path));
}

DbSource DbSource::from_image(std::string label, std::span<const std::uint8_t> image, DbKind kind) {
  return DbSource(std::move(label), kind, SqliteDb::open_image(image));
}

namespace {

// Column access by name over the current row of a `SELECT *`.
class RowReader {
 public:
  RowReader(SqliteStatement& st, std::string table_source, std::vector<Warning>& warnings)
      : st_(st), source_(std::move(table_source)), warnings_(warnings) {
    for (int i = 0; i < st_.column_count(); ++i) index_[st_.column_name(i)] = i;
  }

  void require(std::initializer_list<const char*> columns) const {
    for (const char* c : columns)
      if (!index_.count(c)) throw Error(ErrorCode::MissingColumn, source_ + " lacks column '" + c + "'");
  }

  void set_row(std::int64_t id) { row_ = source_ + "#_id=" + std::to_string(id); }
  const std::string& row() const { return row_; }

  void warn(const std::string& message) { warnings_.push_back({row_, message}); }

  std::optional<std::int64_t> integer(const char* name) {
    auto v = value(name);
    if (std::holds_alternative<std::monostate>(v)) return std::nullopt;
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
    mismatch(name, "integer");
    return std::nullopt;
  }

  std::optional<std::string> text(const char* name) {
    auto v = value(name);
    if (std::holds_alternative<std::monostate>(v)) return std::nullopt;
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* d = std::get_if<double>(&v)) return std::to_string(*d);
    mismatch(name, "text");
    return std::nullopt;
  }

  std::optional<double> real(const char* name) {
    auto v = value(name);
    if (std::holds_alternative<std::monostate>(v)) return std::nullopt;
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    mismatch(name, "real");
    return std::nullopt;
  }

  std::optional<Bytes> blob(const char* name) {
    auto v = value(name);
    if (std::holds_alternative<std::monostate>(v)) return std::nullopt;
    if (auto* b = std::get_if<Bytes>(&v)) return *b;
    if (auto* s = std::get_if<std::string>(&v)) return Bytes(s->begin(), s->end());
    mismatch(name, "blob");
    return std::nullopt;
  }

  // -1 and NULL are the absent sentinel; other negatives are warned about.
  std::optional<EpochMillis> millis(const char* name) {
    auto v = integer(name);
    if (!v || *v == -1) return std::nullopt;
    if (*v < 0) {
      warn(std::string("negative timestamp in ") + name);
      return std::nullopt;
    }
    return EpochMillis{*v};
  }

  std::optional<EpochSeconds> secs(const char* name) {
    auto v = millis(name);
    if (!v) return std::nullopt;
    return EpochSeconds{v->value};
  }

  WaJid jid(const char* name) {
    auto t = text(name);
    if (!t) {
      warn(std::string("missing jid in ") + name);
      return WaJid::unparsed("");
    }
    try {
      return parse_jid(*t);
    } catch (const Error& e) {
      warn(e.what());
      return WaJid::unparsed(*t);
    }
  }

 private:
  SqlValue value(const char* name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::monostate{};
    return st_.column(it->second);
  }

  void mismatch(const char* column, const char* expected) {
    warn(std::string("ColumnTypeMismatch: ") + column + " is not " + expected);
  }

  SqliteStatement& st_;
  std::string source_;
  std::vector<Warning>& warnings_;
  std::map<std::string, int> index_;
  std::string row_;
};

std::string table_source(const DbSource& source, const char* table) {
  return std::filesystem::path(source.path()).filename().string() + ":" + table;
}

void expect_kind(const DbSource& source, DbKind kind) {
  if (source.db_kind() != kind)
    throw Error(ErrorCode::MissingTable, source.path() + " opened as the wrong database kind");
}

}  // namespace

std::vector<ContactRecord> load_contacts(const DbSource& source, std::vector<Warning>& warnings) {
  expect_kind(source, DbKind::Contacts);
  SqliteStatement st(source.db(), "SELECT * FROM wa_contacts ORDER BY _id");
  RowReader row(st, table_source(source, "wa_contacts"), warnings);
  row.require({"_id", "jid"});
  std::vector<ContactRecord> out;
  while (st.step()) {
    ContactRecord c;
    c.id = row.integer("_id").value_or(0);
    row.set_row(c.id);
    c.jid = row.jid("jid");
    c.is_whatsapp_user = row.integer("is_whatsapp_user").value_or(0) != 0;
    c.unseen_msg_count = row.integer("unseen_msg_count").value_or(0);
    c.photo_ts = row.integer("photo_ts");
    c.thumb_ts = row.secs("thumb_ts");
    c.photo_id_timestamp = row.millis("photo_id_timestamp");
    c.wa_name = row.text("wa_name");
    c.status_line = row.text("status");
    for (const auto& col : kPhonebookColumns) c.phonebook[col] = row.text(col.c_str());
    if (c.thumb_ts && c.photo_id_timestamp && c.thumb_ts->value != 0 && c.photo_id_timestamp->value != 0 &&
        c.thumb_ts->value > c.photo_id_timestamp->value / 1000)
      row.warn("avatar set (thumb_ts) after it was downloaded (photo_id_timestamp)");
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<MessageRecord> load_messages(const DbSource& source, std::vector<Warning>& warnings) {
  expect_kind(source, DbKind::ChatStore);
  SqliteStatement st(source.db(), "SELECT * FROM messages ORDER BY _id");
  RowReader row(st, table_source(source, "messages"), warnings);
  row.require({"_id", "key_remote_jid", "key_from_me", "key_id", "status", "timestamp"});
  std::vector<MessageRecord> out;
  while (st.step()) {
    MessageRecord m;
    m.id = row.integer("_id").value_or(0);
    row.set_row(m.id);
    m.key_remote_jid = row.jid("key_remote_jid");
    const auto key_text = row.text("key_id").value_or("");
    try {
      m.key_id = parse_message_key(key_text);
    } catch (const Error& e) {
      row.warn(e.what());
      m.key_id = MessageKey{key_text, 0, 0, false};
    }
    m.from_me = row.integer("key_from_me").value_or(0) != 0;
    m.status_code = row.integer("status").value_or(0);
    if (auto ts = row.millis("timestamp")) {
      m.timestamp = *ts;
    } else {
      row.warn("message has no timestamp");
    }
    m.received_timestamp = row.millis("received_timestamp");
    m.receipt_server_timestamp = row.millis("receipt_server_timestamp");
    m.receipt_device_timestamp = row.millis("receipt_device_timestamp");
    m.send_timestamp = row.integer("send_timestamp");
    m.needs_push = row.integer("needs_push").value_or(0);
    m.recipient_count = row.integer("recipient_count");
    m.remote_resource = row.text("remote_resource");
    m.media_wa_type = row.integer("media_wa_type").value_or(0);
    m.data = row.text("data");
    m.raw_data = row.blob("raw_data");
    m.media_hash = row.text("media_hash");
    m.media_url = row.text("media_url");
    m.media_mime_type = row.text("media_mime_type");
    m.media_size = row.integer("media_size");
    m.media_name = row.text("media_name");
    m.media_duration = row.integer("media_duration");
    m.latitude = row.real("latitude");
    m.longitude = row.real("longitude");
    m.thumb_image = row.blob("thumb_image");

    if (m.media_wa_type < 0 || m.media_wa_type > 5)
      row.warn("media_wa_type " + std::to_string(m.media_wa_type) + " outside 0..5");
    if (m.media_hash && !m.media_hash->empty()) {
      auto raw = base64_decode(*m.media_hash);
      if (!raw || raw->size() != 32) row.warn("media_hash is not a base64 SHA-256 digest");
    }
    if (m.media_wa_type == 5) {
      if (!m.latitude || !m.longitude)
        row.warn("geolocation message without coordinates");
      else if (std::abs(*m.latitude) > 90 || std::abs(*m.longitude) > 180)
        row.warn("geolocation coordinates out of range");
    }
    if (!m.from_me && !m.received_timestamp && m.status_code != 6)
      row.warn("incoming message without received_timestamp");
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ChatListRecord> load_chat_list(const DbSource& source, std::vector<Warning>& warnings) {
  expect_kind(source, DbKind::ChatStore);
  SqliteStatement st(source.db(), "SELECT * FROM chat_list ORDER BY _id");
  RowReader row(st, table_source(source, "chat_list"), warnings);
  row.require({"_id", "key_remote_jid", "message_table_id"});
  std::vector<ChatListRecord> out;
  while (st.step()) {
    ChatListRecord c;
    c.id = row.integer("_id").value_or(0);
    row.set_row(c.id);
    c.key_remote_jid = row.jid("key_remote_jid");
    c.message_table_id = row.integer("message_table_id").value_or(0);
    out.push_back(std::move(c));
  }
  return out;
}

void check_chat_list_consistency(const std::vector<ChatListRecord>& chat_list,
                                 const std::vector<MessageRecord>& messages, const std::string& source,
                                 std::vector<Warning>& warnings) {
  std::set<std::int64_t> ids;
  for (const auto& m : messages) ids.insert(m.id);
  for (const auto& c : chat_list)
    if (!ids.count(c.message_table_id))
      warnings.push_back({source + ":chat_list#_id=" + std::to_string(c.id),
                          "message_table_id " + std::to_string(c.message_table_id) + " references no message"});
}

}  // namespace wafx

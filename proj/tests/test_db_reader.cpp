#include <doctest.h>

#include "support.hpp"
#include "wafx/codec.hpp"
#include "wafx/db_reader.hpp"
#include "wafx/error.hpp"

using namespace wafx;
using wafx::test::TempDir;

namespace {

const char* const kMessages =
    "CREATE TABLE messages (_id INTEGER PRIMARY KEY AUTOINCREMENT, key_remote_jid TEXT NOT NULL, "
    "key_from_me INTEGER, key_id TEXT NOT NULL, status INTEGER, needs_push INTEGER, data TEXT, timestamp INTEGER, "
    "media_url TEXT, media_mime_type TEXT, media_wa_type INTEGER, media_size INTEGER, media_name TEXT, "
    "media_hash TEXT, media_duration INTEGER, latitude REAL, longitude REAL, thumb_image TEXT, "
    "remote_resource TEXT, received_timestamp INTEGER, send_timestamp INTEGER, receipt_server_timestamp INTEGER, "
    "receipt_device_timestamp INTEGER, raw_data BLOB, recipient_count INTEGER);"
    "CREATE TABLE chat_list (_id INTEGER PRIMARY KEY AUTOINCREMENT, key_remote_jid TEXT UNIQUE, "
    "message_table_id INTEGER);";

const char* const kCols =
    "INSERT INTO messages (_id, key_remote_jid, key_from_me, key_id, status, needs_push, data, timestamp, "
    "media_wa_type, media_hash, received_timestamp, send_timestamp, receipt_server_timestamp, "
    "receipt_device_timestamp, latitude, longitude) VALUES ";

std::filesystem::path make_db(const TempDir& d, const std::string& sql) {
  const auto p = d / "msgstore.db";
  auto db = SqliteDb::create(p);
  db.exec(sql);
  return p;
}

bool has_warning(const std::vector<Warning>& ws, const std::string& needle) {
  for (const auto& w : ws)
    if (w.message.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("messages decode -1 as absent and keep send_timestamp verbatim") {
  TempDir d;
  const auto p = make_db(d, std::string(kMessages) + kCols +
                                "(1,'39348xxxxxxx@s.whatsapp.net',0,'1329116000-1',0,0,'Message 1',1329116349000,"
                                "0,NULL,1329116349000,-1,-1,-1,NULL,NULL),"
                                "(2,'39348xxxxxxx@s.whatsapp.net',1,'1329116100-1',5,0,'Reply 1',1329116423000,"
                                "0,NULL,-1,-1,1329116424000,1329116425000,NULL,NULL);"
                                "INSERT INTO chat_list VALUES (1,'39348xxxxxxx@s.whatsapp.net',2);");
  std::vector<Warning> w;
  const auto src = DbSource::open(p, DbKind::ChatStore);
  const auto msgs = load_messages(src, w);
  const auto chats = load_chat_list(src, w);
  check_chat_list_consistency(chats, msgs, "msgstore.db", w);
  CHECK(w.empty());
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].received_timestamp->value == 1329116349000);
  CHECK_FALSE(msgs[0].receipt_server_timestamp);
  CHECK(msgs[0].send_timestamp == -1);
  CHECK_FALSE(msgs[1].received_timestamp);
  CHECK(msgs[1].receipt_device_timestamp->value == 1329116425000);
  CHECK(msgs[1].key_id.session_start == 1329116100);
  CHECK(chats[0].message_table_id == 2);
}

TEST_CASE("row-level problems keep the row and warn") {
  TempDir d;
  const auto p = make_db(d, std::string(kMessages) + kCols +
                                "(1,'39348@s.whatsapp.net',0,'100-1',0,0,NULL,1000,1,'not-a-hash',2000,-1,-1,-1,"
                                "NULL,NULL),"
                                "(2,'39348@s.whatsapp.net',0,'100-2',0,0,'x',2000,0,NULL,-1,-1,-1,-1,NULL,NULL),"
                                "(3,'39348@s.whatsapp.net',1,'100-3',0,0,'x','noon',0,NULL,-1,-1,-1,-1,NULL,NULL),"
                                "(4,'39348@s.whatsapp.net',1,'100-4',0,0,NULL,4000,5,NULL,-1,-1,-1,-1,NULL,NULL);"
                                "INSERT INTO chat_list VALUES (1,'39348@s.whatsapp.net',99);");
  std::vector<Warning> w;
  const auto src = DbSource::open(p, DbKind::ChatStore);
  const auto msgs = load_messages(src, w);
  const auto chats = load_chat_list(src, w);
  check_chat_list_consistency(chats, msgs, "msgstore.db", w);
  CHECK(msgs.size() == 4);
  CHECK(has_warning(w, "media_hash is not a base64 SHA-256 digest"));
  CHECK(has_warning(w, "incoming message without received_timestamp"));
  CHECK(has_warning(w, "ColumnTypeMismatch: timestamp"));
  CHECK(has_warning(w, "geolocation message without coordinates"));
  CHECK(has_warning(w, "99"));
}

TEST_CASE("structural errors") {
  TempDir d;
  write_file(d / "junk.db", as_bytes("this is not a database at all, not even close to one"));
  CHECK_THROWS_WITH_AS(DbSource::open(d / "junk.db", DbKind::ChatStore), doctest::Contains("NotSqlite"), Error);

  const auto p = make_db(d, "CREATE TABLE chat_list (_id INTEGER PRIMARY KEY, key_remote_jid TEXT, "
                            "message_table_id INTEGER);");
  CHECK_THROWS_WITH_AS(DbSource::open(p, DbKind::ChatStore), doctest::Contains("MissingTable"), Error);
  CHECK_THROWS_WITH_AS(DbSource::open(p, DbKind::Contacts), doctest::Contains("MissingTable"), Error);

  TempDir d2;
  const auto q = make_db(d2, "CREATE TABLE messages (_id INTEGER PRIMARY KEY, key_remote_jid TEXT);"
                             "CREATE TABLE chat_list (_id INTEGER PRIMARY KEY, key_remote_jid TEXT, "
                             "message_table_id INTEGER);");
  std::vector<Warning> w;
  const auto src = DbSource::open(q, DbKind::ChatStore);
  CHECK_THROWS_WITH_AS(load_messages(src, w), doctest::Contains("MissingColumn"), Error);
}

TEST_CASE("contacts round-trip through a forged wa.db") {
  auto c = wafx::test::forge_scenario("deleted_contact");
  // The contact was deleted again, so the table is empty but present.
  CHECK(c->bundle.has_contacts_db);
  CHECK(c->bundle.contacts.empty());

  auto s = parse_scenario(
      "wafx-scenario 1\nowner 39348000000\nactor C 39331000000 name=\"Ann Example\"\nactor N 39331000001\n"
      "2013-09-25 14:14:24 add-contact contact=C\n2013-09-25 14:20:00 add-contact contact=N user=0\n");
  auto f = wafx::test::forge_script(s);
  REQUIRE(f->bundle.contacts.size() == 2);
  CHECK(f->bundle.contacts == f->truth.bundle.contacts);
  CHECK(f->bundle.warnings.empty());
  const auto& ann = f->bundle.contacts[0];
  CHECK(ann.jid.raw == "39331000000@s.whatsapp.net");
  CHECK(ann.is_whatsapp_user);
  CHECK(ann.photo_ts == 0);
  CHECK_FALSE(f->bundle.contacts[1].is_whatsapp_user);
}

TEST_CASE("evidence files are opened without side files") {
  auto c = wafx::test::forge_scenario("chat_history");
  const auto dir = c->dir / "data/data/com.whatsapp/databases";
  std::set<std::string> before, after;
  for (const auto& e : std::filesystem::directory_iterator(dir)) before.insert(e.path().filename().string());
  load_bundle(c->dir.path());
  for (const auto& e : std::filesystem::directory_iterator(dir)) after.insert(e.path().filename().string());
  CHECK(before == after);
}

#include <doctest.h>

#include "wafx/error.hpp"
#include "wafx/log_parser.hpp"

using namespace wafx;

namespace {

std::vector<LogEvent> parse(const std::string& text, const LogGrammar& g = LogGrammar::default_grammar()) {
  std::vector<Warning> w;
  return parse_log_text(text, "whatsapp.log", g, w);
}

}  // namespace

TEST_CASE("default grammar classifies every event kind") {
  const std::string text =
      "2013-09-25 14:14:24.000 LL_I contactsync/not-in-db jid=39331xxxxxxx@s.whatsapp.net\n"
      "2013-09-25 14:14:25.000 LL_I xmpp/query/status jid=39331xxxxxxx@s.whatsapp.net\n"
      "2013-09-25 14:14:26.000 LL_I profilephoto/download/done jid=39331xxxxxxx@s.whatsapp.net\n"
      "2013-09-26 10:00:00.000 LL_I blocklist/block jid=39320xxxxxxx@s.whatsapp.net\n"
      "2013-09-26 11:00:00.000 LL_I blocklist/unblock\n"
      "2013-03-14 09:37:44.000 LL_I xmpp/send/message key=1363253484-1 jid=39348xxxxxxx@s.whatsapp.net\n"
      "2013-03-14 09:38:00.000 LL_I xmpp/recv/message key=%~1363200000-3 jid=39348xxxxxxx@s.whatsapp.net\n"
      "2013-10-16 14:17:05.551 LL_I xmpp/ack/server key=1381932000-1 jid=39348xxxxxxx@s.whatsapp.net\n"
      "2013-10-16 14:21:59.135 LL_I xmpp/ack/device key=1381932000-1 jid=39348xxxxxxx@s.whatsapp.net\n"
      "2013-03-14 10:49:22.000 LL_I msgstore/delete key=1363253484-1\n"
      "2013-11-11 16:24:05.000 LL_I groups/create gid=39320xxxxxxx-1384187045@g.us subject=\"wa test group\"\n"
      "2013-11-11 16:24:06.000 LL_I groups/add/request gid=39320xxxxxxx-1384187045@g.us "
      "jids=39335xxxxxxx@s.whatsapp.net\n"
      "2013-11-11 16:24:06.000 LL_I groups/participant/add gid=39320xxxxxxx-1384187045@g.us "
      "jid=39335xxxxxxx@s.whatsapp.net\n"
      "2013-11-14 22:11:36.000 LL_I groups/participant/remove gid=39320xxxxxxx-1384187045@g.us "
      "jid=39333xxxxxxx@s.whatsapp.net\n"
      "2013-11-14 22:11:37.000 LL_D unrelated chatter\n"
      "garbage without a timestamp\n";
  const auto ev = parse(text);
  REQUIRE(ev.size() == 16);
  const std::vector<LogEventKind> kinds = {
      LogEventKind::ContactNotInDb,  LogEventKind::ContactQuery,      LogEventKind::AvatarDownloaded,
      LogEventKind::ContactBlocked,  LogEventKind::ContactUnblocked,  LogEventKind::MessageSent,
      LogEventKind::MessageReceived, LogEventKind::ServerAck,         LogEventKind::DeviceAck,
      LogEventKind::MessageDeleted,  LogEventKind::GroupCreated,      LogEventKind::GroupAddRequested,
      LogEventKind::GroupMemberAdded, LogEventKind::GroupMemberLeft,  LogEventKind::Other,
      LogEventKind::Other};
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    CAPTURE(i);
    CHECK(ev[i].kind == kinds[i]);
    CHECK(ev[i].line_number == static_cast<std::int64_t>(i + 1));
    CHECK(ev[i].source_file == "whatsapp.log");
  }
  CHECK(ev[0].occurred_at->value == 1380118464000);
  CHECK(ev[0].subject_jid->raw == "39331xxxxxxx@s.whatsapp.net");
  CHECK_FALSE(ev[4].subject_jid);
  CHECK(ev[6].message_key->broadcast_received);
  CHECK(ev[7].occurred_at->value == 1381933025551);
  CHECK(ev[9].message_key->raw == "1363253484-1");
  CHECK(ev[9].occurred_at->value == 1363258162000);
  CHECK(ev[10].detail == "wa test group");
  CHECK(ev[10].group_id->creation_time.value == 1384187045);
  CHECK(ev[11].detail == "39335xxxxxxx@s.whatsapp.net");
  CHECK(ev[13].subject_jid->raw == "39333xxxxxxx@s.whatsapp.net");
  CHECK_FALSE(ev[15].occurred_at);
  CHECK(ev[15].raw_line == "garbage without a timestamp");
}

TEST_CASE("a trailing newline adds no event; CRLF is tolerated") {
  CHECK(parse("2013-01-01 00:00:00.000 LL_I blocklist/unblock\n").size() == 1);
  const auto ev = parse("2013-01-01 00:00:00.000 LL_I blocklist/unblock\r\n");
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == LogEventKind::ContactUnblocked);
}

TEST_CASE("a malformed identifier keeps the line as an event and warns") {
  std::vector<Warning> w;
  const auto ev = parse_log_text("2013-01-01 00:00:00.000 LL_I msgstore/delete key=notakey\n", "x.log",
                                 LogGrammar::default_grammar(), w);
  REQUIRE(ev.size() == 1);
  CHECK_FALSE(ev[0].message_key);
  CHECK_FALSE(w.empty());
}

TEST_CASE("merging streams by time, absent times last") {
  std::vector<Warning> w;
  const auto& g = LogGrammar::default_grammar();
  auto a = parse_log_text("2013-01-01 00:00:02.000 LL_I a\nno time here\n", "a.log", g, w);
  auto b = parse_log_text("2013-01-01 00:00:01.000 LL_I b\n2013-01-01 00:00:02.000 LL_I c\n", "b.log", g, w);
  const auto m = merge_log_events({a, b});
  REQUIRE(m.size() == 4);
  CHECK(m[0].raw_line.find(" b") != std::string::npos);
  CHECK(m[1].source_file == "a.log");
  CHECK(m[2].source_file == "b.log");
  CHECK(m[3].raw_line == "no time here");
}

TEST_CASE("grammar files") {
  const auto& d = LogGrammar::default_grammar();
  const auto again = LogGrammar::from_json(d.to_json());
  CHECK(again.rules.size() == d.rules.size());
  CHECK(again.to_json() == d.to_json());
  CHECK(LogGrammar::from_json(std::string(default_grammar_json())).rules.size() == d.rules.size());

  CHECK_THROWS_WITH_AS(LogGrammar::from_json("{"), doctest::Contains("InvalidGrammar"), Error);
  CHECK_THROWS_WITH_AS(LogGrammar::from_json(R"g({"format":"wafx-log-grammar","version":1,"line_pattern":"(",
      "rules":[]})g"),
                       doctest::Contains("InvalidGrammar"), Error);
  CHECK_THROWS_WITH_AS(LogGrammar::from_json(R"g({"format":"wafx-log-grammar","version":1,"line_pattern":"^(\\S+) (.*)$",
      "rules":[{"name":"x","kind":"NoSuchKind","pattern":"x","captures":{}}]})g"),
                       doctest::Contains("InvalidGrammar"), Error);
}

TEST_CASE("a custom grammar with a device clock offset") {
  const auto g = LogGrammar::from_json(R"g({
    "format": "wafx-log-grammar", "version": 1,
    "line_pattern": "^\\[(\\d{4}-\\d{2}-\\d{2} \\d{2}:\\d{2}:\\d{2})\\] (.*)$",
    "timestamp_group": 1, "body_group": 2, "clock_offset": "+01:00",
    "rules": [{"name": "blk", "kind": "ContactBlocked", "pattern": "BLOCK (\\S+)", "captures": {"jid": 1}}]
  })g");
  const auto ev = parse("[2013-09-26 11:00:00] BLOCK 39320@s.whatsapp.net\n", g);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == LogEventKind::ContactBlocked);
  CHECK(ev[0].occurred_at->value == 1380189600000);  // 10:00:00 UTC
}

TEST_CASE("block events carry no jid on unblock") {
  const auto ev = parse(
      "2013-05-01 10:00:00.000 LL_I blocklist/block jid=39320@s.whatsapp.net\n"
      "2013-05-01 11:00:00.000 LL_I blocklist/unblock\n");
  const auto be = classify_block_events(ev);
  REQUIRE(be.blocks.size() == 1);
  REQUIRE(be.unblocks.size() == 1);
  CHECK(be.blocks[0].order < be.unblocks[0].order);
  CHECK(be.unblocks[0].line_number == 2);
}

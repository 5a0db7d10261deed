#include <doctest.h>

#include "wafx/error.hpp"
#include "wafx/identifiers.hpp"

using namespace wafx;

namespace {

ErrorCode code_of(void (*f)()) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::NoEvidence;
}

}  // namespace

TEST_CASE("user, group and broadcast jids") {
  auto u = parse_jid("39348xxxxxxx@s.whatsapp.net");
  CHECK(u.kind == JidKind::User);
  CHECK(u.phone_number == "39348xxxxxxx");

  auto g = parse_jid("3933xxxxxxx-1363078943@g.us");
  CHECK(g.kind == JidKind::Group);

  auto b = parse_jid("broadcast");
  CHECK(b.kind == JidKind::Broadcast);
  CHECK(b.phone_number.empty());
  CHECK(reassemble(b) == "broadcast");
}

TEST_CASE("malformed jids are rejected") {
  CHECK(code_of([] { parse_jid(""); }) == ErrorCode::MalformedJid);
  CHECK(code_of([] { parse_jid("39348@example.org"); }) == ErrorCode::MalformedJid);
  CHECK(code_of([] { parse_jid("@s.whatsapp.net"); }) == ErrorCode::MalformedJid);
  CHECK(code_of([] { parse_jid("39a48@s.whatsapp.net"); }) == ErrorCode::MalformedJid);
}

TEST_CASE("group id carries creator and creation time") {
  auto g = parse_group_id("3933xxxxxxx-1363078943@g.us");
  CHECK(g.creator.raw == "3933xxxxxxx@s.whatsapp.net");
  // 2013-03-12 09:02:23 UTC
  CHECK(g.creation_time.value == 1363078943);
  CHECK(reassemble(g) == "3933xxxxxxx-1363078943@g.us");
  CHECK(code_of([] { parse_group_id("3933-@g.us"); }) == ErrorCode::MalformedGroupId);
  CHECK(code_of([] { parse_group_id("3933-12@s.whatsapp.net"); }) == ErrorCode::MalformedGroupId);
  CHECK(code_of([] { parse_group_id("1363078943@g.us"); }) == ErrorCode::MalformedGroupId);
}

TEST_CASE("message keys, including received broadcasts") {
  auto k = parse_message_key("1363253484-1");
  CHECK(k.session_start == 1363253484);
  CHECK(k.sequence == 1);
  CHECK_FALSE(k.broadcast_received);

  auto b = parse_message_key("%~1382280000-7");
  CHECK(b.broadcast_received);
  CHECK(b.raw == "%~1382280000-7");
  CHECK(b.session_start == 1382280000);
  CHECK(reassemble(b) == "%~1382280000-7");

  CHECK(code_of([] { parse_message_key("1363253484"); }) == ErrorCode::MalformedKey);
  CHECK(code_of([] { parse_message_key("-1"); }) == ErrorCode::MalformedKey);
  CHECK(code_of([] { parse_message_key("%1-2"); }) == ErrorCode::MalformedKey);
}

TEST_CASE("phone numbers") {
  CHECK(is_phone_number("393481234567"));
  CHECK(is_phone_number("39348xxxxxxx"));
  CHECK_FALSE(is_phone_number(""));
  CHECK_FALSE(is_phone_number("+39348"));
  CHECK(user_jid("39331").raw == "39331@s.whatsapp.net");
}

#include "wafx/identifiers.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "wafx/error.hpp"

namespace wafx {
namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<std::int64_t> to_int(std::string_view s) {
  if (!all_digits(s)) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

bool is_phone_number(std::string_view text) {
  return !text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= '0' && c <= '9') || c == 'x' || c == 'X';
  });
}

WaJid user_jid(std::string_view phone_number) {
  return WaJid{std::string(phone_number) + std::string(kUserSuffix), std::string(phone_number),
               JidKind::User};
}

WaJid parse_jid(std::string_view raw) {
  if (raw.empty()) throw Error(ErrorCode::MalformedJid, "empty jid");
  if (raw == kBroadcastJid) return WaJid{std::string(raw), {}, JidKind::Broadcast};
  if (ends_with(raw, kUserSuffix)) {
    auto phone = raw.substr(0, raw.size() - kUserSuffix.size());
    if (!is_phone_number(phone)) throw Error(ErrorCode::MalformedJid, "bad user jid '" + std::string(raw) + "'");
    return WaJid{std::string(raw), std::string(phone), JidKind::User};
  }
  if (ends_with(raw, kGroupSuffix)) {
    try {
      GroupId g = parse_group_id(raw);
      return WaJid{g.raw, g.creator.phone_number, JidKind::Group};
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedJid, e.what());
    }
  }
  throw Error(ErrorCode::MalformedJid, "unrecognised jid '" + std::string(raw) + "'");
}

GroupId parse_group_id(std::string_view raw) {
  const std::string text(raw);
  if (!ends_with(raw, kGroupSuffix)) throw Error(ErrorCode::MalformedGroupId, "missing @g.us in '" + text + "'");
  auto body = raw.substr(0, raw.size() - kGroupSuffix.size());
  auto dash = body.rfind('-');
  if (dash == std::string_view::npos) throw Error(ErrorCode::MalformedGroupId, "no creation time in '" + text + "'");
  auto creator = body.substr(0, dash);
  auto epoch = to_int(body.substr(dash + 1));
  if (!is_phone_number(creator)) throw Error(ErrorCode::MalformedGroupId, "bad creator in '" + text + "'");
  if (!epoch) throw Error(ErrorCode::MalformedGroupId, "non-numeric creation time in '" + text + "'");
  return GroupId{user_jid(creator), EpochSeconds{*epoch}, text};
}

MessageKey parse_message_key(std::string_view raw) {
  const std::string text(raw);
  if (raw.empty()) throw Error(ErrorCode::MalformedKey, "empty key");
  bool broadcast = false;
  if (raw.substr(0, kBroadcastKeyPrefix.size()) == kBroadcastKeyPrefix) {
    broadcast = true;
    raw.remove_prefix(kBroadcastKeyPrefix.size());
  }
  auto dash = raw.find('-');
  if (dash == std::string_view::npos) throw Error(ErrorCode::MalformedKey, "no sequence in '" + text + "'");
  auto session = to_int(raw.substr(0, dash));
  auto sequence = to_int(raw.substr(dash + 1));
  if (!session || !sequence) throw Error(ErrorCode::MalformedKey, "non-numeric key '" + text + "'");
  return MessageKey{text, *session, *sequence, broadcast};
}

std::string reassemble(const WaJid& jid) {
  switch (jid.kind) {
    case JidKind::User:
      return jid.phone_number + std::string(kUserSuffix);
    case JidKind::Broadcast:
      return std::string(kBroadcastJid);
    case JidKind::Group:
    case JidKind::Other:
      break;
  }
  return jid.raw;
}

std::string reassemble(const GroupId& group) {
  return group.creator.phone_number + "-" + std::to_string(group.creation_time.value) + std::string(kGroupSuffix);
}

std::string reassemble(const MessageKey& key) {
  return (key.broadcast_received ? std::string(kBroadcastKeyPrefix) : std::string()) +
         std::to_string(key.session_start) + "-" + std::to_string(key.sequence);
}

std::string_view to_string(JidKind kind) {
  switch (kind) {
    case JidKind::User: return "user";
    case JidKind::Group: return "group";
    case JidKind::Broadcast: return "broadcast";
    case JidKind::Other: return "other";
  }
  return "other";
}

namespace {
constexpr std::pair<LogEventKind, std::string_view> kKindNames[] = {
    {LogEventKind::ContactNotInDb, "ContactNotInDb"},
    {LogEventKind::ContactQuery, "ContactQuery"},
    {LogEventKind::AvatarDownloaded, "AvatarDownloaded"},
    {LogEventKind::ContactBlocked, "ContactBlocked"},
    {LogEventKind::ContactUnblocked, "ContactUnblocked"},
    {LogEventKind::MessageSent, "MessageSent"},
    {LogEventKind::MessageReceived, "MessageReceived"},
    {LogEventKind::ServerAck, "ServerAck"},
    {LogEventKind::DeviceAck, "DeviceAck"},
    {LogEventKind::MessageDeleted, "MessageDeleted"},
    {LogEventKind::GroupCreated, "GroupCreated"},
    {LogEventKind::GroupAddRequested, "GroupAddRequested"},
    {LogEventKind::GroupMemberAdded, "GroupMemberAdded"},
    {LogEventKind::GroupMemberLeft, "GroupMemberLeft"},
    {LogEventKind::Other, "Other"},
};
}  // namespace

std::string_view to_string(LogEventKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "Other";
}

std::optional<LogEventKind> log_event_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  return std::nullopt;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedJid: return "MalformedJid";
    case ErrorCode::MalformedGroupId: return "MalformedGroupId";
    case ErrorCode::MalformedKey: return "MalformedKey";
    case ErrorCode::NotSqlite: return "NotSqlite";
    case ErrorCode::MissingTable: return "MissingTable";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::SqliteFailure: return "SqliteFailure";
    case ErrorCode::BadBlockLength: return "BadBlockLength";
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::BadKey: return "BadKey";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::InvalidGrammar: return "InvalidGrammar";
    case ErrorCode::InvalidScript: return "InvalidScript";
    case ErrorCode::NoEvidence: return "NoEvidence";
  }
  return "Unknown";
}

}  // namespace wafx

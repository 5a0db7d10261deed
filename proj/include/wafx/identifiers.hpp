#pragma once

#include <string>
#include <string_view>

#include "wafx/model.hpp"

namespace wafx {

inline constexpr std::string_view kUserSuffix = "@s.whatsapp.net";
inline constexpr std::string_view kGroupSuffix = "@g.us";
inline constexpr std::string_view kBroadcastJid = "broadcast";
inline constexpr std::string_view kBroadcastKeyPrefix = "%~";

/// Parses a user, group or broadcast jid. Throws Error{MalformedJid}.
WaJid parse_jid(std::string_view raw);

/// Parses `<creator>-<epoch>@g.us`. Throws Error{MalformedGroupId}.
GroupId parse_group_id(std::string_view raw);

/// Parses `[%~]<session_start>-<sequence>`. Throws Error{MalformedKey}.
MessageKey parse_message_key(std::string_view raw);

WaJid user_jid(std::string_view phone_number);

std::string reassemble(const WaJid& jid);
std::string reassemble(const GroupId& group);
std::string reassemble(const MessageKey& key);

// Phone numbers are digits; the redaction character 'x' used in published
// examples is accepted so redacted evidence still parses.
bool is_phone_number(std::string_view text);

}  // namespace wafx

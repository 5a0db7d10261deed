#pragma once

// Domain types shared by every stage of the toolkit: identifiers, decoded
// database rows, classified log events and the per-device evidence bundle.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wafx {

using Bytes = std::vector<std::uint8_t>;

/// Milliseconds since the Unix epoch, UTC. Values are stored as read;
/// absence is modelled with std::optional rather than the on-disk -1.
struct EpochMillis {
  std::int64_t value = 0;
  auto operator<=>(const EpochMillis&) const = default;
};

/// Seconds since the Unix epoch, UTC.
struct EpochSeconds {
  std::int64_t value = 0;
  auto operator<=>(const EpochSeconds&) const = default;
  EpochMillis to_millis() const { return EpochMillis{value * 1000}; }
};

enum class JidKind {
  User,
  Group,
  Broadcast,
  Other,  // retained verbatim when the text matched no known shape
};

struct WaJid {
  std::string raw;
  std::string phone_number;  // empty for Broadcast and Other
  JidKind kind = JidKind::Other;

  bool operator==(const WaJid& o) const { return raw == o.raw; }
  auto operator<=>(const WaJid& o) const { return raw <=> o.raw; }

  /// A jid that failed to parse; keeps the text so nothing is dropped.
  static WaJid unparsed(std::string raw) { return WaJid{std::move(raw), {}, JidKind::Other}; }
};

struct GroupId {
  WaJid creator;
  EpochSeconds creation_time;
  std::string raw;
  bool operator==(const GroupId&) const = default;
};

struct MessageKey {
  std::string raw;
  std::int64_t session_start = 0;
  std::int64_t sequence = 0;
  bool broadcast_received = false;
  bool operator==(const MessageKey&) const = default;
};

struct ContactRecord {
  std::int64_t id = 0;
  WaJid jid;
  bool is_whatsapp_user = false;
  std::int64_t unseen_msg_count = 0;
  std::optional<EpochSeconds> thumb_ts;
  std::optional<EpochMillis> photo_id_timestamp;
  std::optional<std::string> wa_name;
  std::optional<std::string> status_line;
  // Phonebook-sourced columns, kept as text and never interpreted.
  std::map<std::string, std::optional<std::string>> phonebook;
  std::optional<std::int64_t> photo_ts;

  bool operator==(const ContactRecord&) const = default;
};

struct MessageRecord {
  std::int64_t id = 0;
  WaJid key_remote_jid;
  MessageKey key_id;
  bool from_me = false;
  std::int64_t status_code = 0;
  EpochMillis timestamp;
  std::optional<EpochMillis> received_timestamp;
  std::optional<EpochMillis> receipt_server_timestamp;
  std::optional<EpochMillis> receipt_device_timestamp;
  std::optional<std::int64_t> send_timestamp;  // verbatim
  std::int64_t needs_push = 0;
  std::optional<std::int64_t> recipient_count;
  // Sender jid for group messages; comma-separated destination list on
  // sender-side broadcast records.
  std::optional<std::string> remote_resource;
  std::int64_t media_wa_type = 0;
  std::optional<std::string> data;
  std::optional<Bytes> raw_data;
  std::optional<std::string> media_hash;
  std::optional<std::string> media_url;
  std::optional<std::string> media_mime_type;
  std::optional<std::int64_t> media_size;
  std::optional<std::string> media_name;
  std::optional<std::int64_t> media_duration;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::optional<Bytes> thumb_image;  // retained, never examined

  bool operator==(const MessageRecord&) const = default;
};

struct ChatListRecord {
  std::int64_t id = 0;
  WaJid key_remote_jid;
  std::int64_t message_table_id = 0;
  bool operator==(const ChatListRecord&) const = default;
};

enum class LogEventKind {
  ContactNotInDb,
  ContactQuery,
  AvatarDownloaded,
  ContactBlocked,
  ContactUnblocked,
  MessageSent,
  MessageReceived,
  ServerAck,
  DeviceAck,
  MessageDeleted,
  GroupCreated,
  GroupAddRequested,
  GroupMemberAdded,
  GroupMemberLeft,
  Other,
};

struct LogEvent {
  std::optional<EpochMillis> occurred_at;
  LogEventKind kind = LogEventKind::Other;
  std::optional<WaJid> subject_jid;
  std::optional<MessageKey> message_key;
  std::optional<GroupId> group_id;
  std::optional<std::string> detail;  // free-text capture (group subject, jid list)
  std::string raw_line;
  std::string source_file;
  std::int64_t line_number = 0;

  bool operator==(const LogEvent&) const = default;
};

struct MediaFile {
  std::string path;  // relative to the evidence root
  std::uint64_t size = 0;
  std::string sha256_hex;
  bool operator==(const MediaFile&) const = default;
};

struct AvatarFile {
  WaJid jid;
  std::string path;
  bool operator==(const AvatarFile& o) const { return jid.raw == o.jid.raw && path == o.path; }
};

struct BackupSet {
  std::string path;
  std::vector<MessageRecord> messages;
  std::vector<ChatListRecord> chat_list;
  bool operator==(const BackupSet&) const = default;
};

struct Warning {
  std::string source;
  std::string message;
  bool operator==(const Warning&) const = default;
};

struct CaseBundle {
  bool has_contacts_db = false;
  bool has_chat_db = false;
  std::vector<ContactRecord> contacts;
  std::vector<MessageRecord> messages;
  std::vector<ChatListRecord> chat_list;
  std::vector<LogEvent> log_events;
  std::vector<std::string> log_files;
  std::optional<std::string> registered_number;
  bool own_avatar_present = false;
  std::vector<MediaFile> media_inventory;
  std::vector<AvatarFile> avatar_inventory;
  std::vector<BackupSet> backups;
  std::vector<Warning> warnings;
};

std::string_view to_string(JidKind kind);
std::string_view to_string(LogEventKind kind);
std::optional<LogEventKind> log_event_kind_from_string(std::string_view name);

}  // namespace wafx

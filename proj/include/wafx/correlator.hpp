#pragma once

// Correlation procedures over a parsed CaseBundle: chat history, delivery
// state, content typing, media matching, broadcast/group partner resolution,
// group membership timelines, and the log-based inferences about contacts,
// blocks and deleted messages.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wafx/log_parser.hpp"
#include "wafx/model.hpp"

namespace wafx {

/// Pointer back to the artifact a result was derived from: a table row
/// ("msgstore.db:messages", _id) or a log line ("…/whatsapp.log", line).
struct Evidence {
  std::string source;
  std::int64_t ref = 0;
  auto operator<=>(const Evidence&) const = default;
};

enum class Direction { Incoming, Outgoing };

/// Receipt time for incoming records (falling back to `timestamp`), send
/// time for outgoing ones.
EpochMillis effective_time(const MessageRecord& m);
Direction direction(const MessageRecord& m);
std::optional<WaJid> owner_jid(const CaseBundle& bundle);

// ---------------------------------------------------------------- state

enum class StateCode { ReceivedIncoming, PendingLocal, OnServer, DeliveredToDevice, Control, Unknown };

struct MessageState {
  StateCode code = StateCode::Unknown;
  std::int64_t raw_status = 0;
  std::optional<EpochMillis> sent_at;
  std::optional<EpochMillis> server_ack_at;
  std::optional<EpochMillis> device_ack_at;
  std::optional<EpochMillis> received_at;
  std::vector<std::string> issues;  // inconsistencies between status and timestamps
};

MessageState message_state(const MessageRecord& record);
/// "OnServer", "UnknownStatus(7)", ...
std::string state_label(StateCode code, std::int64_t raw_status = 0);

// -------------------------------------------------------------- content

enum class MediaKind { Image, Audio, Video };

struct TextContent {
  std::string text;
};
struct MediaContent {
  MediaKind kind = MediaKind::Image;
  std::string mime;
  std::optional<std::string> name;
  std::optional<std::int64_t> size;
  std::optional<std::int64_t> duration;  // audio and video only
  std::optional<std::string> hash;
  std::string server_filename;
  std::optional<std::string> url;
  bool has_thumbnail = false;
};
struct ContactCardContent {
  std::string vcard;
  std::optional<std::string> display_name;
};
struct GeoContent {
  double latitude = 0;
  double longitude = 0;
  bool has_map_thumbnail = false;
};
using MessageContent = std::variant<TextContent, MediaContent, ContactCardContent, GeoContent>;

struct ExtractedContent {
  MessageContent content;
  std::vector<std::string> issues;  // ContentInconsistent details
};

ExtractedContent extract_content(const MessageRecord& record);
/// Trailing path component of a media URL: the name the server gave the file.
std::string server_filename(std::string_view url);

// -------------------------------------------------------------- history

struct HistoryEntry {
  std::int64_t message_id = 0;
  MessageKey key;
  Direction direction = Direction::Incoming;
  EpochMillis effective_time;
  MessageState state;
  MessageContent content;
  std::optional<WaJid> author;  // group sender (remote_resource)
  bool control = false;
  bool recovered_from_backup = false;
  std::string source;
};

using ConversationMap = std::map<std::string, std::vector<HistoryEntry>>;  // by key_remote_jid

/// Live messages plus backup-only records, grouped by partner and ordered by
/// (effective time, _id).
ConversationMap reconstruct_history(const CaseBundle& bundle);

/// Identity of a messages row: (key_remote_jid, key_from_me, key_id).
struct MessageIdentity {
  std::string remote_jid;
  bool from_me = false;
  std::string key;
  auto operator<=>(const MessageIdentity&) const = default;
};
MessageIdentity identity_of(const MessageRecord& m);

/// Records present in `backup` whose identity is absent from `live`.
std::vector<MessageRecord> backup_diff(std::span<const MessageRecord> live, std::span<const MessageRecord> backup);

/// File-name order with digit runs compared as numbers ("x.2" < "x.10").
bool natural_less(std::string_view a, std::string_view b);

/// Backup-only records across every backup of the bundle; the newest backup
/// (last in file-name order) supplies the version of a record seen twice.
std::vector<std::pair<MessageRecord, std::string>> recovered_from_backups(const CaseBundle& bundle);

// ---------------------------------------------------------------- media

enum class MediaMatch { Full, HashOnly, NameOnly, FileIdentified };

struct MediaCorrelation {
  MediaMatch match = MediaMatch::Full;
  std::optional<std::int64_t> sender_message_id;
  std::optional<std::int64_t> recipient_message_id;
  std::optional<std::string> file_path;
  std::string server_filename;
  std::string media_hash;
};

/// Pairs sender and recipient media records. Full needs the same server file
/// name and the same hash, with a recipient file whose SHA-256 is that hash;
/// NameOnly and HashOnly have one of the two. Recipient files matching any
/// record's hash are also reported as FileIdentified.
std::vector<MediaCorrelation> correlate_media(std::span<const MessageRecord> sender_records,
                                              std::span<const MessageRecord> recipient_records,
                                              std::span<const MediaFile> recipient_media);

// --------------------------------------------------------------- groups

enum class GroupEventKind { Created, Joined, Left };

struct GroupEvent {
  EpochMillis time;
  GroupEventKind kind = GroupEventKind::Created;
  std::optional<WaJid> member;
  bool log_sourced = false;
  Evidence evidence;
};

struct GroupTimeline {
  GroupId group_id;
  std::optional<std::string> group_name;
  std::vector<GroupEvent> events;  // chronological

  /// Members (jid text) after replaying every event at or before `t`.
  std::set<std::string> members_at(EpochMillis t) const;
};

struct GroupTimelines {
  std::vector<GroupTimeline> groups;  // ordered by group id text
  std::vector<Warning> warnings;
};

GroupTimelines group_membership_timeline(const CaseBundle& bundle);

// ------------------------------------------------------------- partners

enum class PartnerKind { Direct, BroadcastSent, BroadcastReceived, Group, GroupControl, Unknown };

struct PartnerSet {
  PartnerKind kind = PartnerKind::Unknown;
  bool authored_by_owner = false;
  std::optional<WaJid> originator;
  std::vector<WaJid> partners;         // the other parties, sorted
  std::vector<WaJid> members_at_time;  // group messages only
};

struct BroadcastGroup {
  MessageKey key;
  std::vector<std::int64_t> record_ids;
  std::optional<std::int64_t> self_record_id;
  std::vector<WaJid> destinations;
  std::optional<std::int64_t> recipient_count;
  bool needs_push_marked = true;  // every record carries needs_push = 2
  bool count_mismatch = false;
};

struct PartnerResolution {
  std::map<std::int64_t, PartnerSet> by_message;
  std::vector<BroadcastGroup> broadcasts;
  std::vector<Warning> warnings;
};

PartnerResolution resolve_partners(const CaseBundle& bundle);
PartnerResolution resolve_partners(const CaseBundle& bundle, const GroupTimelines& timelines);

// ------------------------------------------------------------- contacts

struct LogCoverage {
  std::optional<EpochMillis> first;
  std::optional<EpochMillis> last;
  std::vector<std::string> files;
};
LogCoverage log_coverage(const CaseBundle& bundle);

struct ContactAddition {
  WaJid jid;
  EpochMillis added_at;
  Evidence evidence;
};

/// Earliest addition evidence (not-in-db, profile queries, avatar download) per jid.
std::vector<ContactAddition> contact_addition_times(const CaseBundle& bundle);

struct DeletedContact {
  WaJid jid;
  std::optional<EpochMillis> added_at;
  bool log_evidence = false;
  std::vector<std::string> avatar_files;
  std::vector<Evidence> evidence;
};

struct DeletedContactReport {
  bool inference_possible = false;  // false when no log events survive
  LogCoverage coverage;
  std::vector<DeletedContact> contacts;  // ordered by jid
};

DeletedContactReport infer_deleted_contacts(const CaseBundle& bundle);

// ------------------------------------------------------------- messages

struct DeletedMessage {
  MessageKey key;
  std::optional<EpochMillis> deleted_at;
  std::optional<EpochMillis> exchanged_at;
  std::optional<Direction> direction;
  std::vector<WaJid> partners;  // sorted
  StateCode last_state = StateCode::Unknown;
  std::int64_t last_raw_status = 0;
  bool from_log_delete = false;
  bool from_log_exchange = false;
  bool from_backup = false;
  std::optional<MessageRecord> recovered;  // full record when a backup holds it
  std::vector<Evidence> evidence;
};

std::vector<DeletedMessage> infer_deleted_messages(const CaseBundle& bundle);

// --------------------------------------------------------------- blocks

enum class BlockState { Blocked, Unblocked, Unknown };

struct BlockStatus {
  WaJid jid;
  BlockState state = BlockState::Blocked;
  EpochMillis blocked_at;                    // most recent block
  std::optional<EpochMillis> unblocked_at;   // state == Unblocked
  std::optional<EpochMillis> ambiguous_at;   // unblock that made it Unknown
  std::vector<Evidence> evidence;
};

/// Blocked while no unblock follows its last block; Unblocked when the first
/// later unblock found it the only contact that could still be blocked;
/// Unknown otherwise. Ordered by jid.
std::vector<BlockStatus> infer_block_status(const BlockEvents& events);
std::vector<BlockStatus> infer_block_status(const CaseBundle& bundle);
std::string_view to_string(BlockState state);

// ------------------------------------------------------------- identity

enum class IdentityStatus { Match, Mismatch, Unverified, Unavailable };

struct IdentityCheck {
  IdentityStatus status = IdentityStatus::Unavailable;
  std::optional<std::string> registered_number;
  std::optional<std::string> sim_number;
};

IdentityCheck identity_check(const CaseBundle& bundle, const std::optional<std::string>& sim_number);

// ------------------------------------------------------------- findings

enum class FindingCategory {
  Conversation,
  DeletedContact,
  DeletedMessage,
  BlockStatus,
  GroupMembership,
  MediaCorrelation,
  IdentityCheck,
  ContactAdded,
};

struct Finding {
  FindingCategory category = FindingCategory::Conversation;
  std::string subject;
  std::optional<EpochMillis> time;
  nlohmann::json payload;
  std::string confidence_note;
  std::vector<Evidence> evidence;
};

struct AnalysisOptions {
  std::optional<std::string> sim_number;
  const CaseBundle* peer = nullptr;  // other device, for sender/recipient media matching
};

struct Analysis {
  ConversationMap conversations;
  GroupTimelines timelines;
  PartnerResolution partners;
  std::vector<Finding> findings;  // ordered by (category, subject, time)
  std::vector<Warning> warnings;
};

Analysis analyze(const CaseBundle& bundle, const AnalysisOptions& options = {});

std::string_view to_string(FindingCategory c);
std::string_view to_string(StateCode c);
std::string_view to_string(PartnerKind k);
std::string_view to_string(GroupEventKind k);
std::string_view to_string(MediaMatch m);
std::string_view to_string(MediaKind k);
std::string_view to_string(Direction d);
std::string_view to_string(IdentityStatus s);

}  // namespace wafx

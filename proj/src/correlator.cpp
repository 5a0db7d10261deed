#include "wafx/correlator.hpp"

#include <algorithm>
#include <tuple>

#include "wafx/codec.hpp"
#include "wafx/epoch.hpp"
#include "wafx/error.hpp"
#include "wafx/identifiers.hpp"

namespace wafx {
namespace {

constexpr std::string_view kLiveMessages = "msgstore.db:messages";
constexpr std::int64_t kControlStatus = 6;
constexpr std::int64_t kGroupMatchToleranceMs = 5000;

Evidence line_evidence(const LogEvent& e) { return {e.source_file, e.line_number}; }

std::optional<WaJid> try_jid(std::string_view text) {
  try {
    return parse_jid(text);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<GroupId> try_group(std::string_view text) {
  try {
    return parse_group_id(text);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string_view::npos) next = text.size();
    std::string item(text.substr(pos, next - pos));
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(std::move(item));
    pos = next + 1;
  }
  return out;
}

void sort_unique(std::vector<WaJid>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool is_media_type(std::int64_t t) { return t >= 1 && t <= 3; }

std::optional<std::string> hash_hex(const std::optional<std::string>& b64) {
  if (!b64) return std::nullopt;
  const auto raw = base64_decode(*b64);
  if (!raw || raw->size() != 32) return std::nullopt;
  return to_hex(*raw);
}

std::string ms_text(EpochMillis t) { return iso_utc(t); }

int group_kind_rank(GroupEventKind k) { return static_cast<int>(k); }

}  // namespace

// ------------------------------------------------------------------ basics

EpochMillis effective_time(const MessageRecord& m) {
  if (!m.from_me && m.received_timestamp) return *m.received_timestamp;
  return m.timestamp;
}

Direction direction(const MessageRecord& m) { return m.from_me ? Direction::Outgoing : Direction::Incoming; }

std::optional<WaJid> owner_jid(const CaseBundle& bundle) {
  if (!bundle.registered_number || !is_phone_number(*bundle.registered_number)) return std::nullopt;
  return user_jid(*bundle.registered_number);
}

// ------------------------------------------------------------------- state

MessageState message_state(const MessageRecord& r) {
  MessageState s;
  s.raw_status = r.status_code;
  s.sent_at = r.timestamp;
  s.server_ack_at = r.receipt_server_timestamp;
  s.device_ack_at = r.receipt_device_timestamp;
  if (!r.from_me) s.received_at = r.received_timestamp;

  if (r.status_code == kControlStatus) {
    s.code = StateCode::Control;
  } else if (r.from_me) {
    switch (r.status_code) {
      case 0: s.code = StateCode::PendingLocal; break;
      case 4: s.code = StateCode::OnServer; break;
      case 5: s.code = StateCode::DeliveredToDevice; break;
      default: s.code = StateCode::Unknown; break;
    }
  } else {
    s.code = r.status_code == 0 ? StateCode::ReceivedIncoming : StateCode::Unknown;
  }

  if (s.server_ack_at && *s.server_ack_at < r.timestamp)
    s.issues.push_back("server ack precedes send timestamp");
  if (s.device_ack_at && *s.device_ack_at < r.timestamp)
    s.issues.push_back("device ack precedes send timestamp");
  if (s.server_ack_at && s.device_ack_at && *s.device_ack_at < *s.server_ack_at)
    s.issues.push_back("device ack precedes server ack");
  if (s.code == StateCode::PendingLocal && (s.server_ack_at || s.device_ack_at))
    s.issues.push_back("pending message carries ack timestamps");
  if (s.code == StateCode::OnServer && !s.server_ack_at)
    s.issues.push_back("message on server lacks server ack timestamp");
  if (s.code == StateCode::DeliveredToDevice && !s.device_ack_at)
    s.issues.push_back("delivered message lacks device ack timestamp");
  return s;
}

std::string state_label(StateCode code, std::int64_t raw_status) {
  if (code == StateCode::Unknown) return "UnknownStatus(" + std::to_string(raw_status) + ")";
  return std::string(to_string(code));
}

// ----------------------------------------------------------------- content

std::string server_filename(std::string_view url) {
  std::size_t end = url.find_first_of("?#");
  if (end != std::string_view::npos) url = url.substr(0, end);
  const std::size_t slash = url.rfind('/');
  return std::string(slash == std::string_view::npos ? url : url.substr(slash + 1));
}

ExtractedContent extract_content(const MessageRecord& r) {
  ExtractedContent out;
  const std::string text = r.data.value_or("");
  switch (r.media_wa_type) {
    case 0:
      out.content = TextContent{text};
      break;
    case 1:
    case 2:
    case 3: {
      MediaContent m;
      m.kind = r.media_wa_type == 1 ? MediaKind::Image : r.media_wa_type == 2 ? MediaKind::Audio : MediaKind::Video;
      m.mime = r.media_mime_type.value_or("");
      m.name = r.media_name;
      if (m.name && m.name->empty()) m.name.reset();
      m.size = r.media_size;
      if (m.kind != MediaKind::Image) m.duration = r.media_duration;
      m.hash = r.media_hash;
      m.url = r.media_url;
      if (r.media_url) m.server_filename = server_filename(*r.media_url);
      m.has_thumbnail = r.thumb_image.has_value() || r.raw_data.has_value();
      if (!r.media_url && !r.media_hash) out.issues.push_back("media record without url or hash");
      out.content = std::move(m);
      break;
    }
    case 4:
      if (!r.data) {
        out.issues.push_back("contact card without vCard text");
        out.content = TextContent{};
      } else {
        out.content = ContactCardContent{*r.data, r.media_name};
      }
      break;
    case 5:
      if (!r.latitude || !r.longitude || *r.latitude < -90 || *r.latitude > 90 || *r.longitude < -180 ||
          *r.longitude > 180) {
        out.issues.push_back("geolocation without valid coordinates");
        out.content = TextContent{};
      } else {
        out.content = GeoContent{*r.latitude, *r.longitude, r.raw_data.has_value()};
      }
      break;
    default:
      out.issues.push_back("unknown media_wa_type " + std::to_string(r.media_wa_type));
      out.content = TextContent{text};
      break;
  }
  return out;
}

// ----------------------------------------------------------------- history

MessageIdentity identity_of(const MessageRecord& m) { return {m.key_remote_jid.raw, m.from_me, m.key_id.raw}; }

std::vector<MessageRecord> backup_diff(std::span<const MessageRecord> live, std::span<const MessageRecord> backup) {
  std::set<MessageIdentity> present;
  for (const auto& m : live) present.insert(identity_of(m));
  std::vector<MessageRecord> out;
  for (const auto& m : backup)
    if (!present.contains(identity_of(m))) out.push_back(m);
  return out;
}

bool natural_less(std::string_view a, std::string_view b) {
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (digit(a[i]) && digit(b[j])) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && digit(a[ie])) ++ie;
      while (je < b.size() && digit(b[je])) ++je;
      auto na = a.substr(i, ie - i), nb = b.substr(j, je - j);
      while (na.size() > 1 && na[0] == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb[0] == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

std::vector<std::pair<MessageRecord, std::string>> recovered_from_backups(const CaseBundle& bundle) {
  std::vector<const BackupSet*> sets;
  for (const auto& b : bundle.backups) sets.push_back(&b);
  std::sort(sets.begin(), sets.end(),
            [](const BackupSet* a, const BackupSet* b) { return natural_less(a->path, b->path); });

  std::map<MessageIdentity, std::pair<MessageRecord, std::string>> found;
  for (const BackupSet* set : sets)
    for (auto& m : backup_diff(bundle.messages, set->messages)) {
      auto id = identity_of(m);
      found.insert_or_assign(std::move(id), std::make_pair(std::move(m), set->path + ":messages"));
    }
  std::vector<std::pair<MessageRecord, std::string>> out;
  for (auto& [id, rec] : found) out.push_back(std::move(rec));
  return out;
}

namespace {

HistoryEntry make_entry(const MessageRecord& m, std::string source, bool recovered) {
  HistoryEntry e;
  e.message_id = m.id;
  e.key = m.key_id;
  e.direction = direction(m);
  e.effective_time = effective_time(m);
  e.state = message_state(m);
  e.content = extract_content(m).content;
  if (m.key_remote_jid.kind == JidKind::Group && m.remote_resource && !m.remote_resource->empty())
    e.author = try_jid(*m.remote_resource);
  e.control = m.status_code == kControlStatus;
  e.recovered_from_backup = recovered;
  e.source = std::move(source);
  return e;
}

}  // namespace

ConversationMap reconstruct_history(const CaseBundle& bundle) {
  ConversationMap out;
  for (const auto& m : bundle.messages)
    out[m.key_remote_jid.raw].push_back(make_entry(m, std::string(kLiveMessages), false));
  for (const auto& [m, source] : recovered_from_backups(bundle))
    out[m.key_remote_jid.raw].push_back(make_entry(m, source, true));
  for (auto& [jid, entries] : out)
    std::stable_sort(entries.begin(), entries.end(), [](const HistoryEntry& a, const HistoryEntry& b) {
      return std::tie(a.effective_time, a.message_id, a.recovered_from_backup) <
             std::tie(b.effective_time, b.message_id, b.recovered_from_backup);
    });
  return out;
}

// ------------------------------------------------------------------- media

std::vector<MediaCorrelation> correlate_media(std::span<const MessageRecord> sender_records,
                                              std::span<const MessageRecord> recipient_records,
                                              std::span<const MediaFile> recipient_media) {
  std::map<std::string, std::string> file_by_hash;
  for (const auto& f : recipient_media) file_by_hash.try_emplace(f.sha256_hex, f.path);

  auto file_for = [&](const MessageRecord& r) -> std::optional<std::string> {
    auto hex = hash_hex(r.media_hash);
    if (!hex) return std::nullopt;
    auto it = file_by_hash.find(*hex);
    if (it == file_by_hash.end()) return std::nullopt;
    return it->second;
  };

  std::vector<MediaCorrelation> out;
  for (const auto& s : sender_records) {
    if (!s.from_me || !is_media_type(s.media_wa_type)) continue;
    const std::string s_name = s.media_url ? server_filename(*s.media_url) : std::string();
    for (const auto& r : recipient_records) {
      if (r.from_me || !is_media_type(r.media_wa_type)) continue;
      const std::string r_name = r.media_url ? server_filename(*r.media_url) : std::string();
      const bool name_eq = !s_name.empty() && s_name == r_name;
      // The hash counts only when the recipient's file on disk still has it.
      auto file = file_for(r);
      const bool hash_eq = s.media_hash && r.media_hash && *s.media_hash == *r.media_hash && file;
      if (!name_eq && !hash_eq) continue;
      MediaCorrelation c;
      c.match = name_eq && hash_eq ? MediaMatch::Full : name_eq ? MediaMatch::NameOnly : MediaMatch::HashOnly;
      c.sender_message_id = s.id;
      c.recipient_message_id = r.id;
      c.file_path = std::move(file);
      c.server_filename = name_eq ? s_name : r_name;
      c.media_hash = r.media_hash.value_or("");
      out.push_back(std::move(c));
    }
  }
  for (const auto& r : recipient_records) {
    if (!is_media_type(r.media_wa_type)) continue;
    auto path = file_for(r);
    if (!path) continue;
    MediaCorrelation c;
    c.match = MediaMatch::FileIdentified;
    c.recipient_message_id = r.id;
    c.file_path = std::move(path);
    if (r.media_url) c.server_filename = server_filename(*r.media_url);
    c.media_hash = r.media_hash.value_or("");
    out.push_back(std::move(c));
  }
  return out;
}

// ------------------------------------------------------------------ groups

std::set<std::string> GroupTimeline::members_at(EpochMillis t) const {
  std::set<std::string> members;
  for (const auto& e : events) {
    if (e.time > t) break;
    switch (e.kind) {
      case GroupEventKind::Created:
        members.insert(e.member ? e.member->raw : group_id.creator.raw);
        break;
      case GroupEventKind::Joined:
        if (e.member) members.insert(e.member->raw);
        break;
      case GroupEventKind::Left:
        if (e.member) members.erase(e.member->raw);
        break;
    }
  }
  return members;
}

GroupTimelines group_membership_timeline(const CaseBundle& bundle) {
  GroupTimelines out;
  std::map<std::string, GroupTimeline> groups;
  std::map<std::string, std::vector<GroupEvent>> db_events;
  std::map<std::string, std::vector<GroupEvent>> log_events;
  std::set<std::string> rejected;

  auto ensure = [&](const std::string& raw, const std::string& source) -> GroupTimeline* {
    if (auto it = groups.find(raw); it != groups.end()) return &it->second;
    auto gid = try_group(raw);
    if (!gid) {
      if (rejected.insert(raw).second) out.warnings.push_back({source, "unparseable group id " + raw});
      return nullptr;
    }
    GroupTimeline t;
    t.group_id = *gid;
    return &groups.emplace(raw, std::move(t)).first->second;
  };

  for (const auto& m : bundle.messages) {
    if (m.key_remote_jid.kind != JidKind::Group) continue;
    const std::string src = std::string(kLiveMessages) + "#_id=" + std::to_string(m.id);
    GroupTimeline* t = ensure(m.key_remote_jid.raw, src);
    if (!t || m.status_code != kControlStatus) continue;
    GroupEvent e;
    e.time = m.timestamp;
    e.evidence = {std::string(kLiveMessages), m.id};
    const std::int64_t op = m.media_size.value_or(0);
    if (op == 1) {
      e.kind = GroupEventKind::Created;
      e.member = t->group_id.creator;
      if (m.data && !t->group_name) t->group_name = *m.data;
    } else if (op == 4 || op == 5) {
      e.kind = op == 4 ? GroupEventKind::Joined : GroupEventKind::Left;
      if (m.remote_resource) {
        e.member = try_jid(*m.remote_resource);
        if (!e.member) e.member = WaJid::unparsed(*m.remote_resource);
      } else {
        out.warnings.push_back({src, "membership control message without member"});
      }
    } else {
      out.warnings.push_back({src, "unknown control operation media_size=" + std::to_string(op)});
      continue;
    }
    db_events[m.key_remote_jid.raw].push_back(std::move(e));
  }

  std::map<std::string, std::string> log_names;
  for (const auto& ev : bundle.log_events) {
    if (!ev.group_id || !ev.occurred_at) continue;
    GroupEvent e;
    if (ev.kind == LogEventKind::GroupCreated) {
      e.kind = GroupEventKind::Created;
      e.member = ev.group_id->creator;
      if (ev.detail) log_names.try_emplace(ev.group_id->raw, *ev.detail);
    } else if (ev.kind == LogEventKind::GroupMemberAdded && ev.subject_jid) {
      e.kind = GroupEventKind::Joined;
      e.member = ev.subject_jid;
    } else if (ev.kind == LogEventKind::GroupMemberLeft && ev.subject_jid) {
      e.kind = GroupEventKind::Left;
      e.member = ev.subject_jid;
    } else {
      continue;
    }
    if (!ensure(ev.group_id->raw, ev.source_file)) continue;
    e.time = *ev.occurred_at;
    e.log_sourced = true;
    e.evidence = line_evidence(ev);
    log_events[ev.group_id->raw].push_back(std::move(e));
  }

  for (auto& [raw, timeline] : groups) {
    std::vector<GroupEvent> events = db_events[raw];
    std::vector<bool> taken(events.size(), false);
    auto same = [](const GroupEvent& a, const GroupEvent& b) {
      if (a.kind != b.kind) return false;
      if (a.kind == GroupEventKind::Created) return true;
      return a.member && b.member && a.member->raw == b.member->raw;
    };
    // Exact-time matches first so a nearby earlier event cannot steal a
    // control row whose own log line is present.
    auto& logs = log_events[raw];
    std::vector<bool> matched(logs.size(), false);
    for (std::size_t i = 0; i < logs.size(); ++i)
      for (std::size_t j = 0; j < events.size(); ++j)
        if (!taken[j] && same(events[j], logs[i]) && events[j].time == logs[i].time) {
          taken[j] = matched[i] = true;
          break;
        }
    for (std::size_t i = 0; i < logs.size(); ++i) {
      if (matched[i]) continue;
      std::optional<std::size_t> best;
      for (std::size_t j = 0; j < events.size(); ++j) {
        if (taken[j] || !same(events[j], logs[i])) continue;
        const auto d = std::llabs(events[j].time.value - logs[i].time.value);
        if (d > kGroupMatchToleranceMs) continue;
        if (!best || d < std::llabs(events[*best].time.value - logs[i].time.value)) best = j;
      }
      if (best) {
        taken[*best] = matched[i] = true;
      }
    }
    for (std::size_t i = 0; i < logs.size(); ++i)
      if (!matched[i]) events.push_back(logs[i]);
    std::stable_sort(events.begin(), events.end(), [](const GroupEvent& a, const GroupEvent& b) {
      return std::make_tuple(a.time, group_kind_rank(a.kind), a.log_sourced, a.evidence) <
             std::make_tuple(b.time, group_kind_rank(b.kind), b.log_sourced, b.evidence);
    });
    if (!timeline.group_name)
      if (auto it = log_names.find(raw); it != log_names.end()) timeline.group_name = it->second;

    std::set<std::string> members;
    bool created = false;
    for (const auto& e : events) {
      const std::string where = e.evidence.source + "#" + std::to_string(e.evidence.ref);
      switch (e.kind) {
        case GroupEventKind::Created:
          if (created || !members.empty()) out.warnings.push_back({where, raw + ": creation after other events"});
          created = true;
          if (e.time.value / 1000 != timeline.group_id.creation_time.value)
            out.warnings.push_back({where, raw + ": creation time differs from group id"});
          members.insert(timeline.group_id.creator.raw);
          break;
        case GroupEventKind::Joined:
          if (e.member && !members.insert(e.member->raw).second)
            out.warnings.push_back({where, raw + ": join of existing member " + e.member->raw});
          break;
        case GroupEventKind::Left:
          if (e.member && members.erase(e.member->raw) == 0)
            out.warnings.push_back({where, "OrphanLeave: " + e.member->raw + " leaves " + raw + " without prior join"});
          break;
      }
    }
    timeline.events = std::move(events);
    out.groups.push_back(std::move(timeline));
  }
  return out;
}

// ---------------------------------------------------------------- partners

PartnerResolution resolve_partners(const CaseBundle& bundle) {
  return resolve_partners(bundle, group_membership_timeline(bundle));
}

PartnerResolution resolve_partners(const CaseBundle& bundle, const GroupTimelines& timelines) {
  PartnerResolution out;
  const auto owner = owner_jid(bundle);
  std::map<std::string, const GroupTimeline*> by_group;
  for (const auto& t : timelines.groups) by_group[t.group_id.raw] = &t;

  std::map<std::string, std::vector<const MessageRecord*>> sent_broadcasts;
  for (const auto& m : bundle.messages) {
    if (m.from_me && (m.key_remote_jid.kind == JidKind::Broadcast || m.needs_push == 2)) {
      sent_broadcasts[m.key_id.raw].push_back(&m);
      continue;
    }
    PartnerSet p;
    const JidKind kind = m.key_remote_jid.kind;
    if (m.key_id.broadcast_received) {
      p.kind = PartnerKind::BroadcastReceived;
      p.originator = m.key_remote_jid;
      p.partners = {m.key_remote_jid};
    } else if (kind == JidKind::Group) {
      const GroupTimeline* t = nullptr;
      if (auto it = by_group.find(m.key_remote_jid.raw); it != by_group.end()) t = it->second;
      std::optional<WaJid> resource;
      if (m.remote_resource && !m.remote_resource->empty()) resource = try_jid(*m.remote_resource);
      if (m.status_code == kControlStatus) {
        p.kind = PartnerKind::GroupControl;
        p.authored_by_owner = m.from_me;
        p.originator = m.from_me ? owner : std::nullopt;
        if (resource) p.partners = {*resource};
      } else {
        p.kind = PartnerKind::Group;
        p.authored_by_owner = m.from_me || (!m.remote_resource && m.status_code == 4);
        p.originator = p.authored_by_owner ? owner : resource;
        if (t)
          for (const auto& raw : t->members_at(effective_time(m))) {
            auto j = try_jid(raw);
            p.members_at_time.push_back(j ? *j : WaJid::unparsed(raw));
          }
        for (const auto& j : p.members_at_time)
          if (!p.originator || j.raw != p.originator->raw) p.partners.push_back(j);
      }
    } else if (kind == JidKind::User) {
      p.kind = PartnerKind::Direct;
      p.authored_by_owner = m.from_me;
      p.originator = m.from_me ? owner : std::optional<WaJid>(m.key_remote_jid);
      p.partners = {m.key_remote_jid};
    } else {
      p.kind = PartnerKind::Unknown;
      p.authored_by_owner = m.from_me;
    }
    sort_unique(p.partners);
    sort_unique(p.members_at_time);
    out.by_message.emplace(m.id, std::move(p));
  }

  for (const auto& [key, records] : sent_broadcasts) {
    BroadcastGroup g;
    g.key = records.front()->key_id;
    std::size_t recipient_records = 0;
    for (const MessageRecord* r : records) {
      g.record_ids.push_back(r->id);
      if (r->key_remote_jid.kind == JidKind::Broadcast) {
        g.self_record_id = r->id;
      } else {
        ++recipient_records;
        g.destinations.push_back(r->key_remote_jid);
      }
      if (r->remote_resource)
        for (const auto& item : split_list(*r->remote_resource)) {
          auto j = try_jid(item);
          g.destinations.push_back(j ? *j : WaJid::unparsed(item));
        }
      if (!g.recipient_count && r->recipient_count) g.recipient_count = r->recipient_count;
      if (r->needs_push != 2) g.needs_push_marked = false;
    }
    sort_unique(g.destinations);
    if (g.recipient_count) {
      const auto n = *g.recipient_count;
      g.count_mismatch = static_cast<std::int64_t>(recipient_records) != n ||
                         static_cast<std::int64_t>(g.destinations.size()) != n;
    }
    if (g.count_mismatch)
      out.warnings.push_back({std::string(kLiveMessages),
                              "BroadcastCountMismatch: key " + key + " has " + std::to_string(recipient_records) +
                                  " recipient records and " + std::to_string(g.destinations.size()) +
                                  " destinations, recipient_count " + std::to_string(*g.recipient_count)});
    for (const MessageRecord* r : records) {
      PartnerSet p;
      p.kind = PartnerKind::BroadcastSent;
      p.authored_by_owner = true;
      p.originator = owner;
      p.partners = g.destinations;
      out.by_message.emplace(r->id, std::move(p));
    }
    out.broadcasts.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------- contacts

LogCoverage log_coverage(const CaseBundle& bundle) {
  LogCoverage c;
  c.files = bundle.log_files;
  for (const auto& e : bundle.log_events) {
    if (!e.occurred_at) continue;
    if (!c.first || *e.occurred_at < *c.first) c.first = e.occurred_at;
    if (!c.last || *e.occurred_at > *c.last) c.last = e.occurred_at;
  }
  return c;
}

std::vector<ContactAddition> contact_addition_times(const CaseBundle& bundle) {
  std::map<std::string, ContactAddition> earliest;
  for (const auto& e : bundle.log_events) {
    if (e.kind != LogEventKind::ContactNotInDb && e.kind != LogEventKind::ContactQuery &&
        e.kind != LogEventKind::AvatarDownloaded)
      continue;
    if (!e.occurred_at || !e.subject_jid || e.subject_jid->kind != JidKind::User) continue;
    auto it = earliest.find(e.subject_jid->raw);
    if (it == earliest.end() || *e.occurred_at < it->second.added_at)
      earliest.insert_or_assign(e.subject_jid->raw, ContactAddition{*e.subject_jid, *e.occurred_at, line_evidence(e)});
  }
  std::vector<ContactAddition> out;
  for (auto& [jid, a] : earliest) out.push_back(std::move(a));
  return out;
}

DeletedContactReport infer_deleted_contacts(const CaseBundle& bundle) {
  DeletedContactReport out;
  out.coverage = log_coverage(bundle);
  out.inference_possible = !bundle.log_events.empty();

  std::set<std::string> live;
  for (const auto& c : bundle.contacts) live.insert(c.jid.raw);
  const auto owner = owner_jid(bundle);

  std::map<std::string, DeletedContact> found;
  for (const auto& e : bundle.log_events) {
    if (e.kind != LogEventKind::ContactNotInDb && e.kind != LogEventKind::AvatarDownloaded) continue;
    if (!e.subject_jid || e.subject_jid->kind != JidKind::User || live.contains(e.subject_jid->raw)) continue;
    auto& d = found[e.subject_jid->raw];
    d.jid = *e.subject_jid;
    d.log_evidence = true;
    d.evidence.push_back(line_evidence(e));
  }
  for (const auto& a : contact_addition_times(bundle))
    if (auto it = found.find(a.jid.raw); it != found.end()) it->second.added_at = a.added_at;

  for (const auto& a : bundle.avatar_inventory) {
    if (a.jid.kind != JidKind::User || live.contains(a.jid.raw)) continue;
    if (owner && a.jid.raw == owner->raw) continue;
    auto& d = found[a.jid.raw];
    d.jid = a.jid;
    d.avatar_files.push_back(a.path);
  }
  for (auto& [jid, d] : found) {
    std::sort(d.avatar_files.begin(), d.avatar_files.end());
    out.contacts.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------- messages

std::vector<DeletedMessage> infer_deleted_messages(const CaseBundle& bundle) {
  std::set<std::string> live_keys;
  for (const auto& m : bundle.messages) live_keys.insert(m.key_id.raw);

  struct Acc {
    DeletedMessage d;
    bool sent = false, received = false, server_ack = false, device_ack = false;
  };
  std::map<std::string, Acc> acc;

  auto earliest = [](std::optional<EpochMillis>& slot, const std::optional<EpochMillis>& t) {
    if (t && (!slot || *t < *slot)) slot = t;
  };

  std::map<std::string, std::vector<const LogEvent*>> exchange;
  for (const auto& e : bundle.log_events) {
    if (!e.message_key) continue;
    switch (e.kind) {
      case LogEventKind::MessageDeleted: {
        auto& a = acc[e.message_key->raw];
        a.d.key = *e.message_key;
        a.d.from_log_delete = true;
        earliest(a.d.deleted_at, e.occurred_at);
        a.d.evidence.push_back(line_evidence(e));
        break;
      }
      case LogEventKind::MessageSent:
      case LogEventKind::MessageReceived:
      case LogEventKind::ServerAck:
      case LogEventKind::DeviceAck:
        exchange[e.message_key->raw].push_back(&e);
        break;
      default:
        break;
    }
  }
  if (bundle.has_chat_db)
    for (const auto& [key, events] : exchange)
      if (!live_keys.contains(key)) {
        auto& a = acc[key];
        a.d.key = *events.front()->message_key;
        a.d.from_log_exchange = true;
      }

  std::map<std::string, const std::pair<MessageRecord, std::string>*> recovered_by_key;
  const auto recovered = recovered_from_backups(bundle);
  for (const auto& r : recovered) {
    if (live_keys.contains(r.first.key_id.raw)) continue;
    auto& a = acc[r.first.key_id.raw];
    a.d.key = r.first.key_id;
    a.d.from_backup = true;
    auto [it, inserted] = recovered_by_key.try_emplace(r.first.key_id.raw, &r);
    // Prefer a recipient copy over the broadcast self-record.
    if (!inserted && it->second->first.key_remote_jid.kind == JidKind::Broadcast) it->second = &r;
  }

  std::vector<DeletedMessage> out;
  for (auto& [key, a] : acc) {
    DeletedMessage& d = a.d;
    if (auto it = exchange.find(key); it != exchange.end()) {
      for (const LogEvent* e : it->second) {
        d.evidence.push_back(line_evidence(*e));
        if (e->subject_jid) d.partners.push_back(*e->subject_jid);
        switch (e->kind) {
          case LogEventKind::MessageSent:
            a.sent = true;
            d.direction = Direction::Outgoing;
            earliest(d.exchanged_at, e->occurred_at);
            break;
          case LogEventKind::MessageReceived:
            a.received = true;
            if (!d.direction) d.direction = Direction::Incoming;
            earliest(d.exchanged_at, e->occurred_at);
            break;
          case LogEventKind::ServerAck: a.server_ack = true; break;
          case LogEventKind::DeviceAck: a.device_ack = true; break;
          default: break;
        }
      }
    }
    if (auto it = recovered_by_key.find(key); it != recovered_by_key.end()) {
      const auto& [rec, source] = *it->second;
      d.recovered = rec;
      d.evidence.push_back({source, rec.id});
      if (!d.direction) d.direction = direction(rec);
      if (!d.exchanged_at) d.exchanged_at = effective_time(rec);
      if (d.partners.empty()) {
        if (rec.key_remote_jid.kind == JidKind::Broadcast && rec.remote_resource) {
          for (const auto& item : split_list(*rec.remote_resource))
            if (auto j = try_jid(item)) d.partners.push_back(*j);
        } else {
          d.partners.push_back(rec.key_remote_jid);
        }
      }
    }
    if (a.device_ack) {
      d.last_state = StateCode::DeliveredToDevice;
      d.last_raw_status = 5;
    } else if (a.server_ack) {
      d.last_state = StateCode::OnServer;
      d.last_raw_status = 4;
    } else if (a.sent) {
      d.last_state = StateCode::PendingLocal;
      d.last_raw_status = 0;
    } else if (a.received) {
      d.last_state = StateCode::ReceivedIncoming;
      d.last_raw_status = 0;
    } else if (d.recovered) {
      const auto s = message_state(*d.recovered);
      d.last_state = s.code;
      d.last_raw_status = s.raw_status;
    }
    sort_unique(d.partners);
    std::sort(d.evidence.begin(), d.evidence.end());
    d.evidence.erase(std::unique(d.evidence.begin(), d.evidence.end()), d.evidence.end());
    out.push_back(std::move(d));
  }
  std::sort(out.begin(), out.end(), [](const DeletedMessage& x, const DeletedMessage& y) {
    const auto tx = x.deleted_at ? x.deleted_at : x.exchanged_at;
    const auto ty = y.deleted_at ? y.deleted_at : y.exchanged_at;
    return std::tie(tx, x.key.raw) < std::tie(ty, y.key.raw);
  });
  return out;
}

// ---------------------------------------------------------------- identity

IdentityCheck identity_check(const CaseBundle& bundle, const std::optional<std::string>& sim_number) {
  IdentityCheck c;
  c.registered_number = bundle.registered_number;
  if (sim_number) {
    std::string sim = *sim_number;
    if (!sim.empty() && sim[0] == '+') sim.erase(0, 1);
    c.sim_number = sim;
  }
  if (!c.registered_number || c.registered_number->empty())
    c.status = IdentityStatus::Unavailable;
  else if (!c.sim_number)
    c.status = IdentityStatus::Unverified;
  else
    c.status = *c.sim_number == *c.registered_number ? IdentityStatus::Match : IdentityStatus::Mismatch;
  return c;
}

// ---------------------------------------------------------------- findings

namespace {

using nlohmann::json;

json time_json(std::optional<EpochMillis> t) {
  if (!t) return nullptr;
  return json{{"epoch_ms", t->value}, {"utc", ms_text(*t)}};
}

json jids_json(const std::vector<WaJid>& v) {
  json a = json::array();
  for (const auto& j : v) a.push_back(j.raw);
  return a;
}

std::string coverage_note(const LogCoverage& c) {
  if (!c.first) return "no timestamped log lines";
  return "log coverage " + ms_text(*c.first) + " to " + ms_text(*c.last) + "; earlier activity is invisible";
}

}  // namespace

Analysis analyze(const CaseBundle& bundle, const AnalysisOptions& options) {
  Analysis a;
  a.warnings = bundle.warnings;
  a.conversations = reconstruct_history(bundle);
  a.timelines = group_membership_timeline(bundle);
  a.partners = resolve_partners(bundle, a.timelines);
  a.warnings.insert(a.warnings.end(), a.timelines.warnings.begin(), a.timelines.warnings.end());
  a.warnings.insert(a.warnings.end(), a.partners.warnings.begin(), a.partners.warnings.end());
  const LogCoverage coverage = log_coverage(bundle);
  auto& F = a.findings;

  const std::string clock_note = "timestamps come from the device clock";
  for (const auto& [jid, entries] : a.conversations) {
    std::size_t recovered = 0;
    for (const auto& e : entries) recovered += e.recovered_from_backup ? 1 : 0;
    Finding f;
    f.category = FindingCategory::Conversation;
    f.subject = jid;
    f.time = entries.front().effective_time;
    f.payload = {{"messages", entries.size()},
                 {"recovered_from_backup", recovered},
                 {"first", time_json(entries.front().effective_time)},
                 {"last", time_json(entries.back().effective_time)}};
    f.confidence_note = clock_note;
    for (const auto& e : entries) f.evidence.push_back({e.source, e.message_id});
    F.push_back(std::move(f));
  }
  for (const auto& m : bundle.messages) {
    const auto ex = extract_content(m);
    const auto st = message_state(m);
    if (ex.issues.empty() && st.issues.empty()) continue;
    for (const auto& issue : st.issues)
      a.warnings.push_back({std::string(kLiveMessages) + "#_id=" + std::to_string(m.id), issue});
    if (ex.issues.empty()) continue;
    Finding f;
    f.category = FindingCategory::Conversation;
    f.subject = m.key_remote_jid.raw;
    f.time = effective_time(m);
    f.payload = {{"content_inconsistent", ex.issues}, {"message_id", m.id}};
    f.confidence_note = "content downgraded to text";
    f.evidence = {{std::string(kLiveMessages), m.id}};
    for (const auto& issue : ex.issues)
      a.warnings.push_back({std::string(kLiveMessages) + "#_id=" + std::to_string(m.id), "ContentInconsistent: " + issue});
    F.push_back(std::move(f));
  }

  for (const auto& add : contact_addition_times(bundle)) {
    Finding f;
    f.category = FindingCategory::ContactAdded;
    f.subject = add.jid.raw;
    f.time = add.added_at;
    f.payload = {{"added_at", time_json(add.added_at)}};
    f.confidence_note = "earliest log line naming the contact; " + coverage_note(coverage);
    f.evidence = {add.evidence};
    F.push_back(std::move(f));
  }

  const auto deleted_contacts = infer_deleted_contacts(bundle);
  if (!deleted_contacts.inference_possible) {
    Finding f;
    f.category = FindingCategory::DeletedContact;
    f.subject = "";
    f.payload = {{"inference_possible", false}};
    f.confidence_note = "no log events survive; no inference possible";
    F.push_back(std::move(f));
  }
  for (const auto& d : deleted_contacts.contacts) {
    Finding f;
    f.category = FindingCategory::DeletedContact;
    f.subject = d.jid.raw;
    f.time = d.added_at;
    f.payload = {{"added_at", time_json(d.added_at)},
                 {"deleted_at", nullptr},
                 {"log_evidence", d.log_evidence},
                 {"avatar_files", d.avatar_files}};
    f.confidence_note = d.log_evidence ? "seen in logs, absent from wa_contacts; deletion time unrecoverable; " +
                                             coverage_note(coverage)
                                       : "avatar file without contact row; corroborating evidence only";
    f.evidence = d.evidence;
    for (const auto& p : d.avatar_files) f.evidence.push_back({p, 0});
    F.push_back(std::move(f));
  }

  for (const auto& d : infer_deleted_messages(bundle)) {
    Finding f;
    f.category = FindingCategory::DeletedMessage;
    f.subject = d.key.raw;
    f.time = d.deleted_at ? d.deleted_at : d.exchanged_at;
    json sources = json::array();
    if (d.from_log_delete) sources.push_back("log-delete");
    if (d.from_log_exchange) sources.push_back("log-exchange");
    if (d.from_backup) sources.push_back("backup");
    f.payload = {{"key", d.key.raw},
                 {"deleted_at", time_json(d.deleted_at)},
                 {"exchanged_at", time_json(d.exchanged_at)},
                 {"direction", d.direction ? json(to_string(*d.direction)) : json(nullptr)},
                 {"partners", jids_json(d.partners)},
                 {"last_state", state_label(d.last_state, d.last_raw_status)},
                 {"sources", sources},
                 {"content_recoverable", d.recovered.has_value()}};
    if (d.recovered) {
      const auto c = extract_content(*d.recovered);
      if (const auto* t = std::get_if<TextContent>(&c.content)) f.payload["recovered_text"] = t->text;
    }
    f.confidence_note = d.recovered ? "content recovered from backup" : "content unrecoverable; " + coverage_note(coverage);
    f.evidence = d.evidence;
    F.push_back(std::move(f));
  }

  for (const auto& b : infer_block_status(bundle)) {
    Finding f;
    f.category = FindingCategory::BlockStatus;
    f.subject = b.jid.raw;
    f.time = b.blocked_at;
    f.payload = {{"state", to_string(b.state)},
                 {"blocked_at", time_json(b.blocked_at)},
                 {"unblocked_at", time_json(b.unblocked_at)},
                 {"ambiguous_at", time_json(b.ambiguous_at)}};
    switch (b.state) {
      case BlockState::Blocked: f.confidence_note = "no unblock logged after the last block"; break;
      case BlockState::Unblocked: f.confidence_note = "sole possibly-blocked contact at the next unblock"; break;
      case BlockState::Unknown:
        f.confidence_note = "unblock lines name no contact and several were possibly blocked";
        break;
    }
    f.confidence_note += "; " + coverage_note(coverage);
    f.evidence = b.evidence;
    F.push_back(std::move(f));
  }

  for (const auto& t : a.timelines.groups) {
    Finding f;
    f.category = FindingCategory::GroupMembership;
    f.subject = t.group_id.raw;
    f.time = t.group_id.creation_time.to_millis();
    json events = json::array();
    bool any_log = false;
    for (const auto& e : t.events) {
      events.push_back({{"time", time_json(e.time)},
                        {"kind", to_string(e.kind)},
                        {"member", e.member ? json(e.member->raw) : json(nullptr)},
                        {"log_sourced", e.log_sourced}});
      any_log = any_log || e.log_sourced;
      f.evidence.push_back(e.evidence);
    }
    f.payload = {{"group_id", t.group_id.raw},
                 {"creator", t.group_id.creator.raw},
                 {"created_at", time_json(t.group_id.creation_time.to_millis())},
                 {"name", t.group_name ? json(*t.group_name) : json(nullptr)},
                 {"events", events}};
    f.confidence_note = any_log ? "control rows missing; some events backfilled from logs" : "control messages";
    F.push_back(std::move(f));
  }

  for (const auto& g : a.partners.broadcasts) {
    Finding f;
    f.category = FindingCategory::Conversation;
    f.subject = std::string(kBroadcastJid);
    for (const auto& m : bundle.messages)
      if (m.id == g.record_ids.front()) f.time = m.timestamp;
    f.payload = {{"broadcast_key", g.key.raw},
                 {"destinations", jids_json(g.destinations)},
                 {"recipient_count", g.recipient_count ? json(*g.recipient_count) : json(nullptr)},
                 {"needs_push_marked", g.needs_push_marked},
                 {"count_mismatch", g.count_mismatch}};
    f.confidence_note = g.count_mismatch ? "record count disagrees with recipient_count" : "records share one key";
    for (auto id : g.record_ids) f.evidence.push_back({std::string(kLiveMessages), id});
    F.push_back(std::move(f));
  }

  std::vector<MediaCorrelation> media;
  if (options.peer) {
    media = correlate_media(options.peer->messages, bundle.messages, bundle.media_inventory);
    auto reverse = correlate_media(bundle.messages, options.peer->messages, options.peer->media_inventory);
    for (auto& c : reverse)
      if (c.match != MediaMatch::FileIdentified) {
        c.file_path.reset();
        media.push_back(std::move(c));
      }
  } else {
    media = correlate_media({}, bundle.messages, bundle.media_inventory);
  }
  for (const auto& c : media) {
    Finding f;
    f.category = FindingCategory::MediaCorrelation;
    f.subject = c.server_filename;
    f.payload = {{"match", to_string(c.match)},
                 {"sender_message_id", c.sender_message_id ? json(*c.sender_message_id) : json(nullptr)},
                 {"recipient_message_id", c.recipient_message_id ? json(*c.recipient_message_id) : json(nullptr)},
                 {"file", c.file_path ? json(*c.file_path) : json(nullptr)},
                 {"media_hash", c.media_hash}};
    switch (c.match) {
      case MediaMatch::Full: f.confidence_note = "server file name and SHA-256 agree"; break;
      case MediaMatch::HashOnly: f.confidence_note = "SHA-256 agrees, server file name differs; lower confidence"; break;
      case MediaMatch::NameOnly: f.confidence_note = "server file name agrees, SHA-256 differs; lower confidence"; break;
      case MediaMatch::FileIdentified: f.confidence_note = "local file SHA-256 equals the record hash"; break;
    }
    if (c.recipient_message_id) f.evidence.push_back({std::string(kLiveMessages), *c.recipient_message_id});
    F.push_back(std::move(f));
  }

  {
    const auto id = identity_check(bundle, options.sim_number);
    Finding f;
    f.category = FindingCategory::IdentityCheck;
    f.subject = id.registered_number.value_or("");
    f.payload = {{"status", to_string(id.status)},
                 {"registered_number", id.registered_number ? json(*id.registered_number) : json(nullptr)},
                 {"sim_number", id.sim_number ? json(*id.sim_number) : json(nullptr)}};
    switch (id.status) {
      case IdentityStatus::Match: f.confidence_note = "registered number equals SIM number"; break;
      case IdentityStatus::Mismatch:
        f.confidence_note = "registered number differs from SIM number; possible impersonation";
        break;
      case IdentityStatus::Unverified: f.confidence_note = "no SIM number supplied"; break;
      case IdentityStatus::Unavailable: f.confidence_note = "registered number unavailable"; break;
    }
    F.push_back(std::move(f));
  }

  std::stable_sort(F.begin(), F.end(), [](const Finding& x, const Finding& y) {
    return std::tie(x.category, x.subject, x.time) < std::tie(y.category, y.subject, y.time);
  });
  return a;
}

// ----------------------------------------------------------------- strings

std::string_view to_string(FindingCategory c) {
  switch (c) {
    case FindingCategory::Conversation: return "Conversation";
    case FindingCategory::DeletedContact: return "DeletedContact";
    case FindingCategory::DeletedMessage: return "DeletedMessage";
    case FindingCategory::BlockStatus: return "BlockStatus";
    case FindingCategory::GroupMembership: return "GroupMembership";
    case FindingCategory::MediaCorrelation: return "MediaCorrelation";
    case FindingCategory::IdentityCheck: return "IdentityCheck";
    case FindingCategory::ContactAdded: return "ContactAdded";
  }
  return "?";
}

std::string_view to_string(StateCode c) {
  switch (c) {
    case StateCode::ReceivedIncoming: return "ReceivedIncoming";
    case StateCode::PendingLocal: return "PendingLocal";
    case StateCode::OnServer: return "OnServer";
    case StateCode::DeliveredToDevice: return "DeliveredToDevice";
    case StateCode::Control: return "Control";
    case StateCode::Unknown: return "Unknown";
  }
  return "?";
}

std::string_view to_string(PartnerKind k) {
  switch (k) {
    case PartnerKind::Direct: return "Direct";
    case PartnerKind::BroadcastSent: return "BroadcastSent";
    case PartnerKind::BroadcastReceived: return "BroadcastReceived";
    case PartnerKind::Group: return "Group";
    case PartnerKind::GroupControl: return "GroupControl";
    case PartnerKind::Unknown: return "Unknown";
  }
  return "?";
}

std::string_view to_string(GroupEventKind k) {
  switch (k) {
    case GroupEventKind::Created: return "Created";
    case GroupEventKind::Joined: return "Joined";
    case GroupEventKind::Left: return "Left";
  }
  return "?";
}

std::string_view to_string(MediaMatch m) {
  switch (m) {
    case MediaMatch::Full: return "Full";
    case MediaMatch::HashOnly: return "HashOnlyMatch";
    case MediaMatch::NameOnly: return "NameOnlyMatch";
    case MediaMatch::FileIdentified: return "FileIdentified";
  }
  return "?";
}

std::string_view to_string(MediaKind k) {
  switch (k) {
    case MediaKind::Image: return "image";
    case MediaKind::Audio: return "audio";
    case MediaKind::Video: return "video";
  }
  return "?";
}

std::string_view to_string(Direction d) { return d == Direction::Incoming ? "incoming" : "outgoing"; }

std::string_view to_string(IdentityStatus s) {
  switch (s) {
    case IdentityStatus::Match: return "Match";
    case IdentityStatus::Mismatch: return "Mismatch";
    case IdentityStatus::Unverified: return "Unverified";
    case IdentityStatus::Unavailable: return "Unavailable";
  }
  return "?";
}

}  // namespace wafx

#include "wafx/report.hpp"

#include <algorithm>
#include <cstdio>
#include <tuple>

namespace wafx {

using nlohmann::json;

namespace {

json evidence_json(const std::vector<Evidence>& ev) {
  json out = json::array();
  for (const auto& e : ev) out.push_back({{"source", e.source}, {"ref", e.ref}});
  return out;
}

json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(); }
json opt(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(); }

// Correlator payloads carry {"epoch_ms", "utc"} objects; add the local rendering.
void localize(json& j, UtcOffset tz) {
  if (j.is_object()) {
    if (j.contains("epoch_ms") && j.contains("utc") && j["epoch_ms"].is_number_integer()) {
      j["local"] = render_time(EpochMillis{j["epoch_ms"].get<std::int64_t>()}, tz);
      return;
    }
    for (auto& [k, v] : j.items()) localize(v, tz);
  } else if (j.is_array()) {
    for (auto& v : j) localize(v, tz);
  }
}

json state_json(const MessageState& s, UtcOffset tz) {
  return {{"code", state_label(s.code, s.raw_status)},
          {"raw_status", s.raw_status},
          {"sent_at", time_value(s.sent_at, tz)},
          {"server_ack_at", time_value(s.server_ack_at, tz)},
          {"device_ack_at", time_value(s.device_ack_at, tz)},
          {"received_at", time_value(s.received_at, tz)},
          {"issues", s.issues}};
}

json group_event_json(const GroupEvent& e, UtcOffset tz) {
  return {{"time", time_value(e.time, tz)},
          {"kind", to_string(e.kind)},
          {"member", e.member ? json(e.member->raw) : json()},
          {"log_sourced", e.log_sourced},
          {"evidence", evidence_json({e.evidence})}};
}

std::string content_summary(const MessageContent& c) {
  struct V {
    std::string operator()(const TextContent& t) const { return t.text; }
    std::string operator()(const MediaContent& m) const {
      return std::string(to_string(m.kind)) + " " + (m.name ? *m.name : m.server_filename);
    }
    std::string operator()(const ContactCardContent& v) const { return "vCard " + v.display_name.value_or(""); }
    std::string operator()(const GeoContent& g) const {
      char buf[64];
      std::snprintf(buf, sizeof buf, "geo %.6f,%.6f", g.latitude, g.longitude);
      return buf;
    }
  };
  return std::visit(V{}, c);
}

}  // namespace

json time_value(const std::optional<EpochMillis>& t, UtcOffset tz) {
  if (!t) return json();
  return {{"epoch_ms", t->value}, {"utc", iso_utc(*t)}, {"local", render_time(*t, tz)}};
}

json content_json(const MessageContent& c) {
  struct V {
    json operator()(const TextContent& t) const { return {{"type", "text"}, {"text", t.text}}; }
    json operator()(const MediaContent& m) const {
      return {{"type", "media"},
              {"kind", to_string(m.kind)},
              {"mime", m.mime},
              {"name", opt(m.name)},
              {"size", opt(m.size)},
              {"duration", opt(m.duration)},
              {"hash", opt(m.hash)},
              {"server_filename", m.server_filename},
              {"url", opt(m.url)},
              {"has_thumbnail", m.has_thumbnail}};
    }
    json operator()(const ContactCardContent& v) const {
      return {{"type", "contact_card"}, {"vcard", v.vcard}, {"display_name", opt(v.display_name)}};
    }
    json operator()(const GeoContent& g) const {
      return {{"type", "geo"},
              {"latitude", g.latitude},
              {"longitude", g.longitude},
              {"has_map_thumbnail", g.has_map_thumbnail}};
    }
  };
  return std::visit(V{}, c);
}

json history_entry_json(const HistoryEntry& e, UtcOffset tz) {
  return {{"message_id", e.message_id},
          {"key", e.key.raw},
          {"direction", to_string(e.direction)},
          {"time", time_value(e.effective_time, tz)},
          {"state", state_json(e.state, tz)},
          {"content", content_json(e.content)},
          {"author", e.author ? json(e.author->raw) : json()},
          {"control", e.control},
          {"recovered_from_backup", e.recovered_from_backup},
          {"source", e.source}};
}

json bundle_summary(const CaseBundle& b, UtcOffset tz) {
  const auto cov = log_coverage(b);
  json backups = json::array();
  for (const auto& s : b.backups)
    backups.push_back({{"path", s.path}, {"messages", s.messages.size()}, {"chat_list", s.chat_list.size()}});
  return {{"has_contacts_db", b.has_contacts_db},
          {"has_chat_db", b.has_chat_db},
          {"contacts", b.contacts.size()},
          {"messages", b.messages.size()},
          {"chat_list", b.chat_list.size()},
          {"log_events", b.log_events.size()},
          {"log_files", b.log_files},
          {"log_coverage", {{"first", time_value(cov.first, tz)}, {"last", time_value(cov.last, tz)}}},
          {"backups", backups},
          {"media_files", b.media_inventory.size()},
          {"avatar_files", b.avatar_inventory.size()},
          {"registered_number", opt(b.registered_number)},
          {"own_avatar_present", b.own_avatar_present}};
}

json build_timeline(const Analysis& a, const ReportOptions& o) {
  json convs = json::array();
  for (const auto& [jid, entries] : a.conversations) {
    json msgs = json::array();
    for (const auto& e : entries) msgs.push_back(history_entry_json(e, o.tz));
    convs.push_back({{"jid", jid}, {"messages", msgs}});
  }
  json groups = json::array();
  for (const auto& g : a.timelines.groups) {
    json events = json::array();
    for (const auto& e : g.events) events.push_back(group_event_json(e, o.tz));
    groups.push_back({{"group_id", g.group_id.raw},
                      {"name", opt(g.group_name)},
                      {"creator", g.group_id.creator.raw},
                      {"created_at", time_value(g.group_id.creation_time.to_millis(), o.tz)},
                      {"events", events}});
  }
  return {{"tool_version", kToolVersion},
          {"timezone", o.tz.to_string()},
          {"conversations", convs},
          {"group_timelines", groups}};
}

json build_report(const CaseBundle& bundle, const Analysis& a, const ReportOptions& o) {
  json doc = build_timeline(a, o);
  doc["bundle_summary"] = bundle_summary(bundle, o.tz);
  json findings = json::array();
  for (const auto& f : a.findings) {
    json p = f.payload;
    localize(p, o.tz);
    findings.push_back({{"category", to_string(f.category)},
                        {"subject", f.subject},
                        {"time", time_value(f.time, o.tz)},
                        {"payload", p},
                        {"confidence_note", f.confidence_note},
                        {"evidence", evidence_json(f.evidence)}});
  }
  doc["findings"] = findings;
  json warnings = json::array();
  for (const auto& w : a.warnings) warnings.push_back({{"source", w.source}, {"message", w.message}});
  doc["warnings"] = warnings;
  doc["clock_note"] = "All times come from the device clock and are only as accurate as that clock was.";
  return doc;
}

std::string render_json(const json& doc) { return doc.dump(2) + "\n"; }

std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string timeline_csv(const Analysis& a, const ReportOptions& o) {
  struct Row {
    std::int64_t t;
    std::string conv;
    std::int64_t id;
    std::vector<std::string> cells;
  };
  std::vector<Row> rows;
  for (const auto& [jid, entries] : a.conversations)
    for (const auto& e : entries)
      rows.push_back({e.effective_time.value,
                      jid,
                      e.message_id,
                      {render_time(e.effective_time, o.tz), std::to_string(e.effective_time.value), jid,
                       e.control ? "control" : "message", std::string(to_string(e.direction)),
                       std::to_string(e.message_id), e.key.raw, e.author ? e.author->raw : "",
                       state_label(e.state.code, e.state.raw_status), content_summary(e.content),
                       e.recovered_from_backup ? e.source : "live"}});
  for (const auto& g : a.timelines.groups)
    for (const auto& e : g.events)
      rows.push_back({e.time.value,
                      g.group_id.raw,
                      -1,
                      {render_time(e.time, o.tz), std::to_string(e.time.value), g.group_id.raw, "group-event",
                       std::string(to_string(e.kind)), "", "", e.member ? e.member->raw : "", "",
                       e.log_sourced ? "from log" : "", e.evidence.source + ":" + std::to_string(e.evidence.ref)}});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    return std::tie(x.t, x.conv, x.id) < std::tie(y.t, y.conv, y.id);
  });
  std::string out = "time,epoch_ms,conversation,type,direction,message_id,key,author,state,summary,source\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.cells.size(); ++i) out += (i ? "," : "") + csv_field(r.cells[i]);
    out += "\n";
  }
  return out;
}

}  // namespace wafx

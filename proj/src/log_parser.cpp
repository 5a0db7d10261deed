#include "wafx/log_parser.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wafx/error.hpp"
#include "wafx/identifiers.hpp"

namespace wafx {

using nlohmann::json;

std::string_view default_grammar_json() {
  static constexpr std::string_view kDefault = R"json({
  "format": "wafx-log-grammar",
  "version": 1,
  "line_pattern": "^(\\d{4}-\\d{2}-\\d{2} \\d{2}:\\d{2}:\\d{2}(?:\\.\\d{1,3})?) (?:LL_[A-Z] )?(.*)$",
  "timestamp_group": 1,
  "body_group": 2,
  "clock_offset": "+00:00",
  "rules": [
    {"name": "contact-not-in-db", "kind": "ContactNotInDb",
     "pattern": "^contactsync/not-in-db jid=(\\S+)", "captures": {"jid": 1}},
    {"name": "contact-query", "kind": "ContactQuery",
     "pattern": "^xmpp/query/(?:status|picture|vname) jid=(\\S+)", "captures": {"jid": 1}},
    {"name": "avatar-downloaded", "kind": "AvatarDownloaded",
     "pattern": "^profilephoto/download/done jid=(\\S+)", "captures": {"jid": 1}},
    {"name": "contact-blocked", "kind": "ContactBlocked",
     "pattern": "^blocklist/block jid=(\\S+)", "captures": {"jid": 1}},
    {"name": "contacts-unblocked", "kind": "ContactUnblocked",
     "pattern": "^blocklist/unblock$", "captures": {}},
    {"name": "message-sent", "kind": "MessageSent",
     "pattern": "^xmpp/send/message key=(\\S+) jid=(\\S+)", "captures": {"key": 1, "jid": 2}},
    {"name": "message-received", "kind": "MessageReceived",
     "pattern": "^xmpp/recv/message key=(\\S+) jid=(\\S+)", "captures": {"key": 1, "jid": 2}},
    {"name": "server-ack", "kind": "ServerAck",
     "pattern": "^xmpp/ack/server key=(\\S+) jid=(\\S+)", "captures": {"key": 1, "jid": 2}},
    {"name": "device-ack", "kind": "DeviceAck",
     "pattern": "^xmpp/ack/device key=(\\S+) jid=(\\S+)", "captures": {"key": 1, "jid": 2}},
    {"name": "message-deleted", "kind": "MessageDeleted",
     "pattern": "^msgstore/delete key=(\\S+)", "captures": {"key": 1}},
    {"name": "group-created", "kind": "GroupCreated",
     "pattern": "^groups/create gid=(\\S+) subject=\"(.*)\"$", "captures": {"group": 1, "text": 2}},
    {"name": "group-add-requested", "kind": "GroupAddRequested",
     "pattern": "^groups/add/request gid=(\\S+) jids=(\\S+)", "captures": {"group": 1, "text": 2}},
    {"name": "group-member-added", "kind": "GroupMemberAdded",
     "pattern": "^groups/participant/add gid=(\\S+) jid=(\\S+)", "captures": {"group": 1, "jid": 2}},
    {"name": "group-member-left", "kind": "GroupMemberLeft",
     "pattern": "^groups/participant/remove gid=(\\S+) jid=(\\S+)", "captures": {"group": 1, "jid": 2}}
  ]
})json";
  return kDefault;
}

namespace {

std::regex compile(const std::string& text, const std::string& what) {
  try {
    return std::regex(text, std::regex::ECMAScript | std::regex::optimize);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::InvalidGrammar, what + ": " + e.what());
  }
}

bool needs_key(LogEventKind k) {
  return k == LogEventKind::MessageSent || k == LogEventKind::MessageReceived || k == LogEventKind::ServerAck ||
         k == LogEventKind::DeviceAck || k == LogEventKind::MessageDeleted;
}

bool needs_jid(LogEventKind k) {
  return k == LogEventKind::ContactNotInDb || k == LogEventKind::ContactQuery ||
         k == LogEventKind::AvatarDownloaded || k == LogEventKind::ContactBlocked ||
         k == LogEventKind::GroupMemberAdded || k == LogEventKind::GroupMemberLeft;
}

bool needs_group(LogEventKind k) {
  return k == LogEventKind::GroupCreated || k == LogEventKind::GroupAddRequested ||
         k == LogEventKind::GroupMemberAdded || k == LogEventKind::GroupMemberLeft;
}

}  // namespace

LogGrammar LogGrammar::from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidGrammar, e.what());
  }
  try {
    if (doc.value("format", "") != "wafx-log-grammar")
      throw Error(ErrorCode::InvalidGrammar, "format must be \"wafx-log-grammar\"");
    LogGrammar g;
    g.version = doc.at("version").get<int>();
    if (g.version != 1) throw Error(ErrorCode::InvalidGrammar, "unsupported grammar version " + std::to_string(g.version));
    g.line_pattern_text = doc.at("line_pattern").get<std::string>();
    g.line_pattern = compile(g.line_pattern_text, "line_pattern");
    g.timestamp_group = doc.value("timestamp_group", 1);
    g.body_group = doc.value("body_group", 2);
    try {
      g.clock_offset = UtcOffset::parse(doc.value("clock_offset", "+00:00"));
    } catch (const std::invalid_argument& e) {
      throw Error(ErrorCode::InvalidGrammar, e.what());
    }
    for (const auto& r : doc.at("rules")) {
      LogRule rule;
      rule.name = r.at("name").get<std::string>();
      auto kind = log_event_kind_from_string(r.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::InvalidGrammar, "rule " + rule.name + ": unknown kind");
      rule.kind = *kind;
      rule.pattern_text = r.at("pattern").get<std::string>();
      rule.pattern = compile(rule.pattern_text, "rule " + rule.name);
      const json caps = r.value("captures", json::object());
      for (const auto& [field, index] : caps.items()) {
        const int i = index.get<int>();
        if (field == "jid") rule.jid_group = i;
        else if (field == "key") rule.key_group = i;
        else if (field == "group") rule.group_group = i;
        else if (field == "text") rule.text_group = i;
        else throw Error(ErrorCode::InvalidGrammar, "rule " + rule.name + ": unknown capture '" + field + "'");
      }
      if (rule.kind == LogEventKind::ContactUnblocked && rule.jid_group)
        throw Error(ErrorCode::InvalidGrammar, "rule " + rule.name + ": unblock events are anonymous");
      if (needs_key(rule.kind) && !rule.key_group)
        throw Error(ErrorCode::InvalidGrammar, "rule " + rule.name + ": must capture a message key");
      if (needs_jid(rule.kind) && !rule.jid_group)
        throw Error(ErrorCode::InvalidGrammar, "rule " + rule.name + ": must capture a jid");
      if (needs_group(rule.kind) && !rule.group_group)
        throw Error(ErrorCode::InvalidGrammar, "rule " + rule.name + ": must capture a group id");
      g.rules.push_back(std::move(rule));
    }
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidGrammar, e.what());
  }
}

LogGrammar LogGrammar::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

const LogGrammar& LogGrammar::default_grammar() {
  static const LogGrammar g = from_json(default_grammar_json());
  return g;
}

std::string LogGrammar::to_json() const {
  json rules = json::array();
  for (const auto& r : this->rules) {
    json caps = json::object();
    if (r.jid_group) caps["jid"] = r.jid_group;
    if (r.key_group) caps["key"] = r.key_group;
    if (r.group_group) caps["group"] = r.group_group;
    if (r.text_group) caps["text"] = r.text_group;
    rules.push_back({{"name", r.name}, {"kind", to_string(r.kind)}, {"pattern", r.pattern_text}, {"captures", caps}});
  }
  json doc = {{"format", "wafx-log-grammar"}, {"version", version},   {"line_pattern", line_pattern_text},
              {"timestamp_group", timestamp_group}, {"body_group", body_group},
              {"clock_offset", clock_offset.to_string()}, {"rules", rules}};
  return doc.dump(2);
}

namespace {

LogEvent classify_line(std::string_view line, const std::string& source, std::int64_t number,
                       const LogGrammar& grammar, std::vector<Warning>& warnings) {
  LogEvent ev;
  ev.raw_line = std::string(line);
  ev.source_file = source;
  ev.line_number = number;
  const std::string where = source + ":" + std::to_string(number);

  if (line.find_first_not_of(" \t") == std::string_view::npos) return ev;

  std::smatch head;
  if (!std::regex_match(ev.raw_line, head, grammar.line_pattern)) {
    warnings.push_back({where, "line does not match the grammar's line pattern"});
    return ev;
  }
  ev.occurred_at = parse_datetime(head[grammar.timestamp_group].str(), grammar.clock_offset);
  if (!ev.occurred_at) {
    warnings.push_back({where, "unparsable timestamp '" + head[grammar.timestamp_group].str() + "'"});
    return ev;
  }
  const std::string body = head[grammar.body_group].str();

  for (const auto& rule : grammar.rules) {
    std::smatch m;
    if (!std::regex_search(body, m, rule.pattern)) continue;
    ev.kind = rule.kind;
    try {
      if (rule.jid_group) ev.subject_jid = parse_jid(m[rule.jid_group].str());
      if (rule.key_group) ev.message_key = parse_message_key(m[rule.key_group].str());
      if (rule.group_group) ev.group_id = parse_group_id(m[rule.group_group].str());
    } catch (const Error& e) {
      warnings.push_back({where, std::string("rule ") + rule.name + ": " + e.what()});
      ev.kind = LogEventKind::Other;
      ev.subject_jid.reset();
      ev.message_key.reset();
      ev.group_id.reset();
      return ev;
    }
    if (rule.text_group) ev.detail = m[rule.text_group].str();
    break;
  }
  return ev;
}

}  // namespace

std::vector<LogEvent> parse_log_text(std::string_view text, const std::string& source_file,
                                     const LogGrammar& grammar, std::vector<Warning>& warnings) {
  std::vector<LogEvent> out;
  std::int64_t number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(classify_line(line, source_file, ++number, grammar, warnings));
    pos = end + 1;
  }
  return out;
}

std::vector<LogEvent> parse_log_file(const std::filesystem::path& path, const LogGrammar& grammar,
                                     std::vector<Warning>& warnings, const std::string& source_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_log_text(ss.str(), source_name.empty() ? path.string() : source_name, grammar, warnings);
}

std::vector<LogEvent> merge_log_events(std::vector<std::vector<LogEvent>> streams) {
  std::vector<LogEvent> all;
  for (auto& s : streams) std::move(s.begin(), s.end(), std::back_inserter(all));
  std::stable_sort(all.begin(), all.end(), [](const LogEvent& a, const LogEvent& b) {
    if (a.occurred_at.has_value() != b.occurred_at.has_value()) return a.occurred_at.has_value();
    if (a.occurred_at && *a.occurred_at != *b.occurred_at) return *a.occurred_at < *b.occurred_at;
    if (a.source_file != b.source_file) return a.source_file < b.source_file;
    return a.line_number < b.line_number;
  });
  return all;
}

BlockEvents classify_block_events(std::span<const LogEvent> events) {
  BlockEvents out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (!e.occurred_at) continue;
    if (e.kind == LogEventKind::ContactBlocked && e.subject_jid)
      out.blocks.push_back({*e.subject_jid, *e.occurred_at, i, e.source_file, e.line_number});
    else if (e.kind == LogEventKind::ContactUnblocked)
      out.unblocks.push_back({*e.occurred_at, i, e.source_file, e.line_number});
  }
  return out;
}

}  // namespace wafx

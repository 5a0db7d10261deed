#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "wafx/epoch.hpp"
#include "wafx/error.hpp"
#include "wafx/forge.hpp"
#include "wafx/identifiers.hpp"

namespace wafx {
namespace {

constexpr std::string_view kHeader = "wafx-scenario 1";

const std::set<std::string, std::less<>> kVerbs = {
    "add-contact", "delete-contact", "block",       "unblock-all",  "text",       "media",
    "vcard",       "geo",            "broadcast",   "create-group", "add-to-group", "leave-group",
    "server-ack",  "device-ack",     "delete",      "delete-chat",  "snapshot-backup", "restart"};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(ErrorCode::InvalidScript, "line " + std::to_string(line) + ": " + msg);
}

// Splits on blanks; `k="v w"` stays one token with the quotes removed and
// \" \\ \n unescaped.
std::vector<std::string> tokenize(std::string_view s, int line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    std::string tok;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') {
      if (s[i] == '"') {
        ++i;
        bool closed = false;
        while (i < s.size()) {
          char c = s[i++];
          if (c == '"') {
            closed = true;
            break;
          }
          if (c == '\\' && i < s.size()) {
            char e = s[i++];
            tok += e == 'n' ? '\n' : e;
          } else {
            tok += c;
          }
        }
        if (!closed) fail(line, "unterminated quote");
      } else {
        tok += s[i++];
      }
    }
    out.push_back(std::move(tok));
  }
  return out;
}

std::int64_t to_int(const std::string& v, int line, const std::string& what) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) fail(line, what + " is not an integer: " + v);
  return out;
}

ScenarioActor parse_actor(const std::vector<std::string>& tok, std::size_t first, int line) {
  ScenarioActor a;
  if (tok.size() <= first) fail(line, "missing phone number");
  a.phone = tok[first];
  if (!is_phone_number(a.phone)) fail(line, "not a phone number: " + a.phone);
  for (std::size_t i = first + 1; i < tok.size(); ++i) {
    const auto eq = tok[i].find('=');
    if (eq == std::string::npos) fail(line, "expected key=value: " + tok[i]);
    const std::string k = tok[i].substr(0, eq), v = tok[i].substr(eq + 1);
    if (k == "name")
      a.name = v;
    else if (k == "session")
      a.session = to_int(v, line, "session");
    else
      fail(line, "unknown actor attribute " + k);
  }
  return a;
}

bool looks_like_date(const std::string& s) {
  return s.size() == 10 && s[4] == '-' && s[7] == '-';
}

std::string quote(const std::string& v) {
  bool plain = !v.empty();
  for (char c : v)
    if (c == ' ' || c == '\t' || c == '"' || c == '\\' || c == '\n' || c == '#') plain = false;
  if (plain) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

}  // namespace

ScenarioScript parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  ScenarioScript s;
  s.base_dir = base_dir;
  std::set<std::string> aliases{"me"};
  std::set<std::string> phones;
  bool header = false, have_owner = false;
  std::optional<EpochMillis> last;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (!header) {
      if (line.substr(first) != kHeader) fail(line_no, "expected header '" + std::string(kHeader) + "'");
      header = true;
      continue;
    }
    auto tok = tokenize(line, line_no);
    if (tok[0] == "owner") {
      if (have_owner) fail(line_no, "owner declared twice");
      s.owner = parse_actor(tok, 1, line_no);
      s.owner.alias = "me";
      if (!phones.insert(s.owner.phone).second) fail(line_no, "duplicate phone " + s.owner.phone);
      have_owner = true;
    } else if (tok[0] == "seed") {
      if (tok.size() != 2) fail(line_no, "seed takes one value");
      s.seed = static_cast<std::uint64_t>(to_int(tok[1], line_no, "seed"));
    } else if (tok[0] == "actor") {
      if (tok.size() < 3) fail(line_no, "actor needs an alias and a phone number");
      auto a = parse_actor(tok, 2, line_no);
      a.alias = tok[1];
      if (a.alias.find_first_of(",=") != std::string::npos) fail(line_no, "alias may not contain ',' or '='");
      if (!aliases.insert(a.alias).second) fail(line_no, "duplicate alias " + a.alias);
      if (!phones.insert(a.phone).second) fail(line_no, "duplicate phone " + a.phone);
      s.actors.push_back(std::move(a));
    } else {
      std::string when = tok[0];
      std::size_t next = 1;
      if (looks_like_date(tok[0]) && tok.size() > 1) {
        when += " " + tok[1];
        next = 2;
      }
      auto at = parse_datetime(when);
      if (!at) fail(line_no, "unknown directive or bad time: " + tok[0]);
      if (last && *at <= *last) fail(line_no, "times must strictly increase");
      last = at;
      if (tok.size() <= next) fail(line_no, "missing action verb");
      ScenarioAction a;
      a.at = *at;
      a.verb = tok[next];
      a.line = line_no;
      if (!kVerbs.contains(a.verb)) fail(line_no, "unknown action " + a.verb);
      for (std::size_t i = next + 1; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string::npos || eq == 0) fail(line_no, "expected key=value: " + tok[i]);
        if (!a.args.emplace(tok[i].substr(0, eq), tok[i].substr(eq + 1)).second)
          fail(line_no, "repeated argument " + tok[i].substr(0, eq));
      }
      s.timeline.push_back(std::move(a));
    }
  }
  if (!header) fail(line_no, "empty script");
  if (!have_owner) fail(line_no, "no owner declared");
  return s;
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

std::string format_scenario(const ScenarioScript& s) {
  std::ostringstream out;
  auto actor_attrs = [&](const ScenarioActor& a) {
    if (a.name) out << " name=" << quote(*a.name);
    if (a.session) out << " session=" << *a.session;
  };
  out << kHeader << "\n";
  out << "owner " << s.owner.phone;
  actor_attrs(s.owner);
  out << "\nseed " << s.seed << "\n";
  for (const auto& a : s.actors) {
    out << "actor " << a.alias << " " << a.phone;
    actor_attrs(a);
    out << "\n";
  }
  for (const auto& a : s.timeline) {
    // "YYYY-MM-DD HH:MM:SS.mmm" without the zone suffix; script times are UTC.
    out << render_time(a.at).substr(0, 23) << " " << a.verb;
    for (const auto& [k, v] : a.args) out << " " << k << "=" << quote(v);
    out << "\n";
  }
  return out.str();
}

}  // namespace wafx

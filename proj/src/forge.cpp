#include "wafx/forge.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <random>
#include <set>

#include "wafx/backup_crypto.hpp"
#include "wafx/codec.hpp"
#include "wafx/epoch.hpp"
#include "wafx/error.hpp"
#include "wafx/evidence.hpp"
#include "wafx/identifiers.hpp"
#include "wafx/sqlite_db.hpp"

namespace fs = std::filesystem;

namespace wafx {
namespace {

constexpr std::string_view kMediaUrlBase = "https://mms.whatsapp.net/d/";
constexpr std::string_view kDefaultStatus = "Hey there! I am using WhatsApp.";

const char* const kContactsSchema =
    "CREATE TABLE wa_contacts (_id INTEGER PRIMARY KEY AUTOINCREMENT, jid TEXT NOT NULL, "
    "is_whatsapp_user BOOLEAN NOT NULL, status TEXT, number TEXT, raw_contact_id INTEGER, display_name TEXT, "
    "phone_type INTEGER, phone_label TEXT, unseen_msg_count INTEGER, photo_ts INTEGER, thumb_ts INTEGER, "
    "photo_id_timestamp INTEGER, given_name TEXT, family_name TEXT, wa_name TEXT, sort_name TEXT);";

const char* const kChatSchema =
    "CREATE TABLE messages (_id INTEGER PRIMARY KEY AUTOINCREMENT, key_remote_jid TEXT NOT NULL, "
    "key_from_me INTEGER, key_id TEXT NOT NULL, status INTEGER, needs_push INTEGER, data TEXT, timestamp INTEGER, "
    "media_url TEXT, media_mime_type TEXT, media_wa_type INTEGER, media_size INTEGER, media_name TEXT, "
    "media_hash TEXT, media_duration INTEGER, latitude REAL, longitude REAL, thumb_image TEXT, "
    "remote_resource TEXT, received_timestamp INTEGER, send_timestamp INTEGER, receipt_server_timestamp INTEGER, "
    "receipt_device_timestamp INTEGER, raw_data BLOB, recipient_count INTEGER);"
    "CREATE TABLE chat_list (_id INTEGER PRIMARY KEY AUTOINCREMENT, key_remote_jid TEXT UNIQUE, "
    "message_table_id INTEGER);";

template <class T>
SqlValue opt(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  if constexpr (std::is_same_v<T, EpochMillis>)
    return v->value;
  else if constexpr (std::is_same_v<T, EpochSeconds>)
    return v->value;
  else
    return *v;
}

SqlValue millis_or_sentinel(const std::optional<EpochMillis>& v) {
  return v ? SqlValue{v->value} : SqlValue{std::int64_t{-1}};
}

void write_contacts_db(const fs::path& path, const std::vector<ContactRecord>& contacts) {
  auto db = SqliteDb::create(path);
  db.exec(kContactsSchema);
  db.exec("BEGIN");
  SqliteStatement st(db,
                     "INSERT INTO wa_contacts (_id, jid, is_whatsapp_user, status, number, raw_contact_id, "
                     "display_name, phone_type, phone_label, unseen_msg_count, photo_ts, thumb_ts, "
                     "photo_id_timestamp, given_name, family_name, wa_name, sort_name) "
                     "VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)");
  for (const auto& c : contacts) {
    auto pb = [&](const char* k) -> SqlValue {
      auto it = c.phonebook.find(k);
      return it == c.phonebook.end() ? SqlValue{} : opt(it->second);
    };
    auto pb_int = [&](const char* k) -> SqlValue {
      auto it = c.phonebook.find(k);
      if (it == c.phonebook.end() || !it->second) return std::monostate{};
      return std::stoll(*it->second);
    };
    st.bind(1, c.id);
    st.bind(2, c.jid.raw);
    st.bind(3, std::int64_t{c.is_whatsapp_user ? 1 : 0});
    st.bind(4, opt(c.status_line));
    st.bind(5, pb("number"));
    st.bind(6, pb_int("raw_contact_id"));
    st.bind(7, pb("display_name"));
    st.bind(8, pb_int("phone_type"));
    st.bind(9, pb("phone_label"));
    st.bind(10, c.unseen_msg_count);
    st.bind(11, opt(c.photo_ts));
    st.bind(12, opt(c.thumb_ts));
    st.bind(13, opt(c.photo_id_timestamp));
    st.bind(14, pb("given_name"));
    st.bind(15, pb("family_name"));
    st.bind(16, opt(c.wa_name));
    st.bind(17, pb("sort_name"));
    st.step();
    st.reset();
  }
  db.exec("COMMIT");
}

void write_chat_db(const fs::path& path, const std::vector<MessageRecord>& messages,
                   const std::vector<ChatListRecord>& chat_list) {
  auto db = SqliteDb::create(path);
  db.exec(kChatSchema);
  db.exec("BEGIN");
  SqliteStatement st(db,
                     "INSERT INTO messages (_id, key_remote_jid, key_from_me, key_id, status, needs_push, data, "
                     "timestamp, media_url, media_mime_type, media_wa_type, media_size, media_name, media_hash, "
                     "media_duration, latitude, longitude, thumb_image, remote_resource, received_timestamp, "
                     "send_timestamp, receipt_server_timestamp, receipt_device_timestamp, raw_data, recipient_count) "
                     "VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)");
  for (const auto& m : messages) {
    st.bind(1, m.id);
    st.bind(2, m.key_remote_jid.raw);
    st.bind(3, std::int64_t{m.from_me ? 1 : 0});
    st.bind(4, m.key_id.raw);
    st.bind(5, m.status_code);
    st.bind(6, m.needs_push);
    st.bind(7, opt(m.data));
    st.bind(8, m.timestamp.value);
    st.bind(9, opt(m.media_url));
    st.bind(10, opt(m.media_mime_type));
    st.bind(11, m.media_wa_type);
    st.bind(12, opt(m.media_size));
    st.bind(13, opt(m.media_name));
    st.bind(14, opt(m.media_hash));
    st.bind(15, opt(m.media_duration));
    st.bind(16, opt(m.latitude));
    st.bind(17, opt(m.longitude));
    st.bind(18, opt(m.thumb_image));
    st.bind(19, opt(m.remote_resource));
    st.bind(20, millis_or_sentinel(m.received_timestamp));
    st.bind(21, opt(m.send_timestamp));
    st.bind(22, millis_or_sentinel(m.receipt_server_timestamp));
    st.bind(23, millis_or_sentinel(m.receipt_device_timestamp));
    st.bind(24, opt(m.raw_data));
    st.bind(25, opt(m.recipient_count));
    st.step();
    st.reset();
  }
  SqliteStatement cl(db, "INSERT INTO chat_list (_id, key_remote_jid, message_table_id) VALUES (?,?,?)");
  for (const auto& c : chat_list) {
    cl.bind(1, c.id);
    cl.bind(2, c.key_remote_jid.raw);
    cl.bind(3, c.message_table_id);
    cl.step();
    cl.reset();
  }
  db.exec("COMMIT");
}

struct ForgeActor {
  ScenarioActor spec;
  WaJid jid;
  std::int64_t session = 0;
  std::int64_t seq = 0;
};

struct Stored {
  MessageRecord rec;
  bool live = true;
  bool in_snapshot = false;
  TruthPartners partners;
};

struct KeyInfo {
  bool control = false;
  bool from_me = false;
  EpochMillis created;
  std::string remote;                 // key_remote_jid of the (first) record
  std::vector<std::string> log_jids;  // jids of send/receive/ack lines
  bool server_ack = false;
  bool device_ack = false;
  std::optional<EpochMillis> deleted_at;
};

struct ForgeGroup {
  GroupId gid;
  WaJid jid;
  std::string name;
  std::set<std::string> members;
  struct Ev {
    EpochMillis time;
    GroupEventKind kind;
    std::string member;
    std::int64_t control_id;
  };
  std::vector<Ev> events;
};

struct PendingLine {
  EpochMillis at;
  std::string body;
  LogEvent ev;
};

class Forge {
 public:
  Forge(const ScenarioScript& s, fs::path out) : s_(s), out_(std::move(out)), rng_(s.seed) {}

  ScenarioTruth run() {
    prepare_output();
    setup_actors();
    for (const auto& a : s_.timeline) {
      line_ = a.line;
      act(a);
      refresh_chat_list();
    }
    finish();
    return std::move(truth_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::InvalidScript, "line " + std::to_string(line_) + ": " + msg);
  }

  const std::string& arg(const ScenarioAction& a, const char* k) const {
    auto it = a.args.find(k);
    if (it == a.args.end()) fail(a.verb + " needs " + k + "=");
    return it->second;
  }
  std::optional<std::string> opt_arg(const ScenarioAction& a, const char* k) const {
    auto it = a.args.find(k);
    if (it == a.args.end()) return std::nullopt;
    return it->second;
  }
  std::int64_t int_arg(const ScenarioAction& a, const char* k, std::int64_t dflt) const {
    auto v = opt_arg(a, k);
    if (!v) return dflt;
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size()) fail(std::string(k) + " is not an integer");
    return out;
  }
  double real_arg(const ScenarioAction& a, const char* k) const {
    const auto& v = arg(a, k);
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail(std::string(k) + " is not a number");
    return out;
  }

  // ------------------------------------------------------------ setup

  void prepare_output() {
    fs::create_directories(out_);
    for (const char* sub : {"data", "mnt"}) fs::remove_all(out_ / sub);
  }

  void setup_actors() {
    const std::int64_t base =
        s_.timeline.empty() ? 1'000'000'000 : s_.timeline.front().at.value / 1000 - 3600;
    auto add = [&](const ScenarioActor& a, std::int64_t dflt) {
      ForgeActor fa;
      fa.spec = a;
      fa.jid = user_jid(a.phone);
      fa.session = a.session.value_or(dflt);
      if (!sessions_.insert(fa.session).second)
        throw Error(ErrorCode::InvalidScript, "actor " + a.alias + ": session start already used");
      actors_.emplace(a.alias, std::move(fa));
    };
    add(s_.owner, base);
    for (std::size_t i = 0; i < s_.actors.size(); ++i) add(s_.actors[i], base - 60 * static_cast<std::int64_t>(i + 1));
    owner_ = &actors_.at("me");
  }

  ForgeActor& actor(const std::string& alias) {
    auto it = actors_.find(alias);
    if (it == actors_.end()) fail("unknown actor " + alias);
    return it->second;
  }

  std::string next_key(ForgeActor& a) { return std::to_string(a.session) + "-" + std::to_string(++a.seq); }

  // ------------------------------------------------------------- logs

  void log(EpochMillis t, std::string body, LogEventKind kind, std::optional<WaJid> jid = {},
           std::optional<std::string> key = {}, std::optional<GroupId> group = {},
           std::optional<std::string> detail = {}) {
    LogEvent ev;
    ev.occurred_at = t;
    ev.kind = kind;
    ev.subject_jid = std::move(jid);
    if (key) ev.message_key = parse_message_key(*key);
    ev.group_id = std::move(group);
    ev.detail = std::move(detail);
    lines_.push_back({t, std::move(body), std::move(ev)});
  }

  void log_exchange(EpochMillis t, const char* what, LogEventKind kind, const std::string& key, const WaJid& jid) {
    log(t, std::string("xmpp/") + what + " key=" + key + " jid=" + jid.raw, kind, jid, key);
    keys_[key].log_jids.push_back(jid.raw);
  }

  // --------------------------------------------------------- messages

  MessageRecord base(const WaJid& remote, const std::string& key, bool from_me, EpochMillis t) {
    MessageRecord r;
    r.id = next_message_id_++;
    r.key_remote_jid = remote;
    r.key_id = parse_message_key(key);
    r.from_me = from_me;
    r.timestamp = t;
    if (!from_me) r.received_timestamp = t;
    r.send_timestamp = -1;
    return r;
  }

  void store(MessageRecord r, TruthPartners p, bool control = false) {
    auto& k = keys_[r.key_id.raw];
    if (k.remote.empty()) {
      k.control = control;
      k.from_me = r.from_me;
      k.created = r.timestamp;
      k.remote = r.key_remote_jid.raw;
    }
    records_.push_back({std::move(r), true, false, std::move(p)});
  }

  TruthPartners direct_partners(bool from_me, const ForgeActor& other) const {
    TruthPartners p;
    p.kind = PartnerKind::Direct;
    p.authored_by_owner = from_me;
    p.originator = from_me ? owner_->jid.raw : other.jid.raw;
    p.partners = {other.jid.raw};
    return p;
  }

  TruthPartners group_partners(const ForgeGroup& g, const std::string& originator, bool owner) const {
    TruthPartners p;
    p.kind = PartnerKind::Group;
    p.authored_by_owner = owner;
    p.originator = originator;
    p.members.assign(g.members.begin(), g.members.end());
    for (const auto& m : g.members)
      if (m != originator) p.partners.push_back(m);
    return p;
  }

  ForgeGroup* find_group(const std::string& alias) {
    auto it = groups_.find(alias);
    return it == groups_.end() ? nullptr : &it->second;
  }

  // Common routing for text/media/vcard/geo. `fill` sets the content columns.
  template <class Fill>
  void message(const ScenarioAction& a, Fill fill) {
    const std::string& from = arg(a, "from");
    const std::string& to = arg(a, "to");
    const EpochMillis t = a.at;
    std::string key;
    if (from == "me") {
      key = next_key(*owner_);
      if (ForgeGroup* g = find_group(to)) {
        auto r = base(g->jid, key, true, t);
        fill(r, true);
        log_exchange(t, "send/message", LogEventKind::MessageSent, key, g->jid);
        store(std::move(r), group_partners(*g, owner_->jid.raw, true));
      } else {
        ForgeActor& other = actor(to);
        if (&other == owner_) fail("owner cannot message itself");
        auto r = base(other.jid, key, true, t);
        fill(r, true);
        log_exchange(t, "send/message", LogEventKind::MessageSent, key, other.jid);
        store(std::move(r), direct_partners(true, other));
      }
    } else {
      ForgeActor& sender = actor(from);
      key = next_key(sender);
      if (ForgeGroup* g = find_group(to)) {
        if (!g->members.contains(sender.jid.raw)) fail(from + " is not a member of " + to);
        auto r = base(g->jid, key, false, t);
        r.remote_resource = sender.jid.raw;
        fill(r, false);
        log_exchange(t, "recv/message", LogEventKind::MessageReceived, key, g->jid);
        store(std::move(r), group_partners(*g, sender.jid.raw, false));
      } else {
        if (to != "me") fail("messages between two other actors are not visible to the device");
        auto r = base(sender.jid, key, false, t);
        fill(r, false);
        log_exchange(t, "recv/message", LogEventKind::MessageReceived, key, sender.jid);
        store(std::move(r), direct_partners(false, sender));
      }
    }
    if (auto ref = opt_arg(a, "ref")) {
      if (!refs_.emplace(*ref, key).second) fail("duplicate ref " + *ref);
    }
  }

  Bytes media_bytes(const ScenarioAction& a) {
    if (auto f = opt_arg(a, "file")) {
      fs::path p = *f;
      if (p.is_relative()) p = s_.base_dir / p;
      try {
        return read_file(p);
      } catch (const Error& e) {
        fail(e.what());
      }
    }
    if (auto t = opt_arg(a, "text")) return Bytes(t->begin(), t->end());
    const auto n = int_arg(a, "bytes", 1024);
    if (n < 1 || n > (64 << 20)) fail("bytes out of range");
    Bytes out(static_cast<std::size_t>(n));
    for (auto& b : out) b = static_cast<std::uint8_t>(rng_() & 0xff);
    return out;
  }

  std::string random_hex(std::size_t n) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += kHex[rng_() & 0xf];
    return s;
  }

  void media(const ScenarioAction& a) {
    const std::string kind = opt_arg(a, "kind").value_or("image");
    std::int64_t type = 0;
    std::string prefix, ext, mime, dir;
    if (kind == "image") {
      type = 1;
      prefix = "IMG";
      ext = "jpg";
      mime = "image/jpeg";
      dir = "WhatsApp Images";
    } else if (kind == "audio") {
      type = 2;
      prefix = "AUD";
      ext = "aac";
      mime = "audio/aac";
      dir = "WhatsApp Audio";
    } else if (kind == "video") {
      type = 3;
      prefix = "VID";
      ext = "mp4";
      mime = "video/mp4";
      dir = "WhatsApp Video";
    } else {
      fail("unknown media kind " + kind);
    }
    mime = opt_arg(a, "mime").value_or(mime);
    const Bytes content = media_bytes(a);
    const std::string server = opt_arg(a, "server-name").value_or(random_hex(32) + "." + ext);
    if (server.empty() || server.find('/') != std::string::npos) fail("bad server-name");
    const std::string date = utc_date(a.at);
    std::string compact = date;
    compact.erase(std::remove(compact.begin(), compact.end(), '-'), compact.end());
    std::string name = opt_arg(a, "name").value_or("");
    if (name.empty()) {
      char num[8];
      std::snprintf(num, sizeof num, "%04d", media_counter_[prefix + compact]++);
      name = prefix + "-" + compact + "-WA" + num + "." + ext;
    }
    if (name.find('/') != std::string::npos) fail("bad media name");
    const bool download = opt_arg(a, "download").value_or("1") != "0";
    const auto duration = int_arg(a, "duration", 0);
    const auto digest = sha256(content);

    message(a, [&](MessageRecord& r, bool outgoing) {
      r.media_wa_type = type;
      r.media_hash = base64_encode(digest);
      r.media_url = std::string(kMediaUrlBase) + server;
      r.media_mime_type = mime;
      r.media_size = static_cast<std::int64_t>(content.size());
      if (outgoing) r.media_name = name;
      if (type != 1) r.media_duration = duration;
      if (outgoing || download) {
        const std::string rel = "mnt/sdcard/WhatsApp/Media/" + dir + (outgoing ? "/Sent/" : "/") + name;
        if (!media_files_.emplace(rel, content).second) fail("media file " + rel + " already exists");
      }
    });
  }

  void broadcast(const ScenarioAction& a) {
    const std::string& from = arg(a, "from");
    const std::string& to = arg(a, "to");
    const std::string body = opt_arg(a, "body").value_or("");
    const EpochMillis t = a.at;
    std::string key;
    if (from == "me") {
      std::vector<ForgeActor*> recipients;
      std::set<std::string> seen;
      std::size_t pos = 0;
      while (pos <= to.size()) {
        auto next = to.find(',', pos);
        if (next == std::string::npos) next = to.size();
        const std::string alias = to.substr(pos, next - pos);
        ForgeActor& r = actor(alias);
        if (&r == owner_) fail("owner cannot be a broadcast recipient");
        if (!seen.insert(alias).second) fail("duplicate broadcast recipient " + alias);
        recipients.push_back(&r);
        pos = next + 1;
      }
      key = next_key(*owner_);
      std::vector<std::string> dest;
      for (auto* r : recipients) dest.push_back(r->jid.raw);
      std::string list;
      for (const auto& d : dest) list += (list.empty() ? "" : ",") + d;
      std::sort(dest.begin(), dest.end());
      TruthPartners p;
      p.kind = PartnerKind::BroadcastSent;
      p.authored_by_owner = true;
      p.originator = owner_->jid.raw;
      p.partners = dest;
      auto fill = [&](MessageRecord& r) {
        r.data = body;
        r.needs_push = 2;
        r.recipient_count = static_cast<std::int64_t>(recipients.size());
        r.remote_resource = list;
      };
      for (auto* rcp : recipients) {
        auto r = base(rcp->jid, key, true, t);
        fill(r);
        log_exchange(t, "send/message", LogEventKind::MessageSent, key, rcp->jid);
        store(std::move(r), p);
      }
      auto self = base(parse_jid(kBroadcastJid), key, true, t);
      fill(self);
      store(std::move(self), p);
      broadcast_recipients_[key] = recipients;
    } else {
      if (to != "me") fail("a received broadcast must target me");
      ForgeActor& sender = actor(from);
      if (&sender == owner_) fail("bad broadcast sender");
      key = std::string(kBroadcastKeyPrefix) + next_key(sender);
      auto r = base(sender.jid, key, false, t);
      r.data = body;
      log_exchange(t, "recv/message", LogEventKind::MessageReceived, key, sender.jid);
      TruthPartners p;
      p.kind = PartnerKind::BroadcastReceived;
      p.originator = sender.jid.raw;
      p.partners = {sender.jid.raw};
      store(std::move(r), p);
    }
    if (auto ref = opt_arg(a, "ref")) {
      if (!refs_.emplace(*ref, key).second) fail("duplicate ref " + *ref);
    }
  }

  std::vector<Stored*> live_with_key(const std::string& key) {
    std::vector<Stored*> out;
    for (auto& s : records_)
      if (s.live && s.rec.key_id.raw == key) out.push_back(&s);
    return out;
  }

  std::string resolve_key(const ScenarioAction& a) {
    if (auto ref = opt_arg(a, "ref")) {
      auto it = refs_.find(*ref);
      if (it == refs_.end()) fail("unknown ref " + *ref);
      return it->second;
    }
    return arg(a, "key");
  }

  void ack(const ScenarioAction& a, bool device) {
    const std::string key = resolve_key(a);
    auto recs = live_with_key(key);
    if (recs.empty()) fail("no live message with key " + key);
    for (auto* s : recs) {
      auto& r = s->rec;
      if (!r.from_me || r.status_code == 6) fail("only outgoing messages are acknowledged");
      if (!device && r.status_code != 0) fail("server ack for a message not pending");
      if (device && r.status_code != 4) fail("device ack before server ack");
      r.status_code = device ? 5 : 4;
      (device ? r.receipt_device_timestamp : r.receipt_server_timestamp) = a.at;
    }
    auto& k = keys_[key];
    (device ? k.device_ack : k.server_ack) = true;
    const char* what = device ? "ack/device" : "ack/server";
    const auto kind = device ? LogEventKind::DeviceAck : LogEventKind::ServerAck;
    if (auto it = broadcast_recipients_.find(key); it != broadcast_recipients_.end()) {
      for (auto* r : it->second) log_exchange(a.at, what, kind, key, r->jid);
    } else {
      log_exchange(a.at, what, kind, key, recs.front()->rec.key_remote_jid);
    }
  }

  void remove(Stored& s, EpochMillis t) {
    s.live = false;
    auto& k = keys_[s.rec.key_id.raw];
    if (!k.deleted_at) k.deleted_at = t;
  }

  void delete_message(const ScenarioAction& a) {
    const std::string key = resolve_key(a);
    auto recs = live_with_key(key);
    if (recs.empty()) fail("no live message with key " + key);
    for (auto* s : recs) remove(*s, a.at);
    log(a.at, "msgstore/delete key=" + key, LogEventKind::MessageDeleted, std::nullopt, key);
  }

  void delete_chat(const ScenarioAction& a) {
    const std::string& with = arg(a, "with");
    std::string jid;
    if (with == "broadcast")
      jid = std::string(kBroadcastJid);
    else if (ForgeGroup* g = find_group(with))
      jid = g->jid.raw;
    else
      jid = actor(with).jid.raw;
    bool any = false;
    for (auto& s : records_) {
      if (!s.live || s.rec.key_remote_jid.raw != jid) continue;
      any = true;
      remove(s, a.at);
      log(a.at, "msgstore/delete key=" + s.rec.key_id.raw, LogEventKind::MessageDeleted, std::nullopt,
          s.rec.key_id.raw);
    }
    if (!any) fail("no conversation with " + with);
  }

  // ----------------------------------------------------------- groups

  void control(ForgeGroup& g, ForgeActor& author, EpochMillis t, std::int64_t op, const std::string& member,
               GroupEventKind kind) {
    const bool from_me = &author == owner_;
    const std::string key = next_key(author);
    auto r = base(g.jid, key, from_me, t);
    r.status_code = 6;
    r.media_size = op;
    if (op == 1)
      r.data = g.name;
    else
      r.remote_resource = member;
    TruthPartners p;
    p.kind = PartnerKind::GroupControl;
    p.authored_by_owner = from_me;
    p.originator = from_me ? owner_->jid.raw : "";
    if (op != 1) p.partners = {member};
    g.events.push_back({t, kind, op == 1 ? g.gid.creator.raw : member, r.id});
    store(std::move(r), p, true);
  }

  void create_group(const ScenarioAction& a) {
    const std::string& alias = arg(a, "group");
    if (actors_.contains(alias) || groups_.contains(alias) || alias == "broadcast") fail("alias in use: " + alias);
    const std::string name = arg(a, "name");
    if (name.find('\n') != std::string::npos) fail("group name may not span lines");
    const std::string raw = owner_->spec.phone + "-" + std::to_string(a.at.value / 1000) + std::string(kGroupSuffix);
    for (const auto& [k, g] : groups_)
      if (g.gid.raw == raw) fail("two groups created in the same second");
    ForgeGroup g;
    g.gid = parse_group_id(raw);
    g.jid = parse_jid(raw);
    g.name = name;
    g.members.insert(owner_->jid.raw);
    auto& ref = groups_.emplace(alias, std::move(g)).first->second;
    log(a.at, "groups/create gid=" + raw + " subject=\"" + name + "\"", LogEventKind::GroupCreated, std::nullopt,
        std::nullopt, ref.gid, name);
    control(ref, *owner_, a.at, 1, "", GroupEventKind::Created);
  }

  ForgeGroup& group(const ScenarioAction& a) {
    ForgeGroup* g = find_group(arg(a, "group"));
    if (!g) fail("unknown group " + arg(a, "group"));
    return *g;
  }

  void add_to_group(const ScenarioAction& a) {
    ForgeGroup& g = group(a);
    ForgeActor& m = actor(arg(a, "member"));
    if (!g.members.insert(m.jid.raw).second) fail(m.spec.alias + " is already a member");
    log(a.at, "groups/add/request gid=" + g.gid.raw + " jids=" + m.jid.raw, LogEventKind::GroupAddRequested,
        std::nullopt, std::nullopt, g.gid, m.jid.raw);
    log(a.at, "groups/participant/add gid=" + g.gid.raw + " jid=" + m.jid.raw, LogEventKind::GroupMemberAdded, m.jid,
        std::nullopt, g.gid);
    control(g, *owner_, a.at, 4, m.jid.raw, GroupEventKind::Joined);
  }

  void leave_group(const ScenarioAction& a) {
    ForgeGroup& g = group(a);
    ForgeActor& m = actor(arg(a, "member"));
    if (&m == owner_) fail("the owner cannot leave a group it created");
    if (g.members.erase(m.jid.raw) == 0) fail(m.spec.alias + " is not a member");
    log(a.at, "groups/participant/remove gid=" + g.gid.raw + " jid=" + m.jid.raw, LogEventKind::GroupMemberLeft,
        m.jid, std::nullopt, g.gid);
    control(g, m, a.at, 5, m.jid.raw, GroupEventKind::Left);
  }

  // --------------------------------------------------------- contacts

  void add_contact(const ScenarioAction& a) {
    ForgeActor& who = actor(arg(a, "contact"));
    if (&who == owner_) fail("owner cannot be a contact");
    for (const auto& c : contacts_)
      if (c.jid.raw == who.jid.raw) fail(who.spec.alias + " is already a contact");
    const bool wa_user = int_arg(a, "user", 1) != 0;
    ContactRecord c;
    c.id = next_contact_id_++;
    c.jid = who.jid;
    c.is_whatsapp_user = wa_user;
    c.photo_ts = 0;
    const std::string name = who.spec.name.value_or(who.spec.phone);
    const auto space = name.find(' ');
    c.phonebook = {{"number", "+" + who.spec.phone},
                   {"display_name", name},
                   {"given_name", name.substr(0, space)},
                   {"family_name", space == std::string::npos ? std::nullopt
                                                              : std::optional<std::string>(name.substr(space + 1))},
                   {"phone_type", "2"},
                   {"phone_label", std::nullopt},
                   {"raw_contact_id", std::to_string(c.id)},
                   {"sort_name", name}};
    const WaJid& j = who.jid;
    log(a.at, "contactsync/not-in-db jid=" + j.raw, LogEventKind::ContactNotInDb, j);
    if (wa_user) {
      c.wa_name = who.spec.name;
      c.status_line = std::string(kDefaultStatus);
      c.thumb_ts = EpochSeconds{a.at.value / 1000 - 86400};
      c.photo_id_timestamp = a.at;
      log(a.at, "xmpp/query/status jid=" + j.raw, LogEventKind::ContactQuery, j);
      log(a.at, "xmpp/query/picture jid=" + j.raw, LogEventKind::ContactQuery, j);
      log(a.at, "profilephoto/download/done jid=" + j.raw, LogEventKind::AvatarDownloaded, j);
      avatars_.insert(j.raw);
    }
    contacts_.push_back(std::move(c));
    auto& first = first_added_[j.raw];
    if (!first) first = a.at;
  }

  void delete_contact(const ScenarioAction& a) {
    ForgeActor& who = actor(arg(a, "contact"));
    auto it = std::find_if(contacts_.begin(), contacts_.end(), [&](const ContactRecord& c) { return c.jid == who.jid; });
    if (it == contacts_.end()) fail(who.spec.alias + " is not a contact");
    contacts_.erase(it);
  }

  // ------------------------------------------------------------ state

  void refresh_chat_list() {
    std::map<std::string, std::int64_t> last;
    for (const auto& s : records_)
      if (s.live) last[s.rec.key_remote_jid.raw] = std::max(last[s.rec.key_remote_jid.raw], s.rec.id);
    for (auto it = chat_ids_.begin(); it != chat_ids_.end();)
      it = last.contains(it->first) ? std::next(it) : chat_ids_.erase(it);
    for (const auto& s : records_)
      if (s.live && !chat_ids_.contains(s.rec.key_remote_jid.raw)) {
        chat_ids_[s.rec.key_remote_jid.raw] = next_chat_id_++;
      }
    chat_list_.clear();
    for (const auto& [jid, id] : chat_ids_) chat_list_.push_back({id, parse_jid(jid), last[jid]});
    std::sort(chat_list_.begin(), chat_list_.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  }

  std::vector<MessageRecord> live_messages() const {
    std::vector<MessageRecord> out;
    for (const auto& s : records_)
      if (s.live) out.push_back(s.rec);
    return out;
  }

  void snapshot(const ScenarioAction& a) {
    const std::string date = utc_date(a.at);
    const int n = ++snapshot_counter_[date];
    const std::string rel = "mnt/sdcard/WhatsApp/Databases/msgstore-" + date + "." + std::to_string(n) + ".db.crypt";
    const fs::path tmp = out_ / ".forge-snapshot.db";
    write_chat_db(tmp, live_messages(), chat_list_);
    const Bytes plain = read_file(tmp);
    fs::remove(tmp);
    write_file(out_ / rel, encrypt_fixture(plain));
    BackupSet set;
    set.path = rel;
    set.messages = live_messages();
    set.chat_list = chat_list_;
    backups_.push_back(std::move(set));
    last_snapshot_ = plain;
    for (auto& s : records_)
      if (s.live) s.in_snapshot = true;
  }

  void restart(const ScenarioAction& a) {
    ForgeActor& who = actor(opt_arg(a, "who").value_or("me"));
    const std::int64_t session = a.at.value / 1000;
    if (!sessions_.insert(session).second) fail("session start already used");
    who.session = session;
    who.seq = 0;
  }

  void act(const ScenarioAction& a) {
    const std::string& v = a.verb;
    if (v == "add-contact") {
      add_contact(a);
    } else if (v == "delete-contact") {
      delete_contact(a);
    } else if (v == "block") {
      ForgeActor& who = actor(arg(a, "contact"));
      if (&who == owner_) fail("owner cannot block itself");
      log(a.at, "blocklist/block jid=" + who.jid.raw, LogEventKind::ContactBlocked, who.jid);
    } else if (v == "unblock-all") {
      log(a.at, "blocklist/unblock", LogEventKind::ContactUnblocked);
    } else if (v == "text") {
      const std::string body = arg(a, "body");
      message(a, [&](MessageRecord& r, bool) { r.data = body; });
    } else if (v == "media") {
      media(a);
    } else if (v == "vcard") {
      const std::string name = arg(a, "name");
      const std::string tel = arg(a, "tel");
      message(a, [&](MessageRecord& r, bool) {
        r.media_wa_type = 4;
        r.data = "BEGIN:VCARD\nVERSION:3.0\nN:;" + name + ";;;\nFN:" + name + "\nTEL;type=CELL:" + tel + "\nEND:VCARD";
        r.media_name = name;
      });
    } else if (v == "geo") {
      const double lat = real_arg(a, "lat"), lon = real_arg(a, "lon");
      if (lat < -90 || lat > 90 || lon < -180 || lon > 180) fail("coordinates out of range");
      message(a, [&](MessageRecord& r, bool) {
        r.media_wa_type = 5;
        r.latitude = lat;
        r.longitude = lon;
      });
    } else if (v == "broadcast") {
      broadcast(a);
    } else if (v == "create-group") {
      create_group(a);
    } else if (v == "add-to-group") {
      add_to_group(a);
    } else if (v == "leave-group") {
      leave_group(a);
    } else if (v == "server-ack") {
      ack(a, false);
    } else if (v == "device-ack") {
      ack(a, true);
    } else if (v == "delete") {
      delete_message(a);
    } else if (v == "delete-chat") {
      delete_chat(a);
    } else if (v == "snapshot-backup") {
      snapshot(a);
    } else if (v == "restart") {
      restart(a);
    } else {
      fail("unknown action " + v);
    }
  }

  // ----------------------------------------------------------- output

  void write_logs(CaseBundle& b) {
    const std::string dir = "data/data/com.whatsapp/files/Logs/";
    std::map<std::string, std::string> files;  // relative path -> text
    const std::string last_day = lines_.empty() ? "" : utc_date(lines_.back().at);
    std::map<std::string, std::int64_t> counters;
    files[dir + "whatsapp.log"];
    for (auto& l : lines_) {
      const std::string day = utc_date(l.at);
      const std::string rel = dir + (day == last_day ? std::string("whatsapp.log") : "whatsapp-" + day + ".log");
      const std::string text = render_time(l.at).substr(0, 23) + " LL_I " + l.body;
      files[rel] += text + "\n";
      l.ev.raw_line = text;
      l.ev.source_file = rel;
      l.ev.line_number = ++counters[rel];
      b.log_events.push_back(l.ev);
    }
    for (const auto& [rel, text] : files) {
      write_file(out_ / rel, as_bytes(text));
      b.log_files.push_back(rel);
    }
  }

  void finish() {
    CaseBundle& b = truth_.bundle;
    const std::string db_dir = "data/data/com.whatsapp/databases/";
    const std::string files_dir = "data/data/com.whatsapp/files/";
    b.has_contacts_db = b.has_chat_db = true;
    b.contacts = contacts_;
    b.messages = live_messages();
    b.chat_list = chat_list_;
    write_contacts_db(out_ / (db_dir + "wa.db"), contacts_);
    write_chat_db(out_ / (db_dir + "msgstore.db"), b.messages, chat_list_);

    if (last_snapshot_) {
      const std::string rel = "mnt/sdcard/WhatsApp/Databases/msgstore.db.crypt";
      write_file(out_ / rel, encrypt_fixture(*last_snapshot_));
      BackupSet copy = backups_.back();
      copy.path = rel;
      backups_.push_back(std::move(copy));
    }
    fs::create_directories(out_ / "mnt/sdcard/WhatsApp/Databases");
    std::sort(backups_.begin(), backups_.end(),
              [](const BackupSet& x, const BackupSet& y) { return fs::path(x.path) < fs::path(y.path); });
    b.backups = backups_;

    write_logs(b);

    write_file(out_ / (files_dir + "me"), as_bytes(owner_->spec.phone));
    write_file(out_ / (files_dir + "me.jpg"), as_bytes("placeholder avatar of " + owner_->jid.raw));
    b.registered_number = owner_->spec.phone;
    b.own_avatar_present = true;

    fs::create_directories(out_ / "mnt/sdcard/WhatsApp/Media");
    std::vector<MediaFile> media;
    for (const auto& [rel, bytes] : media_files_) {
      write_file(out_ / rel, bytes);
      media.push_back({rel, bytes.size(), to_hex(sha256(bytes))});
    }
    std::sort(media.begin(), media.end(),
              [](const MediaFile& x, const MediaFile& y) { return fs::path(x.path) < fs::path(y.path); });
    b.media_inventory = std::move(media);

    for (const char* dir : {"data/data/com.whatsapp/files/Avatars/", "mnt/sdcard/WhatsApp/ProfilePictures/"}) {
      fs::create_directories(out_ / dir);
      for (const auto& jid : avatars_) {  // std::set: sorted, and ".j" keeps that order
        const std::string rel = std::string(dir) + jid + ".j";
        write_file(out_ / rel, as_bytes("placeholder avatar of " + jid));
        b.avatar_inventory.push_back({parse_jid(jid), rel});
      }
    }

    build_truth();
  }

  void build_truth() {
    const std::string owner = owner_->jid.raw;
    for (const auto& s : records_) {
      if (!s.live && !s.in_snapshot) continue;
      truth_.histories[s.rec.key_remote_jid.raw].push_back(
          {s.rec.id, s.rec.key_id.raw, s.rec.from_me ? Direction::Outgoing : Direction::Incoming,
           s.rec.from_me ? s.rec.timestamp : *s.rec.received_timestamp, !s.live});
      if (s.live) truth_.partners[s.rec.id] = s.partners;
    }

    for (const auto& [alias, g] : groups_) {
      TruthGroup tg;
      tg.group_id = g.gid.raw;
      tg.name = g.name;
      for (const auto& e : g.events) {
        bool live = false;
        for (const auto& s : records_)
          if (s.rec.id == e.control_id) live = s.live;
        tg.events.push_back({e.time, e.kind, e.member, !live});
      }
      truth_.groups.push_back(std::move(tg));
    }
    std::sort(truth_.groups.begin(), truth_.groups.end(),
              [](const TruthGroup& x, const TruthGroup& y) { return x.group_id < y.group_id; });

    for (const auto& [key, k] : keys_) {
      if (!k.deleted_at) continue;
      TruthDeletedMessage d;
      d.key = key;
      d.deleted_at = k.deleted_at;
      if (!k.control) {
        d.exchanged_at = k.created;
        d.direction = k.from_me ? Direction::Outgoing : Direction::Incoming;
        d.partners = k.log_jids;
        d.last_state = k.device_ack   ? StateCode::DeliveredToDevice
                       : k.server_ack ? StateCode::OnServer
                       : k.from_me    ? StateCode::PendingLocal
                                      : StateCode::ReceivedIncoming;
      } else {
        bool saved = false;
        for (const auto& s : records_)
          if (s.rec.key_id.raw == key && s.in_snapshot) saved = true;
        if (saved) {
          d.exchanged_at = k.created;
          d.direction = k.from_me ? Direction::Outgoing : Direction::Incoming;
          d.partners = {k.remote};
          d.last_state = StateCode::Control;
        }
      }
      std::sort(d.partners.begin(), d.partners.end());
      d.partners.erase(std::unique(d.partners.begin(), d.partners.end()), d.partners.end());
      truth_.deleted_messages.push_back(std::move(d));
    }

    std::set<std::string> live_contacts;
    for (const auto& c : contacts_) live_contacts.insert(c.jid.raw);
    for (const auto& [jid, first] : first_added_) {
      truth_.additions.push_back({jid, *first});
      if (!live_contacts.contains(jid)) truth_.deleted_contacts.push_back({jid, first});
    }
    (void)owner;
  }

  const ScenarioScript& s_;
  fs::path out_;
  std::mt19937_64 rng_;
  int line_ = 0;
  ScenarioTruth truth_;

  std::map<std::string, ForgeActor> actors_;
  ForgeActor* owner_ = nullptr;
  std::set<std::int64_t> sessions_;
  std::map<std::string, ForgeGroup> groups_;
  std::map<std::string, std::string> refs_;
  std::map<std::string, std::vector<ForgeActor*>> broadcast_recipients_;

  std::vector<Stored> records_;
  std::map<std::string, KeyInfo> keys_;
  std::int64_t next_message_id_ = 1;
  std::map<std::string, std::int64_t> chat_ids_;
  std::int64_t next_chat_id_ = 1;
  std::vector<ChatListRecord> chat_list_;

  std::vector<ContactRecord> contacts_;
  std::int64_t next_contact_id_ = 1;
  std::map<std::string, std::optional<EpochMillis>> first_added_;
  std::set<std::string> avatars_;

  std::vector<PendingLine> lines_;
  std::map<std::string, Bytes> media_files_;
  std::map<std::string, int> media_counter_;
  std::map<std::string, int> snapshot_counter_;
  std::vector<BackupSet> backups_;
  std::optional<Bytes> last_snapshot_;
};

}  // namespace

ScenarioTruth generate_bundle(const ScenarioScript& script, const fs::path& out_dir) {
  return Forge(script, out_dir).run();
}

}  // namespace wafx

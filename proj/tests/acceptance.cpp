// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "support.hpp"
#include "wafx/backup_crypto.hpp"
#include "wafx/cli.hpp"
#include "wafx/codec.hpp"
#include "wafx/db_reader.hpp"
#include "wafx/error.hpp"
#include "wafx/identifiers.hpp"
#include "wafx/report.hpp"

using namespace wafx;
using namespace wafx::test;
using Clock = std::chrono::steady_clock;

namespace {

// Collects failure details for the criterion being run.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 20) failures.push_back(what);
  }
};

template <class A, class B>
void expect_eq(Check& c, const A& got, const B& want, const std::string& what) {
  if (got == want) return;
  std::ostringstream s;
  s << what << ": got " << got << ", want " << want;
  c.expect(false, s.str());
}

// ---------------------------------------------------------------- 1

void code_book(Check& c) {
  const WaJid peer = user_jid("39348000000");
  for (int from_me = 0; from_me <= 1; ++from_me)
    for (std::int64_t status = -2; status <= 20; ++status) {
      MessageRecord m;
      m.key_remote_jid = peer;
      m.key_id = parse_message_key("1363253484-1");
      m.from_me = from_me;
      m.status_code = status;
      m.timestamp = EpochMillis{1381932937884};
      if (!from_me) m.received_timestamp = m.timestamp;
      StateCode want = StateCode::Unknown;
      if (status == 6)
        want = StateCode::Control;
      else if (from_me && status == 0)
        want = StateCode::PendingLocal;
      else if (from_me && status == 4)
        want = StateCode::OnServer;
      else if (from_me && status == 5)
        want = StateCode::DeliveredToDevice;
      else if (!from_me && status == 0)
        want = StateCode::ReceivedIncoming;
      const auto got = message_state(m);
      expect_eq(c, to_string(got.code), to_string(want),
                "(" + std::to_string(from_me) + "," + std::to_string(status) + ")");
      c.expect(got.raw_status == status, "raw status kept");
    }
}

// ---------------------------------------------------------------- 2

const HistoryEntry* entry(const Analysis& a, const std::string& jid, std::size_t i) {
  auto it = a.conversations.find(jid);
  if (it == a.conversations.end() || i >= it->second.size()) return nullptr;
  return &it->second[i];
}

std::string text_of(const HistoryEntry& e) {
  auto* t = std::get_if<TextContent>(&e.content);
  return t ? t->text : "<non-text>";
}

void reference_scenarios(Check& c) {
  const ReportOptions ro{UtcOffset{}};
  {
    auto f = forge_scenario("chat_history");
    const auto a = analyze(f->bundle);
    const std::string jid = "39348xxxxxxx@s.whatsapp.net";
    const std::vector<std::tuple<Direction, std::string, std::int64_t>> want = {
        {Direction::Incoming, "Message 1", 1329116349000},
        {Direction::Outgoing, "Reply 1", 1329116423000},
        {Direction::Incoming, "Message 2", 1329116530000},
        {Direction::Outgoing, "Reply 2", 1329116621000}};
    expect_eq(c, a.conversations.size(), std::size_t{1}, "chat history conversations");
    for (std::size_t i = 0; i < want.size(); ++i) {
      const auto* e = entry(a, jid, i);
      c.expect(e != nullptr, "chat history entry " + std::to_string(i));
      if (!e) continue;
      c.expect(e->direction == std::get<0>(want[i]), "chat history direction " + std::to_string(i));
      expect_eq(c, text_of(*e), std::get<1>(want[i]), "chat history text");
      expect_eq(c, e->effective_time.value, std::get<2>(want[i]), "chat history time");
    }
    const auto doc = build_report(f->bundle, a, ro);
    expect_eq(c, doc["conversations"][0]["messages"][0]["time"]["local"].get<std::string>(),
              "2012-02-13 06:59:09.000+00:00", "chat history rendered receipt time");
    expect_eq(c, doc["conversations"][0]["messages"][1]["time"]["local"].get<std::string>(),
              "2012-02-13 07:00:23.000+00:00", "chat history rendered reply time");
  }
  {
    auto f = forge_scenario("delivery_states");
    const auto a = analyze(f->bundle);
    const auto* e = entry(a, "39348xxxxxxx@s.whatsapp.net", 0);
    c.expect(e != nullptr, "delivery message present");
    if (e) {
      expect_eq(c, to_string(e->state.code), "DeliveredToDevice", "delivery state");
      expect_eq(c, e->state.sent_at.value_or(EpochMillis{}).value, 1381932937884, "delivery sent");
      expect_eq(c, e->state.server_ack_at.value_or(EpochMillis{}).value, 1381933025551, "delivery server ack");
      expect_eq(c, e->state.device_ack_at.value_or(EpochMillis{}).value, 1381933319135, "delivery device ack");
    }
    const auto doc = build_report(f->bundle, a, ro);
    const auto& st = doc["conversations"][0]["messages"][0]["state"];
    expect_eq(c, st["sent_at"]["local"].get<std::string>(), "2013-10-16 14:15:37.884+00:00", "delivery sent text");
    expect_eq(c, st["server_ack_at"]["local"].get<std::string>(), "2013-10-16 14:17:05.551+00:00",
              "delivery server text");
    expect_eq(c, st["device_ack_at"]["local"].get<std::string>(), "2013-10-16 14:21:59.135+00:00",
              "delivery device text");
  }
  {
    auto f = forge_scenario("broadcast_sender");
    const auto a = analyze(f->bundle);
    const std::vector<std::string> dest = {"39320xxxxxxx@s.whatsapp.net", "39333xxxxxxx@s.whatsapp.net",
                                           "39335xxxxxxx@s.whatsapp.net"};
    expect_eq(c, f->bundle.messages.size(), std::size_t{4}, "broadcast sender records");
    std::set<std::string> remotes;
    for (const auto& m : f->bundle.messages) {
      remotes.insert(m.key_remote_jid.raw);
      expect_eq(c, m.key_id.raw, f->bundle.messages[0].key_id.raw, "broadcast shared key");
      expect_eq(c, m.needs_push, 2, "broadcast needs_push");
      expect_eq(c, m.recipient_count.value_or(-1), 3, "broadcast recipient_count");
      const auto p = a.partners.by_message.at(m.id);
      expect_eq(c, to_string(p.kind), "BroadcastSent", "broadcast kind");
      std::vector<std::string> got;
      for (const auto& j : p.partners) got.push_back(j.raw);
      c.expect(got == dest, "broadcast partners of record " + std::to_string(m.id));
    }
    c.expect(remotes == std::set<std::string>{"broadcast", dest[0], dest[1], dest[2]}, "broadcast record jids");
    expect_eq(c, a.partners.broadcasts.size(), std::size_t{1}, "broadcast broadcast groups");
    if (!a.partners.broadcasts.empty()) c.expect(!a.partners.broadcasts[0].count_mismatch, "broadcast count matches");

    auto r = forge_scenario("broadcast_recipient");
    const auto ra = analyze(r->bundle);
    expect_eq(c, r->bundle.messages.size(), std::size_t{1}, "broadcast recipient records");
    if (r->bundle.messages.size() == 1) {
      const auto& m = r->bundle.messages[0];
      c.expect(m.key_id.raw.rfind("%~", 0) == 0 && m.key_id.broadcast_received, "broadcast recipient key prefix");
      const auto p = ra.partners.by_message.at(m.id);
      expect_eq(c, to_string(p.kind), "BroadcastReceived", "broadcast recipient kind");
      c.expect(p.partners.size() == 1 && p.partners[0].raw == "39331xxxxxxx@s.whatsapp.net", "broadcast recipient partner");
    }
  }
  {
    auto f = forge_scenario("group_membership");
    const auto a = analyze(f->bundle);
    expect_eq(c, a.timelines.groups.size(), std::size_t{1}, "group groups");
    if (a.timelines.groups.size() == 1) {
      const auto& g = a.timelines.groups[0];
      expect_eq(c, g.group_id.raw, "39320xxxxxxx-1384187045@g.us", "group group id");
      expect_eq(c, g.group_name.value_or(""), "wa test group", "group name");
      const std::vector<std::tuple<GroupEventKind, std::string, std::int64_t>> want = {
          {GroupEventKind::Created, "39320xxxxxxx@s.whatsapp.net", 1384187045000},
          {GroupEventKind::Joined, "39335xxxxxxx@s.whatsapp.net", 1384187046000},
          {GroupEventKind::Joined, "39333xxxxxxx@s.whatsapp.net", 1384252848000},
          {GroupEventKind::Left, "39333xxxxxxx@s.whatsapp.net", 1384467096000},
          {GroupEventKind::Left, "39335xxxxxxx@s.whatsapp.net", 1384508994000}};
      expect_eq(c, g.events.size(), want.size(), "group events");
      for (std::size_t i = 0; i < std::min(want.size(), g.events.size()); ++i) {
        const auto& e = g.events[i];
        c.expect(e.kind == std::get<0>(want[i]), "group kind " + std::to_string(i));
        expect_eq(c, e.member ? e.member->raw : "", std::get<1>(want[i]), "group member");
        expect_eq(c, e.time.value, std::get<2>(want[i]), "group time");
        c.expect(!e.log_sourced, "group event from the database");
      }
      c.expect(g.members_at(EpochMillis{1384300000000}).size() == 3, "group three members on Nov 12");
      c.expect(g.members_at(EpochMillis{1384500000000}) ==
                   std::set<std::string>{"39320xxxxxxx@s.whatsapp.net", "39335xxxxxxx@s.whatsapp.net"},
               "group members after F leaves");
    }
    const auto doc = build_report(f->bundle, a, ReportOptions{UtcOffset::parse("+01:00")});
    const auto& ev = doc["group_timelines"][0]["events"];
    expect_eq(c, ev.size(), std::size_t{5}, "group report events");
    if (ev.size() == 5) {
      expect_eq(c, ev[0]["time"]["utc"].get<std::string>(), "2013-11-11T16:24:05.000Z", "group create utc");
      expect_eq(c, ev[3]["time"]["utc"].get<std::string>(), "2013-11-14T22:11:36.000Z", "group F leaves utc");
      expect_eq(c, ev[4]["time"]["utc"].get<std::string>(), "2013-11-15T09:49:54.000Z", "group E leaves utc");
      expect_eq(c, ev[4]["time"]["local"].get<std::string>(), "2013-11-15 10:49:54.000+01:00", "group E leaves local");
    }
  }
}

// ---------------------------------------------------------------- 3

void oracle_equivalence(Check& c) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto f = forge_script(random_scenario(seed, 200));
    for (const auto& d : compare_truth(f->truth, observe(f->bundle)))
      c.expect(false, "seed " + std::to_string(seed) + ": " + d);
  }
}

// ---------------------------------------------------------------- 4

void block_exhaustion(Check& c, std::size_t& scripts, std::size_t& unknowns) {
  const std::vector<WaJid> jids = {user_jid("39320000001"), user_jid("39320000002"), user_jid("39320000003")};
  std::vector<BlockOp> ops;
  std::function<void()> rec = [&] {
    ++scripts;
    BlockEvents ev;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const EpochMillis at{1367402400000 + static_cast<std::int64_t>(i) * 60000};
      if (ops[i].contact >= 0)
        ev.blocks.push_back({jids[static_cast<std::size_t>(ops[i].contact)], at, i, "whatsapp.log",
                             static_cast<std::int64_t>(i + 1)});
      else
        ev.unblocks.push_back({at, i, "whatsapp.log", static_cast<std::int64_t>(i + 1)});
    }
    std::map<std::string, BlockState> got;
    for (const auto& s : infer_block_status(ev)) got[s.jid.raw] = s.state;
    for (int x = 0; x < 3; ++x) {
      const auto want = oracle_block_status(ops, ops.size(), x);
      auto it = got.find(jids[static_cast<std::size_t>(x)].raw);
      std::string script;
      for (const auto& o : ops) script += o.contact < 0 ? "U " : "B" + std::to_string(o.contact) + " ";
      if (want == OracleBlock::NeverBlocked) {
        c.expect(it == got.end(), script + ": contact " + std::to_string(x) + " reported but never blocked");
        continue;
      }
      if (want == OracleBlock::Unknown) ++unknowns;
      const BlockState ws = want == OracleBlock::Blocked     ? BlockState::Blocked
                            : want == OracleBlock::Unblocked ? BlockState::Unblocked
                                                             : BlockState::Unknown;
      c.expect(it != got.end() && it->second == ws,
               script + ": contact " + std::to_string(x) + " want " + std::string(to_string(ws)));
    }
    if (ops.size() == 6) return;
    for (int op = -1; op < 3; ++op) {
      ops.push_back({op});
      rec();
      ops.pop_back();
    }
  };
  rec();
}

// ---------------------------------------------------------------- 5

void crypto_round_trip(Check& c) {
  std::mt19937_64 rng(20131016);
  const std::string magic("SQLite format 3\0", 16);
  for (int i = 0; i < 1000; ++i) {
    BackupKey key = BackupKey::default_key();
    if (i % 2) for (auto& b : key.bytes) b = static_cast<std::uint8_t>(rng());
    // The decryptor accepts only plaintexts carrying the SQLite magic.
    Bytes p(magic.begin(), magic.end());
    const std::size_t blocks = rng() % 64;
    for (std::size_t k = 0; k < blocks * kAesBlock; ++k) p.push_back(static_cast<std::uint8_t>(rng()));
    const Bytes ct = encrypt_fixture(p, key);
    c.expect(ct.size() == p.size(), "ciphertext length");
    c.expect(decrypt_bytes(ct, key) == p, "round trip " + std::to_string(i));
  }

  const std::string head = "wafx-scenario 1\nowner 39331000000\nactor A 39348000000\n";
  auto f = forge_script(parse_scenario(head +
                                       "2013-03-14 09:37:44 text from=me to=A body=hello ref=m\n"
                                       "2013-03-14 09:40:00 text from=A to=me body=hi\n"
                                       "2013-03-14 10:00:00 snapshot-backup\n"));
  const auto crypt = f->dir / "mnt/sdcard/WhatsApp/Databases/msgstore.db.crypt";
  const Bytes plain = decrypt_backup(crypt);
  std::vector<Warning> warnings;
  const auto src = DbSource::from_image("msgstore.db.crypt", plain, DbKind::ChatStore);
  const auto msgs = load_messages(src, warnings);
  const auto chats = load_chat_list(src, warnings);
  check_chat_list_consistency(chats, msgs, "msgstore.db.crypt", warnings);
  expect_eq(c, msgs.size(), std::size_t{2}, "forged backup messages");
  expect_eq(c, warnings.size(), std::size_t{0}, "forged backup warnings");
  c.expect(msgs == f->truth.bundle.backups.back().messages, "forged backup equals ground truth");

  const Bytes ct = read_file(crypt);
  for (int i = 0; i < 100; ++i) {
    BackupKey wrong = BackupKey::default_key();
    wrong.bytes[static_cast<std::size_t>(rng() % 24)] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    if (i >= 50) for (auto& b : wrong.bytes) b = static_cast<std::uint8_t>(rng());
    bool mismatch = false;
    try {
      decrypt_bytes(ct, wrong);
    } catch (const Error& e) {
      mismatch = e.code() == ErrorCode::MagicMismatch;
    }
    c.expect(mismatch, "wrong key " + std::to_string(i) + " must raise MagicMismatch");
  }
}

// ---------------------------------------------------------------- 6

void media_correlation(Check& c) {
  const std::string media = "text=\"one shared photo\" server-name=a6e0c3b19f1e2d4c.jpg kind=image";
  auto sender = forge_script(parse_scenario(
      "wafx-scenario 1\nowner 39331000000 session=1381900000\nactor R 39348000000\n"
      "2013-10-16 14:15:37 media from=me to=R " + media + " ref=m\n"));
  auto recipient = forge_script(parse_scenario(
      "wafx-scenario 1\nowner 39348000000\nactor S 39331000000 session=1381900000\n"
      "2013-10-16 14:15:39 media from=S to=me " + media + " ref=m\n"));

  auto full = correlate_media(sender->bundle.messages, recipient->bundle.messages, recipient->bundle.media_inventory);
  std::size_t n_full = 0, n_pairs = 0;
  for (const auto& m : full)
    if (m.match != MediaMatch::FileIdentified) {
      ++n_pairs;
      if (m.match == MediaMatch::Full) ++n_full;
      expect_eq(c, m.server_filename, "a6e0c3b19f1e2d4c.jpg", "server filename");
    }
  expect_eq(c, n_pairs, std::size_t{1}, "correlated pairs");
  expect_eq(c, n_full, std::size_t{1}, "full matches");

  const auto analysed = analyze(recipient->bundle, AnalysisOptions{std::nullopt, &sender->bundle});
  std::size_t full_findings = 0;
  for (const auto& f : analysed.findings)
    if (f.category == FindingCategory::MediaCorrelation && f.payload["match"] == "Full") ++full_findings;
  expect_eq(c, full_findings, std::size_t{1}, "full-confidence findings");

  c.expect(recipient->bundle.media_inventory.size() == 1, "recipient holds one media file");
  if (recipient->bundle.media_inventory.empty()) return;
  const auto file = recipient->dir / recipient->bundle.media_inventory[0].path;
  Bytes bytes = read_file(file);
  bytes[bytes.size() / 2] ^= 0x01;
  write_file(file, bytes);
  const auto reloaded = load_bundle(recipient->dir.path());
  auto demoted = correlate_media(sender->bundle.messages, reloaded.messages, reloaded.media_inventory);
  std::size_t n_name = 0;
  n_pairs = 0;
  for (const auto& m : demoted)
    if (m.match != MediaMatch::FileIdentified) {
      ++n_pairs;
      if (m.match == MediaMatch::NameOnly) ++n_name;
    }
  expect_eq(c, n_pairs, std::size_t{1}, "pairs after perturbation");
  expect_eq(c, n_name, std::size_t{1}, "NameOnly after perturbation");
}

// ---------------------------------------------------------------- 7

void identifiers(Check& c) {
  std::mt19937_64 rng(7);
  auto digits = [&](std::size_t lo, std::size_t hi) {
    std::string s(1, static_cast<char>('1' + rng() % 9));
    const std::size_t n = lo + rng() % (hi - lo + 1);
    while (s.size() < n) s += static_cast<char>('0' + rng() % 10);
    return s;
  };
  for (int i = 0; i < 10000; ++i) {
    const std::string phone = digits(6, 15);
    const std::string jid_text = phone + std::string(kUserSuffix);
    const auto jid = parse_jid(jid_text);
    c.expect(jid.kind == JidKind::User && jid.phone_number == phone && reassemble(jid) == jid_text &&
                 user_jid(phone).raw == jid_text,
             "jid " + jid_text);

    const std::int64_t created = static_cast<std::int64_t>(rng() % 4102444800ULL);
    const std::string gid_text = phone + "-" + std::to_string(created) + std::string(kGroupSuffix);
    const auto gid = parse_group_id(gid_text);
    c.expect(gid.creator.phone_number == phone && gid.creation_time.value == created && reassemble(gid) == gid_text,
             "group id " + gid_text);
    const auto gjid = parse_jid(gid_text);
    c.expect(gjid.kind == JidKind::Group && reassemble(gjid) == gid_text, "group jid " + gid_text);

    const bool bc = rng() % 2;
    const std::int64_t session = static_cast<std::int64_t>(rng() % 4102444800ULL);
    const std::int64_t seq = static_cast<std::int64_t>(rng() % 100000);
    const std::string key_text = (bc ? std::string(kBroadcastKeyPrefix) : "") + std::to_string(session) + "-" +
                                 std::to_string(seq);
    const auto key = parse_message_key(key_text);
    c.expect(key.session_start == session && key.sequence == seq && key.broadcast_received == bc &&
                 reassemble(key) == key_text,
             "key " + key_text);
  }
}

// ---------------------------------------------------------------- 8

void read_only(Check& c) {
  auto script = random_scenario(8, 200);
  script.timeline.push_back({EpochMillis{script.timeline.back().at.value + 1000}, "snapshot-backup", {}, 0});
  auto f = forge_script(script);
  const auto before = evidence_fingerprint(f->dir.path());
  c.expect(!before.empty(), "evidence files present");
  TempDir out;
  std::ostringstream o, e;
  const std::string in = f->dir.path().string();
  const std::vector<std::vector<std::string>> runs = {
      {"wafx", "report", "--in", in, "--out", (out / "r.json").string(), "--verify-readonly"},
      {"wafx", "report", "--in", in, "--format", "csv", "--out", (out / "r.csv").string()},
      {"wafx", "ingest", "--in", in},
      {"wafx", "timeline", "--in", in},
      {"wafx", "diff", "--in", in}};
  for (const auto& args : runs) {
    const int rc = run(args, o, e);
    c.expect(rc == kExitOk || rc == kExitWarnings, args[1] + " exit " + std::to_string(rc) + ": " + e.str());
  }
  const auto after = evidence_fingerprint(f->dir.path());
  c.expect(before == after, "evidence fingerprint changed");
  std::size_t differing = 0;
  for (const auto& [k, v] : before) {
    auto it = after.find(k);
    if (it == after.end() || it->second != v) ++differing;
  }
  expect_eq(c, differing, std::size_t{0}, "files changed");
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const std::string& name, const std::function<std::string(Check&)>& body) {
    Check c;
    const auto t0 = Clock::now();
    std::string note;
    try {
      note = body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
    const bool ok = c.failures.empty();
    if (!ok) ++failed;
    std::cout << (ok ? "PASS" : "FAIL") << "  " << n << ". " << name << " (" << note << (note.empty() ? "" : ", ")
              << ms << " ms)\n";
    for (const auto& f : c.failures) std::cout << "      " << f << "\n";
    std::cout.flush();
  };

  report(1, "code-book fidelity", [](Check& c) {
    const auto t0 = Clock::now();
    code_book(c);
    c.expect(Clock::now() - t0 < std::chrono::seconds(1), "slower than 1 s");
    return std::string("46 (from_me, status) pairs");
  });
  report(2, "reference-scenario replay", [](Check& c) {
    const auto t0 = Clock::now();
    reference_scenarios(c);
    c.expect(Clock::now() - t0 < std::chrono::seconds(5), "slower than 5 s");
    return std::string("chat history, delivery states, broadcast, group timeline");
  });
  report(3, "oracle equivalence", [](Check& c) {
    const auto t0 = Clock::now();
    oracle_equivalence(c);
    c.expect(Clock::now() - t0 < std::chrono::seconds(60), "slower than 60 s");
    return std::string("100 random scripts of up to 200 actions");
  });
  report(4, "block-status exhaustion", [](Check& c) {
    std::size_t scripts = 0, unknowns = 0;
    block_exhaustion(c, scripts, unknowns);
    c.expect(unknowns > 0, "no Unknown outcome exercised");
    return std::to_string(scripts) + " scripts, " + std::to_string(unknowns) + " Unknown outcomes";
  });
  report(5, "crypto round-trip", [](Check& c) {
    crypto_round_trip(c);
    return std::string("1000 round trips, forged backup, 100 wrong keys");
  });
  report(6, "media correlation", [](Check& c) {
    media_correlation(c);
    return std::string("Full, then NameOnly after one flipped byte");
  });
  report(7, "identifier round-trips", [](Check& c) {
    identifiers(c);
    return std::string("10000 jids, group ids and keys");
  });
  report(8, "read-only soundness", [](Check& c) {
    read_only(c);
    return std::string("report, csv, ingest, timeline, diff");
  });
  std::cout << (failed ? "FAILED " + std::to_string(failed) + " of 8" : std::string("ALL 8 PASSED")) << "\n";
  return failed ? 1 : 0;
}

#include "wafx/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "wafx/backup_crypto.hpp"
#include "wafx/codec.hpp"
#include "wafx/correlator.hpp"
#include "wafx/error.hpp"
#include "wafx/forge.hpp"
#include "wafx/report.hpp"

namespace wafx {

namespace fs = std::filesystem;
using nlohmann::json;

std::map<std::string, std::string> evidence_fingerprint(const fs::path& root, const EvidenceLayout& layout) {
  std::map<std::string, std::string> out;
  for (const auto& rel : evidence_files(root, layout)) {
    const auto p = root / rel;
    const auto mtime = fs::last_write_time(p).time_since_epoch().count();
    out[rel] = to_hex(sha256_file(p)) + " " + std::to_string(mtime);
  }
  return out;
}

namespace {

struct Common {
  std::string in;
  std::string out;
  std::string tz = "+00:00";
  std::string grammar;
  std::string key;
};

IngestOptions ingest_options(const Common& c) {
  IngestOptions o;
  if (!c.grammar.empty()) o.grammar = LogGrammar::from_file(c.grammar);
  if (!c.key.empty()) o.key = BackupKey::from_hex(c.key);
  return o;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  write_file(path, as_bytes(text));
}

json warnings_json(const std::vector<Warning>& ws) {
  json a = json::array();
  for (const auto& w : ws) a.push_back({{"source", w.source}, {"message", w.message}});
  return a;
}

json record_json(const MessageRecord& m) {
  return {{"_id", m.id},
          {"key_remote_jid", m.key_remote_jid.raw},
          {"key_from_me", m.from_me},
          {"key_id", m.key_id.raw},
          {"status", m.status_code},
          {"timestamp", m.timestamp.value},
          {"content", content_json(extract_content(m).content)}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"wafx: forensic analysis of WhatsApp artifacts from Android devices"};
  app.require_subcommand(1);

  Common c;
  auto add_in = [&](CLI::App* s, const char* what) { s->add_option("--in", c.in, what)->required(); };
  auto add_ingest = [&](CLI::App* s) {
    s->add_option("--grammar", c.grammar, "log grammar file (JSON)")->check(CLI::ExistingFile);
    s->add_option("--key", c.key, "backup key, 48 hex digits");
  };

  auto* ingest = app.add_subcommand("ingest", "parse an evidence tree and print its inventory");
  add_in(ingest, "evidence root directory");
  add_ingest(ingest);
  ingest->add_option("--out", c.out, "write JSON here instead of stdout");
  ingest->add_option("--tz", c.tz, "display offset, e.g. +01:00");

  std::optional<std::string> sim;
  std::string format = "json";
  std::string peer;
  bool verify_readonly = false;
  auto* report = app.add_subcommand("report", "analyse an evidence tree and write the report");
  add_in(report, "evidence root directory");
  add_ingest(report);
  report->add_option("--out", c.out, "write the report here instead of stdout");
  report->add_option("--tz", c.tz, "display offset, e.g. +01:00");
  report->add_option("--sim", sim, "phone number read from the SIM card");
  report->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  report->add_option("--peer", peer, "evidence root of the other party's device")->check(CLI::ExistingDirectory);
  report->add_flag("--verify-readonly", verify_readonly, "fail if any evidence file changes during the run");

  auto* timeline = app.add_subcommand("timeline", "print conversations and group timelines");
  add_in(timeline, "evidence root directory");
  add_ingest(timeline);
  timeline->add_option("--out", c.out, "write here instead of stdout");
  timeline->add_option("--tz", c.tz, "display offset, e.g. +01:00");
  timeline->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* decrypt = app.add_subcommand("decrypt", "decrypt a .crypt backup into a SQLite file");
  add_in(decrypt, ".crypt file");
  decrypt->add_option("--out", c.out, "plaintext database path")->required();
  decrypt->add_option("--key", c.key, "backup key, 48 hex digits");

  auto* diff = app.add_subcommand("diff", "list backup records absent from the live database");
  add_in(diff, "evidence root directory");
  add_ingest(diff);
  diff->add_option("--out", c.out, "write JSON here instead of stdout");

  std::string script;
  std::optional<std::uint64_t> random_seed;
  std::size_t max_actions = 200;
  std::string save_script;
  auto* forge = app.add_subcommand("forge", "generate a synthetic evidence tree from a scenario script");
  auto* script_opt = forge->add_option("--script", script, "scenario script")->check(CLI::ExistingFile);
  auto* random_opt = forge->add_option("--random", random_seed, "generate a random script from this seed");
  script_opt->excludes(random_opt);
  forge->add_option("--max-actions", max_actions, "upper bound on random script length");
  forge->add_option("--out", c.out, "output evidence root")->required();
  forge->add_option("--save-script", save_script, "write the script that was used");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const UtcOffset tz = UtcOffset::parse(c.tz);

    if (*ingest) {
      const auto bundle = load_bundle(c.in, ingest_options(c));
      json doc = bundle_summary(bundle, tz);
      doc["warnings"] = warnings_json(bundle.warnings);
      emit(render_json(doc), c.out, out);
      return bundle.warnings.empty() ? kExitOk : kExitWarnings;
    }

    if (*report || *timeline) {
      const auto options = ingest_options(c);
      std::map<std::string, std::string> before;
      if (verify_readonly) before = evidence_fingerprint(c.in, options.layout);
      const auto bundle = load_bundle(c.in, options);
      std::optional<CaseBundle> peer_bundle;
      if (!peer.empty()) peer_bundle = load_bundle(peer, options);
      AnalysisOptions ao;
      ao.sim_number = sim;
      ao.peer = peer_bundle ? &*peer_bundle : nullptr;
      const auto analysis = analyze(bundle, ao);
      const ReportOptions ro{tz};
      if (format == "csv")
        emit(timeline_csv(analysis, ro), c.out, out);
      else if (*report)
        emit(render_json(build_report(bundle, analysis, ro)), c.out, out);
      else
        emit(render_json(build_timeline(analysis, ro)), c.out, out);
      if (verify_readonly && evidence_fingerprint(c.in, options.layout) != before) {
        err << "wafx: evidence files changed during the run\n";
        return kExitStructural;
      }
      for (const auto& w : analysis.warnings) err << "warning: " << w.source << ": " << w.message << "\n";
      return analysis.warnings.empty() ? kExitOk : kExitWarnings;
    }

    if (*decrypt) {
      const BackupKey key = c.key.empty() ? BackupKey::default_key() : BackupKey::from_hex(c.key);
      const Bytes plain = decrypt_backup(c.in, key);
      write_file(c.out, plain);
      return kExitOk;
    }

    if (*diff) {
      const auto bundle = load_bundle(c.in, ingest_options(c));
      json doc = json::array();
      for (const auto& b : bundle.backups) {
        json recs = json::array();
        for (const auto& m : backup_diff(bundle.messages, b.messages)) recs.push_back(record_json(m));
        doc.push_back({{"backup", b.path}, {"records", recs}});
      }
      emit(render_json(doc), c.out, out);
      return bundle.warnings.empty() ? kExitOk : kExitWarnings;
    }

    if (*forge) {
      if (script.empty() && !random_seed) {
        err << "wafx forge: one of --script or --random is required\n";
        return kExitUsage;
      }
      const ScenarioScript s = script.empty() ? random_scenario(*random_seed, max_actions) : load_scenario(script);
      if (!save_script.empty()) write_file(save_script, as_bytes(format_scenario(s)));
      const auto truth = generate_bundle(s, c.out);
      out << "wrote " << c.out << ": " << truth.bundle.messages.size() << " messages, "
          << truth.bundle.contacts.size() << " contacts, " << truth.bundle.log_events.size() << " log lines, "
          << truth.bundle.backups.size() << " backups\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "wafx: " << e.what() << "\n";
    return e.code() == ErrorCode::BadKey ? kExitUsage : kExitStructural;
  } catch (const std::exception& e) {
    err << "wafx: " << e.what() << "\n";
    return kExitStructural;
  }
  return kExitUsage;
}

}  // namespace wafx

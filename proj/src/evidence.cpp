#include "wafx/evidence.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "wafx/codec.hpp"
#include "wafx/db_reader.hpp"
#include "wafx/error.hpp"
#include "wafx/identifiers.hpp"

namespace fs = std::filesystem;

namespace wafx {
namespace {

std::vector<fs::path> list_files(const fs::path& dir, bool recursive) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  if (recursive) {
    for (const auto& e : fs::recursive_directory_iterator(dir, ec))
      if (e.is_regular_file()) out.push_back(e.path());
  } else {
    for (const auto& e : fs::directory_iterator(dir, ec))
      if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string rel(const fs::path& p, const fs::path& root) { return p.lexically_relative(root).generic_string(); }

bool starts_with(const std::string& s, std::string_view p) { return s.rfind(p, 0) == 0; }
bool ends_with(const std::string& s, std::string_view p) {
  return s.size() >= p.size() && s.compare(s.size() - p.size(), p.size(), p) == 0;
}

}  // namespace

bool is_backup_file_name(const std::string& name) {
  return starts_with(name, "msgstore") && (ends_with(name, ".crypt") || name.find(".crypt") != std::string::npos);
}

bool is_log_file_name(const std::string& name) {
  return name == "whatsapp.log" || (starts_with(name, "whatsapp-") && ends_with(name, ".log"));
}

std::vector<std::string> evidence_files(const fs::path& root, const EvidenceLayout& layout) {
  std::vector<std::string> out;
  for (const auto& f : {layout.contacts_db, layout.chat_db})
    if (fs::is_regular_file(root / f)) out.push_back(fs::path(f).generic_string());
  for (const auto& p : list_files(root / layout.backup_dir, false))
    if (is_backup_file_name(p.filename().string())) out.push_back(rel(p, root));
  for (const auto& p : list_files(root / layout.log_dir, false))
    if (is_log_file_name(p.filename().string())) out.push_back(rel(p, root));
  for (const auto& dir : {layout.avatar_dir, layout.avatar_copy_dir, layout.media_dir})
    for (const auto& p : list_files(root / dir, dir == layout.media_dir)) out.push_back(rel(p, root));
  for (const char* name : {"me", "me.jpg"})
    if (fs::is_regular_file(root / layout.settings_dir / name))
      out.push_back(rel(root / layout.settings_dir / name, root));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CaseBundle load_bundle(const fs::path& root, const IngestOptions& options) {
  const auto& layout = options.layout;
  CaseBundle bundle;
  auto& warnings = bundle.warnings;
  bool found_any = false;

  if (fs::is_regular_file(root / layout.contacts_db)) {
    found_any = true;
    bundle.has_contacts_db = true;
    auto source = DbSource::open(root / layout.contacts_db, DbKind::Contacts);
    bundle.contacts = load_contacts(source, warnings);
  } else {
    warnings.push_back({layout.contacts_db, "contacts database not found"});
  }

  if (fs::is_regular_file(root / layout.chat_db)) {
    found_any = true;
    bundle.has_chat_db = true;
    auto source = DbSource::open(root / layout.chat_db, DbKind::ChatStore);
    bundle.messages = load_messages(source, warnings);
    bundle.chat_list = load_chat_list(source, warnings);
    check_chat_list_consistency(bundle.chat_list, bundle.messages, fs::path(layout.chat_db).filename().string(),
                                warnings);
  } else {
    warnings.push_back({layout.chat_db, "chat database not found"});
  }

  for (const auto& p : list_files(root / layout.backup_dir, false)) {
    if (!is_backup_file_name(p.filename().string())) continue;
    found_any = true;
    const std::string name = rel(p, root);
    try {
      const Bytes plain = decrypt_backup(p, options.key);
      auto source = DbSource::from_image(p.filename().string(), plain, DbKind::ChatStore);
      BackupSet set;
      set.path = name;
      set.messages = load_messages(source, warnings);
      set.chat_list = load_chat_list(source, warnings);
      bundle.backups.push_back(std::move(set));
    } catch (const Error& e) {
      warnings.push_back({name, std::string("backup skipped: ") + e.what()});
    }
  }

  std::vector<std::vector<LogEvent>> streams;
  for (const auto& p : list_files(root / layout.log_dir, false)) {
    if (!is_log_file_name(p.filename().string())) continue;
    found_any = true;
    const std::string name = rel(p, root);
    bundle.log_files.push_back(name);
    streams.push_back(parse_log_file(p, options.grammar, warnings, name));
  }
  bundle.log_events = merge_log_events(std::move(streams));
  if (bundle.log_files.empty()) warnings.push_back({layout.log_dir, "no log files found"});

  const fs::path me = root / layout.settings_dir / "me";
  if (fs::is_regular_file(me)) {
    std::ifstream in(me);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string number = ss.str();
    number.erase(std::remove_if(number.begin(), number.end(), [](unsigned char c) { return std::isspace(c); }),
                 number.end());
    if (!number.empty() && number[0] == '+') number.erase(0, 1);
    if (!is_phone_number(number)) warnings.push_back({rel(me, root), "registered number is not a phone number"});
    bundle.registered_number = number;
  }
  bundle.own_avatar_present = fs::is_regular_file(root / layout.settings_dir / "me.jpg");

  for (const auto& p : list_files(root / layout.media_dir, true)) {
    MediaFile f;
    f.path = rel(p, root);
    f.size = fs::file_size(p);
    f.sha256_hex = to_hex(sha256_file(p));
    bundle.media_inventory.push_back(std::move(f));
  }

  for (const auto& dir : {layout.avatar_dir, layout.avatar_copy_dir}) {
    for (const auto& p : list_files(root / dir, false)) {
      const std::string file = p.filename().string();
      if (!ends_with(file, ".j")) continue;
      const std::string id = file.substr(0, file.size() - 2);
      AvatarFile a;
      a.path = rel(p, root);
      try {
        a.jid = parse_jid(id);
      } catch (const Error& e) {
        warnings.push_back({a.path, e.what()});
        a.jid = WaJid::unparsed(id);
      }
      bundle.avatar_inventory.push_back(std::move(a));
    }
  }

  if (!found_any) throw Error(ErrorCode::NoEvidence, "no WhatsApp databases, backups or logs under " + root.string());
  return bundle;
}

}  // namespace wafx

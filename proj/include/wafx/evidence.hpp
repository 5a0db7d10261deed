#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wafx/backup_crypto.hpp"
#include "wafx/log_parser.hpp"
#include "wafx/model.hpp"

namespace wafx {

/// Where each artifact lives, relative to the evidence root. Defaults follow
/// the Android layout of a device image extracted to a directory.
struct EvidenceLayout {
  std::string contacts_db = "data/data/com.whatsapp/databases/wa.db";
  std::string chat_db = "data/data/com.whatsapp/databases/msgstore.db";
  std::string backup_dir = "mnt/sdcard/WhatsApp/Databases";
  std::string avatar_dir = "data/data/com.whatsapp/files/Avatars";
  std::string avatar_copy_dir = "mnt/sdcard/WhatsApp/ProfilePictures";
  std::string log_dir = "data/data/com.whatsapp/files/Logs";
  std::string media_dir = "mnt/sdcard/WhatsApp/Media";
  std::string sent_media_dir = "mnt/sdcard/WhatsApp/Media/Sent";
  std::string settings_dir = "data/data/com.whatsapp/files";
};

struct IngestOptions {
  EvidenceLayout layout;
  LogGrammar grammar = LogGrammar::default_grammar();
  BackupKey key = BackupKey::default_key();
};

/// Parses every artifact found under `root`. Absent optional artifacts only
/// produce warnings; a damaged database throws (NotSqlite, MissingTable), and
/// a root with no recognisable artifact throws Error{NoEvidence}.
CaseBundle load_bundle(const std::filesystem::path& root, const IngestOptions& options = {});

/// Files under `root` the loader would read, relative to root, sorted.
std::vector<std::string> evidence_files(const std::filesystem::path& root, const EvidenceLayout& layout = {});

bool is_backup_file_name(const std::string& name);
bool is_log_file_name(const std::string& name);

}  // namespace wafx

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>

#include "wafx/model.hpp"

namespace wafx {

/// The fixed key shared by every device for headerless `.crypt` backups.
inline constexpr std::string_view kDefaultBackupKeyHex = "346a23652a46392b4d73257c67317e352e3372482177652c";

inline constexpr std::size_t kAesBlock = 16;

struct BackupKey {
  std::array<std::uint8_t, 24> bytes{};

  static BackupKey from_hex(std::string_view hex);  // throws Error{BadKey}
  static BackupKey default_key() { return from_hex(kDefaultBackupKeyHex); }
};

struct CryptBackup {
  std::filesystem::path path;
  std::size_t ciphertext_length = 0;
  std::optional<Bytes> decrypted;
};

// AES-192 in ECB mode with no padding and no header. A plaintext is accepted
// only if it starts with the SQLite magic; anything else is MagicMismatch,
// which also covers a wrong key or a different container format.
Bytes decrypt_bytes(std::span<const std::uint8_t> ciphertext, const BackupKey& key = BackupKey::default_key());
Bytes decrypt_backup(const std::filesystem::path& path, const BackupKey& key = BackupKey::default_key());

/// Inverse of decrypt_bytes for building fixtures. Input must be block aligned.
Bytes encrypt_fixture(std::span<const std::uint8_t> plaintext, const BackupKey& key = BackupKey::default_key());

}  // namespace wafx

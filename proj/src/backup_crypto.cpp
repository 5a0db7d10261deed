#include "wafx/backup_crypto.hpp"

#include <openssl/evp.h>

#include <memory>

#include "wafx/codec.hpp"
#include "wafx/error.hpp"
#include "wafx/sqlite_db.hpp"

namespace wafx {
namespace {

Bytes aes192_ecb(std::span<const std::uint8_t> in, const BackupKey& key, bool encrypt) {
  if (in.size() % kAesBlock != 0)
    throw Error(ErrorCode::BadBlockLength, std::to_string(in.size()) + " bytes is not a multiple of 16");
  Bytes out(in.size());
  if (in.empty()) return out;
  std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx ||
      EVP_CipherInit_ex(ctx.get(), EVP_aes_192_ecb(), nullptr, key.bytes.data(), nullptr, encrypt ? 1 : 0) != 1)
    throw Error(ErrorCode::BadKey, "cipher initialisation failed");
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  int produced = 0;
  if (EVP_CipherUpdate(ctx.get(), out.data(), &produced, in.data(), static_cast<int>(in.size())) != 1)
    throw Error(ErrorCode::BadKey, "cipher update failed");
  int tail = 0;
  if (EVP_CipherFinal_ex(ctx.get(), out.data() + produced, &tail) != 1)
    throw Error(ErrorCode::BadKey, "cipher final failed");
  return out;
}

}  // namespace

BackupKey BackupKey::from_hex(std::string_view hex) {
  auto raw = wafx::from_hex(hex);
  if (!raw || raw->size() != 24) throw Error(ErrorCode::BadKey, "backup key must be 48 hex digits (AES-192)");
  BackupKey key;
  std::copy(raw->begin(), raw->end(), key.bytes.begin());
  return key;
}

Bytes decrypt_bytes(std::span<const std::uint8_t> ciphertext, const BackupKey& key) {
  if (ciphertext.empty()) throw Error(ErrorCode::BadBlockLength, "empty backup");
  Bytes plain = aes192_ecb(ciphertext, key, false);
  if (!has_sqlite_magic(plain))
    throw Error(ErrorCode::MagicMismatch,
                "decrypted data lacks the SQLite header (assumed AES-192-ECB, no header, no padding; "
                "the key, the container format or the file itself differs)");
  return plain;
}

Bytes decrypt_backup(const std::filesystem::path& path, const BackupKey& key) {
  return decrypt_bytes(read_file(path), key);
}

Bytes encrypt_fixture(std::span<const std::uint8_t> plaintext, const BackupKey& key) {
  return aes192_ecb(plaintext, key, true);
}

}  // namespace wafx

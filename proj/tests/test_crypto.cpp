#include <doctest.h>

#include "support.hpp"
#include "wafx/backup_crypto.hpp"
#include "wafx/codec.hpp"
#include "wafx/error.hpp"

using namespace wafx;

namespace {

ErrorCode decrypt_error(const Bytes& ct, const BackupKey& key = BackupKey::default_key()) {
  try {
    decrypt_bytes(ct, key);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("decrypt succeeded");
  return ErrorCode::NoEvidence;
}

}  // namespace

// Expected ciphertexts come from tests/oracles/aes_oracle.py, a pure-Python
// AES written from FIPS-197 without any crypto library.
TEST_CASE("fixed backup key golden blocks") {
  const Bytes zeros(16, 0);
  CHECK(to_hex(encrypt_fixture(zeros)) == "8d1bebc51923f0f4f21a278c2a8d4d92");
  const std::string magic("SQLite format 3\0", 16);
  const auto ct = encrypt_fixture(as_bytes(magic));
  CHECK(to_hex(ct) == "49ef23aefff9750ec6cd5ca0a59f2d35");
  const Bytes plain = decrypt_bytes(ct);
  CHECK(std::string(plain.begin(), plain.end()) == magic);
}

TEST_CASE("AES-192 reference vector") {
  const auto key = BackupKey::from_hex("000102030405060708090a0b0c0d0e0f1011121314151617");
  const auto pt = *from_hex("00112233445566778899aabbccddeeff");
  CHECK(to_hex(encrypt_fixture(pt, key)) == "dda97ca4864cdfe06eaf70a0ec0d7191");
}

TEST_CASE("ECB: identical plaintext blocks give identical ciphertext blocks") {
  std::string magic("SQLite format 3\0", 16);
  const std::string p = magic + std::string(32, 'A');
  const auto ct = encrypt_fixture(as_bytes(p));
  CHECK(std::equal(ct.begin() + 16, ct.begin() + 32, ct.begin() + 32));
}

TEST_CASE("decryption failures") {
  CHECK(decrypt_error(Bytes(17, 0)) == ErrorCode::BadBlockLength);
  CHECK(decrypt_error(Bytes{}) == ErrorCode::BadBlockLength);
  CHECK(decrypt_error(encrypt_fixture(Bytes(32, 0))) == ErrorCode::MagicMismatch);
  std::string magic("SQLite format 3\0", 16);
  auto other = BackupKey::default_key();
  other.bytes[0] ^= 1;
  CHECK(decrypt_error(encrypt_fixture(as_bytes(magic)), other) == ErrorCode::MagicMismatch);
}

TEST_CASE("key parsing") {
  CHECK_THROWS_AS(BackupKey::from_hex("00"), Error);
  CHECK_THROWS_AS(BackupKey::from_hex(std::string(48, 'z')), Error);
  CHECK(to_hex(BackupKey::default_key().bytes) == kDefaultBackupKeyHex);
}

TEST_CASE("backup file on disk") {
  wafx::test::TempDir d;
  CHECK_THROWS_AS(decrypt_backup(d / "missing.crypt"), Error);
  write_file(d / "short.crypt", Bytes(10, 1));
  CHECK_THROWS_AS(decrypt_backup(d / "short.crypt"), Error);
}

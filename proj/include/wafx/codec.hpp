#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "wafx/model.hpp"

namespace wafx {

using Sha256 = std::array<std::uint8_t, 32>;

Sha256 sha256(std::span<const std::uint8_t> data);
Sha256 sha256_file(const std::filesystem::path& path);  // throws Error{UnreadableFile}

std::string to_hex(std::span<const std::uint8_t> data);
std::optional<Bytes> from_hex(std::string_view hex);

std::string base64_encode(std::span<const std::uint8_t> data);
/// Strict RFC 4648 decoding (padding required); nullopt on any defect.
std::optional<Bytes> base64_decode(std::string_view text);

Bytes read_file(const std::filesystem::path& path);  // throws Error{UnreadableFile}
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace wafx

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "wafx/evidence.hpp"

namespace wafx {

// Exit codes of the `wafx` tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitWarnings = 1;
inline constexpr int kExitStructural = 2;
inline constexpr int kExitUsage = 64;

/// args[0] is the program name. Output files go where --out says; otherwise
/// documents are written to `out`. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// SHA-256 and modification time of every evidence file, keyed by relative path.
std::map<std::string, std::string> evidence_fingerprint(const std::filesystem::path& root,
                                                        const EvidenceLayout& layout = {});

}  // namespace wafx

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "wafx/correlator.hpp"
#include "wafx/evidence.hpp"
#include "wafx/forge.hpp"

namespace wafx::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path scenario_path(const std::string& name);  // tests/scenarios/<name>.wafx
std::filesystem::path golden_path(const std::string& name);     // tests/golden/<name>

struct ForgedCase {
  TempDir dir;
  ScenarioTruth truth;
  CaseBundle bundle;  // as read back by load_bundle
};

/// Forges the named scenario file and loads the result.
std::unique_ptr<ForgedCase> forge_scenario(const std::string& name);
std::unique_ptr<ForgedCase> forge_script(const ScenarioScript& script);

// Block-status oracle: a contact is Blocked while no unblock follows its last
// block; at the first unblock after it, Unblocked if it was the only contact
// whose status at that point was Blocked or Unknown, otherwise Unknown.
struct BlockOp {
  int contact = -1;  // -1 for an unblock
};
enum class OracleBlock { NeverBlocked, Blocked, Unblocked, Unknown };
OracleBlock oracle_block_status(const std::vector<BlockOp>& ops, std::size_t prefix, int contact);

}  // namespace wafx::test

#include "support.hpp"

#include <atomic>
#include <memory>
#include <random>

#include <unistd.h>

namespace wafx::test {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("wafx-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path scenario_path(const std::string& name) { return fs::path(WAFX_TEST_DIR) / "scenarios" / (name + ".wafx"); }
fs::path golden_path(const std::string& name) { return fs::path(WAFX_TEST_DIR) / "golden" / name; }

std::unique_ptr<ForgedCase> forge_script(const ScenarioScript& script) {
  auto c = std::make_unique<ForgedCase>();
  c->truth = generate_bundle(script, c->dir.path());
  c->bundle = load_bundle(c->dir.path());
  return c;
}

std::unique_ptr<ForgedCase> forge_scenario(const std::string& name) {
  return forge_script(load_scenario(scenario_path(name)));
}

OracleBlock oracle_block_status(const std::vector<BlockOp>& ops, std::size_t prefix, int contact) {
  std::optional<std::size_t> last_block;
  for (std::size_t i = 0; i < prefix; ++i)
    if (ops[i].contact == contact) last_block = i;
  if (!last_block) return OracleBlock::NeverBlocked;
  std::optional<std::size_t> unblock;
  for (std::size_t i = *last_block + 1; i < prefix && !unblock; ++i)
    if (ops[i].contact < 0) unblock = i;
  if (!unblock) return OracleBlock::Blocked;
  int contacts = 0;
  for (const auto& op : ops) contacts = std::max(contacts, op.contact + 1);
  bool others = false;
  for (int y = 0; y < contacts; ++y) {
    if (y == contact) continue;
    const auto s = oracle_block_status(ops, *unblock, y);
    if (s == OracleBlock::Blocked || s == OracleBlock::Unknown) others = true;
  }
  return others ? OracleBlock::Unknown : OracleBlock::Unblocked;
}

}  // namespace wafx::test

#include <doctest.h>

#include "support.hpp"
#include "wafx/identifiers.hpp"

using namespace wafx;
using namespace wafx::test;

namespace {

std::map<std::string, BlockStatus> by_jid(const std::vector<BlockStatus>& v) {
  std::map<std::string, BlockStatus> out;
  for (const auto& s : v) out[s.jid.raw] = s;
  return out;
}

}  // namespace

TEST_CASE("block and unblock through forged logs") {
  auto c = forge_scenario("block_unblock");
  const auto s = by_jid(infer_block_status(c->bundle));
  REQUIRE(s.size() == 3);
  const auto& x = s.at("39320xxxxxxx@s.whatsapp.net");
  CHECK(x.state == BlockState::Unblocked);
  CHECK(x.blocked_at.value == 1367402400000);
  CHECK(x.unblocked_at->value == 1367406000000);
  // Two contacts blocked, one anonymous unblock: either may still be blocked.
  CHECK(s.at("39335xxxxxxx@s.whatsapp.net").state == BlockState::Unknown);
  CHECK(s.at("39333xxxxxxx@s.whatsapp.net").state == BlockState::Unknown);
  CHECK(s.at("39333xxxxxxx@s.whatsapp.net").ambiguous_at->value == 1367496000000);
  CHECK_FALSE(s.at("39333xxxxxxx@s.whatsapp.net").evidence.empty());
}

TEST_CASE("no unblock after the last block means blocked") {
  BlockEvents ev;
  ev.blocks.push_back({user_jid("1"), EpochMillis{1000}, 0, "l", 1});
  ev.unblocks.push_back({EpochMillis{2000}, 1, "l", 2});
  ev.blocks.push_back({user_jid("1"), EpochMillis{3000}, 2, "l", 3});
  const auto s = infer_block_status(ev);
  REQUIRE(s.size() == 1);
  CHECK(s[0].state == BlockState::Blocked);
  CHECK(s[0].blocked_at.value == 3000);
}

TEST_CASE("Unknown contacts still count at a later unblock") {
  // B0 B1 U B2 U: at the second unblock contacts 0 and 1 are Unknown.
  const std::vector<BlockOp> ops = {{0}, {1}, {-1}, {2}, {-1}};
  CHECK(oracle_block_status(ops, ops.size(), 2) == OracleBlock::Unknown);
  BlockEvents ev;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const EpochMillis at{static_cast<std::int64_t>(i + 1) * 1000};
    if (ops[i].contact >= 0)
      ev.blocks.push_back({user_jid(std::to_string(ops[i].contact + 1)), at, i, "l", 1});
    else
      ev.unblocks.push_back({at, i, "l", 1});
  }
  for (const auto& s : infer_block_status(ev)) CHECK(s.state == BlockState::Unknown);
}

TEST_CASE("the oracle on hand-checked sequences") {
  CHECK(oracle_block_status({{0}}, 1, 0) == OracleBlock::Blocked);
  CHECK(oracle_block_status({{0}, {-1}}, 2, 0) == OracleBlock::Unblocked);
  CHECK(oracle_block_status({{0}, {1}, {-1}}, 3, 0) == OracleBlock::Unknown);
  CHECK(oracle_block_status({{0}, {-1}, {1}, {-1}}, 4, 0) == OracleBlock::Unblocked);
  CHECK(oracle_block_status({{0}, {-1}, {1}, {-1}}, 4, 1) == OracleBlock::Unblocked);
  CHECK(oracle_block_status({{1}}, 1, 0) == OracleBlock::NeverBlocked);
}

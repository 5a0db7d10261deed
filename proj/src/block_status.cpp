#include <algorithm>
#include <map>

#include "wafx/correlator.hpp"

namespace wafx {

std::string_view to_string(BlockState state) {
  switch (state) {
    case BlockState::Blocked: return "Blocked";
    case BlockState::Unblocked: return "Unblocked";
    case BlockState::Unknown: return "Unknown";
  }
  return "?";
}

std::vector<BlockStatus> infer_block_status(const BlockEvents& events) {
  // Unblock lines carry no jid, so one unblock can only be attributed when a
  // single contact could still be blocked at that moment.
  struct Step {
    std::size_t order;
    const BlockEntry* block;
    const UnblockEntry* unblock;
  };
  std::vector<Step> steps;
  for (const auto& b : events.blocks) steps.push_back({b.order, &b, nullptr});
  for (const auto& u : events.unblocks) steps.push_back({u.order, nullptr, &u});
  std::stable_sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) { return a.order < b.order; });

  std::map<std::string, BlockStatus> status;
  for (const auto& s : steps) {
    if (s.block) {
      auto& st = status[s.block->jid.raw];
      st.jid = s.block->jid;
      st.state = BlockState::Blocked;
      st.blocked_at = s.block->at;
      st.unblocked_at.reset();
      st.ambiguous_at.reset();
      st.evidence.push_back({s.block->source_file, s.block->line_number});
      continue;
    }
    std::vector<BlockStatus*> possibly_blocked;
    for (auto& [jid, st] : status)
      if (st.state != BlockState::Unblocked) possibly_blocked.push_back(&st);
    const Evidence ev{s.unblock->source_file, s.unblock->line_number};
    if (possibly_blocked.size() == 1 && possibly_blocked.front()->state == BlockState::Blocked) {
      possibly_blocked.front()->state = BlockState::Unblocked;
      possibly_blocked.front()->unblocked_at = s.unblock->at;
      possibly_blocked.front()->evidence.push_back(ev);
    } else {
      for (BlockStatus* st : possibly_blocked) {
        if (st->state == BlockState::Blocked) {
          st->state = BlockState::Unknown;
          st->ambiguous_at = s.unblock->at;
        }
        st->evidence.push_back(ev);
      }
    }
  }
  std::vector<BlockStatus> out;
  for (auto& [jid, st] : status) out.push_back(std::move(st));
  return out;
}

std::vector<BlockStatus> infer_block_status(const CaseBundle& bundle) {
  return infer_block_status(classify_block_events(bundle.log_events));
}

}  // namespace wafx

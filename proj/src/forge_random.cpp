#include <cstdio>
#include <random>
#include <set>

#include "wafx/forge.hpp"

namespace wafx {
namespace {

struct RefState {
  bool outgoing = false;
  int status = 0;
  std::set<std::string> convs;  // conversations still holding a copy
};

class RandomScript {
 public:
  RandomScript(std::uint64_t seed, std::size_t max_actions) : rng_(seed), max_(max_actions) {
    s_.seed = seed;
  }

  ScenarioScript build() {
    s_.owner.phone = phone();
    const std::size_t n_actors = 3 + pick(4);
    for (std::size_t i = 0; i < n_actors; ++i) {
      ScenarioActor a;
      a.alias = "A" + std::to_string(i + 1);
      a.phone = phone();
      if (pick(4) != 0) a.name = "Actor " + std::to_string(i + 1) + (pick(2) ? " Smith" : "");
      s_.actors.push_back(a);
      aliases_.push_back(a.alias);
    }
    // 2012-01-01 plus up to ~600 days.
    now_ = 1325376000000LL + static_cast<std::int64_t>(pick(600u * 86400u)) * 1000 + pick(1000);
    const std::size_t n = max_ == 0 ? 0 : 1 + pick(max_);
    for (std::size_t i = 0; i < n; ++i) step();
    return std::move(s_);
  }

 private:
  std::uint64_t pick(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  template <class C>
  const auto& any(const C& c) {
    auto it = c.begin();
    std::advance(it, pick(c.size()));
    return *it;
  }

  std::string phone() {
    std::string p = "39";
    for (int i = 0; i < 10; ++i) p += static_cast<char>('0' + pick(10));
    if (!phones_.insert(p).second) return phone();
    return p;
  }

  void emit(std::string verb, std::map<std::string, std::string> args) {
    now_ += 1000 + static_cast<std::int64_t>(pick(3 * 3600 * 1000));
    s_.timeline.push_back({EpochMillis{now_}, std::move(verb), std::move(args), 0});
  }

  std::string new_ref() { return "r" + std::to_string(++ref_counter_); }

  void record(const std::string& ref, bool outgoing, std::set<std::string> convs) {
    refs_[ref] = RefState{outgoing, 0, convs};
    for (const auto& c : convs) ++conv_count_[c];
  }

  std::vector<std::string> refs_where(bool (*pred)(const RefState&)) const {
    std::vector<std::string> out;
    for (const auto& [r, st] : refs_)
      if (!st.convs.empty() && pred(st)) out.push_back(r);
    return out;
  }

  // A conversation partner: an actor or a group the owner can write to.
  std::string target(bool incoming, std::string& sender) {
    if (!groups_.empty() && pick(3) == 0) {
      const auto& [g, members] = any(groups_);
      if (incoming) {
        std::vector<std::string> others;
        for (const auto& m : members)
          if (m != "me") others.push_back(m);
        if (others.empty()) {
          sender = "me";
          return g;
        }
        sender = any(others);
      } else {
        sender = "me";
      }
      return g;
    }
    const std::string a = any(aliases_);
    sender = incoming ? a : "me";
    return a;
  }

  void message(const std::string& verb, std::map<std::string, std::string> args) {
    const bool incoming = pick(2) == 0;
    std::string sender;
    const std::string conv = target(incoming, sender);
    args["from"] = sender;
    args["to"] = groups_.contains(conv) ? conv : (sender == "me" ? conv : "me");
    const std::string ref = new_ref();
    args["ref"] = ref;
    emit(verb, std::move(args));
    record(ref, sender == "me", {conv});
  }

  void step() {
    switch (pick(20)) {
      case 0: {  // add contact
        std::vector<std::string> candidates;
        for (const auto& a : aliases_)
          if (!contacts_.contains(a)) candidates.push_back(a);
        if (candidates.empty()) return step_text();
        const auto a = any(candidates);
        contacts_.insert(a);
        std::map<std::string, std::string> args{{"contact", a}};
        if (pick(5) == 0) args["user"] = "0";
        return emit("add-contact", args);
      }
      case 1: {
        if (contacts_.empty()) return step_text();
        const auto a = any(contacts_);
        contacts_.erase(a);
        return emit("delete-contact", {{"contact", a}});
      }
      case 2:
        return emit("block", {{"contact", any(aliases_)}});
      case 3:
        return emit("unblock-all", {});
      case 4:
      case 5:
      case 6:
        return step_text();
      case 7: {
        std::map<std::string, std::string> args{{"bytes", std::to_string(16 + pick(240))}};
        static const char* kinds[] = {"image", "audio", "video"};
        args["kind"] = kinds[pick(3)];
        if (pick(3) == 0) args["download"] = "0";
        if (args["kind"] != "image") args["duration"] = std::to_string(pick(120));
        return message("media", args);
      }
      case 8:
        return message("vcard", {{"name", "Card " + std::to_string(pick(100))}, {"tel", "+39" + std::to_string(pick(1000000))}});
      case 9: {
        const double lat = static_cast<double>(static_cast<std::int64_t>(pick(180000000))) / 1e6 - 90.0;
        const double lon = static_cast<double>(static_cast<std::int64_t>(pick(360000000))) / 1e6 - 180.0;
        char la[32], lo[32];
        std::snprintf(la, sizeof la, "%.6f", lat);
        std::snprintf(lo, sizeof lo, "%.6f", lon);
        return message("geo", {{"lat", la}, {"lon", lo}});
      }
      case 10: {  // broadcast
        const std::string ref = new_ref();
        if (pick(3) == 0) {
          const auto a = any(aliases_);
          emit("broadcast", {{"from", a}, {"to", "me"}, {"body", "bc " + ref}, {"ref", ref}});
          return record(ref, false, {a});
        }
        std::set<std::string> chosen;
        const std::size_t n = 2 + pick(std::min<std::size_t>(3, aliases_.size() - 1));
        while (chosen.size() < n) chosen.insert(any(aliases_));
        std::string to;
        for (const auto& c : chosen) to += (to.empty() ? "" : ",") + c;
        emit("broadcast", {{"from", "me"}, {"to", to}, {"body", "bc " + ref}, {"ref", ref}});
        auto convs = chosen;
        convs.insert("broadcast");
        return record(ref, true, convs);
      }
      case 11: {
        if (groups_.size() >= 3) return step_text();
        const std::string g = "G" + std::to_string(groups_.size() + 1);
        groups_[g] = {"me"};
        emit("create-group", {{"group", g}, {"name", "Group " + g}});
        ++conv_count_[g];
        return;
      }
      case 12:
      case 13: {
        if (groups_.empty()) return step_text();
        auto& [g, members] = *std::next(groups_.begin(), static_cast<long>(pick(groups_.size())));
        std::vector<std::string> out, in;
        for (const auto& a : aliases_) (members.contains(a) ? in : out).push_back(a);
        if (!in.empty() && (out.empty() || pick(3) == 0)) {
          const auto a = any(in);
          members.erase(a);
          emit("leave-group", {{"group", g}, {"member", a}});
        } else if (!out.empty()) {
          const auto a = any(out);
          members.insert(a);
          emit("add-to-group", {{"group", g}, {"member", a}});
        } else {
          return step_text();
        }
        ++conv_count_[g];
        return;
      }
      case 14: {
        auto pending = refs_where([](const RefState& r) { return r.outgoing && r.status == 0; });
        if (pending.empty()) return step_text();
        const auto r = any(pending);
        refs_[r].status = 4;
        return emit("server-ack", {{"ref", r}});
      }
      case 15: {
        auto acked = refs_where([](const RefState& r) { return r.outgoing && r.status == 4; });
        if (acked.empty()) return step_text();
        const auto r = any(acked);
        refs_[r].status = 5;
        return emit("device-ack", {{"ref", r}});
      }
      case 16: {
        auto live = refs_where([](const RefState&) { return true; });
        if (live.empty()) return step_text();
        const auto r = any(live);
        for (const auto& c : refs_[r].convs) --conv_count_[c];
        refs_[r].convs.clear();
        return emit("delete", {{"ref", r}});
      }
      case 17: {
        std::vector<std::string> convs;
        for (const auto& [c, n] : conv_count_)
          if (n > 0) convs.push_back(c);
        if (convs.empty()) return step_text();
        const auto c = any(convs);
        conv_count_[c] = 0;
        for (auto& [r, st] : refs_) st.convs.erase(c);
        return emit("delete-chat", {{"with", c}});
      }
      case 18:
        return emit("snapshot-backup", {});
      default: {
        std::vector<std::string> who = aliases_;
        who.push_back("me");
        return emit("restart", {{"who", any(who)}});
      }
    }
  }

  void step_text() { message("text", {{"body", "msg " + std::to_string(ref_counter_ + 1)}}); }

  std::mt19937_64 rng_;
  std::size_t max_;
  ScenarioScript s_;
  std::set<std::string> phones_;
  std::vector<std::string> aliases_;
  std::set<std::string> contacts_;
  std::map<std::string, std::set<std::string>> groups_;
  std::map<std::string, RefState> refs_;
  std::map<std::string, int> conv_count_;
  std::int64_t now_ = 0;
  int ref_counter_ = 0;
};

}  // namespace

ScenarioScript random_scenario(std::uint64_t seed, std::size_t max_actions) {
  return RandomScript(seed, max_actions).build();
}

}  // namespace wafx

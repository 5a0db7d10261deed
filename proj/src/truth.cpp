#include <algorithm>
#include <set>
#include <sstream>

#include "wafx/epoch.hpp"
#include "wafx/forge.hpp"

namespace wafx {
namespace {

std::string show(const std::optional<EpochMillis>& t) { return t ? iso_utc(*t) : std::string("-"); }

std::string show(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out + "]";
}

std::string show(const TruthHistoryEntry& e) {
  return "#" + std::to_string(e.message_id) + " " + e.key + " " + std::string(to_string(e.direction)) + " " +
         iso_utc(e.time) + (e.recovered ? " recovered" : "");
}

std::string show(const TruthPartners& p) {
  return std::string(to_string(p.kind)) + (p.authored_by_owner ? " owner" : "") + " from=" + p.originator +
         " partners=" + show(p.partners) + " members=" + show(p.members);
}

std::string show(const TruthGroupEvent& e) {
  return iso_utc(e.time) + " " + std::string(to_string(e.kind)) + " " + e.member + (e.log_sourced ? " (log)" : "");
}

std::string show(const TruthDeletedMessage& d) {
  return d.key + " deleted=" + show(d.deleted_at) + " exchanged=" + show(d.exchanged_at) +
         " dir=" + (d.direction ? std::string(to_string(*d.direction)) : "-") + " partners=" + show(d.partners) +
         " state=" + std::string(to_string(d.last_state));
}

std::string show(const TruthDeletedContact& c) { return c.jid + " added=" + show(c.added_at); }
std::string show(const TruthAddition& a) { return a.jid + " added=" + iso_utc(a.added_at); }
std::string show(const TruthGroup& g) { return g.group_id + " name=" + g.name.value_or("-"); }

template <class T>
void compare_lists(const std::string& what, const std::vector<T>& exp, const std::vector<T>& got,
                   std::vector<std::string>& out) {
  const std::size_t n = std::max(exp.size(), got.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i < exp.size() && i < got.size() && exp[i] == got[i]) continue;
    std::ostringstream s;
    s << what << "[" << i << "]: expected " << (i < exp.size() ? show(exp[i]) : "<none>") << ", got "
      << (i < got.size() ? show(got[i]) : "<none>");
    out.push_back(s.str());
    return;  // later entries are usually shifted; one line is enough
  }
}

// For bundle members without a dedicated printer, report the index only.
template <class T>
void compare_opaque(const std::string& what, const std::vector<T>& exp, const std::vector<T>& got,
                    std::vector<std::string>& out) {
  if (exp.size() != got.size()) {
    out.push_back(what + ": expected " + std::to_string(exp.size()) + " entries, got " + std::to_string(got.size()));
    return;
  }
  for (std::size_t i = 0; i < exp.size(); ++i)
    if (!(exp[i] == got[i])) {
      out.push_back(what + "[" + std::to_string(i) + "] differs");
      return;
    }
}

}  // namespace

ScenarioTruth observe(const CaseBundle& bundle) {
  ScenarioTruth t;
  t.bundle = bundle;
  for (const auto& [jid, entries] : reconstruct_history(bundle))
    for (const auto& e : entries)
      t.histories[jid].push_back({e.message_id, e.key.raw, e.direction, e.effective_time, e.recovered_from_backup});

  const auto timelines = group_membership_timeline(bundle);
  for (const auto& [id, p] : resolve_partners(bundle, timelines).by_message) {
    TruthPartners tp;
    tp.kind = p.kind;
    tp.authored_by_owner = p.authored_by_owner;
    tp.originator = p.originator ? p.originator->raw : "";
    for (const auto& j : p.partners) tp.partners.push_back(j.raw);
    for (const auto& j : p.members_at_time) tp.members.push_back(j.raw);
    t.partners[id] = std::move(tp);
  }
  for (const auto& g : timelines.groups) {
    TruthGroup tg;
    tg.group_id = g.group_id.raw;
    tg.name = g.group_name;
    for (const auto& e : g.events) tg.events.push_back({e.time, e.kind, e.member ? e.member->raw : "", e.log_sourced});
    t.groups.push_back(std::move(tg));
  }
  for (const auto& d : infer_deleted_messages(bundle)) {
    TruthDeletedMessage td;
    td.key = d.key.raw;
    td.deleted_at = d.deleted_at;
    td.exchanged_at = d.exchanged_at;
    td.direction = d.direction;
    for (const auto& j : d.partners) td.partners.push_back(j.raw);
    td.last_state = d.last_state;
    t.deleted_messages.push_back(std::move(td));
  }
  std::sort(t.deleted_messages.begin(), t.deleted_messages.end(),
            [](const auto& x, const auto& y) { return x.key < y.key; });
  for (const auto& c : infer_deleted_contacts(bundle).contacts) t.deleted_contacts.push_back({c.jid.raw, c.added_at});
  for (const auto& a : contact_addition_times(bundle)) t.additions.push_back({a.jid.raw, a.added_at});
  return t;
}

std::vector<std::string> compare_bundles(const CaseBundle& e, const CaseBundle& g) {
  std::vector<std::string> out;
  if (e.has_contacts_db != g.has_contacts_db || e.has_chat_db != g.has_chat_db) out.push_back("database presence");
  compare_opaque("contacts", e.contacts, g.contacts, out);
  compare_opaque("messages", e.messages, g.messages, out);
  compare_opaque("chat_list", e.chat_list, g.chat_list, out);
  compare_opaque("log_events", e.log_events, g.log_events, out);
  compare_opaque("log_files", e.log_files, g.log_files, out);
  if (e.registered_number != g.registered_number) out.push_back("registered_number");
  if (e.own_avatar_present != g.own_avatar_present) out.push_back("own_avatar_present");
  compare_opaque("media_inventory", e.media_inventory, g.media_inventory, out);
  compare_opaque("avatar_inventory", e.avatar_inventory, g.avatar_inventory, out);
  compare_opaque("backups", e.backups, g.backups, out);
  for (const auto& w : g.warnings) out.push_back("unexpected warning: " + w.source + ": " + w.message);
  return out;
}

std::vector<std::string> compare_truth(const ScenarioTruth& e, const ScenarioTruth& g) {
  std::vector<std::string> out = compare_bundles(e.bundle, g.bundle);
  std::set<std::string> convs;
  for (const auto& [k, v] : e.histories) convs.insert(k);
  for (const auto& [k, v] : g.histories) convs.insert(k);
  static const std::vector<TruthHistoryEntry> kNone;
  for (const auto& c : convs) {
    auto ei = e.histories.find(c);
    auto gi = g.histories.find(c);
    compare_lists("history " + c, ei == e.histories.end() ? kNone : ei->second,
                  gi == g.histories.end() ? kNone : gi->second, out);
  }
  std::set<std::int64_t> ids;
  for (const auto& [k, v] : e.partners) ids.insert(k);
  for (const auto& [k, v] : g.partners) ids.insert(k);
  for (auto id : ids) {
    auto ei = e.partners.find(id);
    auto gi = g.partners.find(id);
    if (ei != e.partners.end() && gi != g.partners.end() && ei->second == gi->second) continue;
    out.push_back("partners #" + std::to_string(id) + ": expected " +
                  (ei == e.partners.end() ? "<none>" : show(ei->second)) + ", got " +
                  (gi == g.partners.end() ? "<none>" : show(gi->second)));
  }
  compare_lists("group", e.groups, g.groups, out);
  for (std::size_t i = 0; i < std::min(e.groups.size(), g.groups.size()); ++i)
    compare_lists("group " + e.groups[i].group_id + " event", e.groups[i].events, g.groups[i].events, out);
  compare_lists("deleted message", e.deleted_messages, g.deleted_messages, out);
  compare_lists("deleted contact", e.deleted_contacts, g.deleted_contacts, out);
  compare_lists("contact addition", e.additions, g.additions, out);
  return out;
}

}  // namespace wafx

#include "logstitch/inference.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace logstitch {

GuardTable build_guards(const std::vector<const ComponentLog*>& logs, const TemplateSet& templates,
                        int guard_split_limit) {
  std::map<std::string, std::set<std::vector<std::string>>> observed;
  for (const auto* log : logs)
    for (const auto& e : log->entries)
      if (!e.params.empty()) observed[e.template_id].insert(e.params);

  GuardTable table;
  for (const auto& [id, vals] : observed) {
    (void)templates.by_id(id);  // reject unknown template ids early
    std::vector<Guard>& guards = table[id];
    if (static_cast<int>(vals.size()) > guard_split_limit) {
      guards.push_back(Guard::any());
    } else {
      for (const auto& v : vals) guards.push_back(Guard::exact(v));
    }
  }
  return table;
}

Guard guard_for(const GuardTable& table, const std::string& template_id,
                const std::vector<std::string>& valuation) {
  auto it = table.find(template_id);
  if (it == table.end()) return Guard::any();
  for (const auto& g : it->second)
    if (g.admits(valuation)) return g;
  // valuation unseen during guard construction; fall back to always-true
  return Guard::any();
}

Label label_for(const GuardTable& table, const LogEntry& entry) {
  return {entry.template_id, guard_for(table, entry.template_id, entry.params)};
}

GuardedFsm build_prefix_tree(const std::vector<const ComponentLog*>& logs,
                             const GuardTable& guards) {
  GuardedFsm m;
  m.add_state(true);  // root accepts: the empty behaviour is always allowed
  std::map<std::pair<StateId, std::string>, StateId> edges;

  for (const auto* log : logs) {
    StateId cur = m.initial;
    for (const auto& e : log->entries) {
      Label lbl = label_for(guards, e);
      auto key = std::make_pair(cur, lbl.key());
      auto it = edges.find(key);
      if (it == edges.end()) {
        StateId next = m.add_state(false);
        m.add_transition(cur, lbl, next);
        it = edges.emplace(key, next).first;
      }
      cur = it->second;
    }
    m.set_final(cur);
  }
  return m;
}

namespace {

// Accepted tails of length <= k from each state. Computed by backward
// iteration: T_0(s) = {<>} iff s is final, T_j(s) = T_0(s) ∪ {l·t : s -l-> s',
// t ∈ T_{j-1}(s')}.
std::vector<std::set<std::vector<std::string>>> accepted_tails(const GuardedFsm& m, int k) {
  size_t n = static_cast<size_t>(m.num_states());
  std::vector<std::vector<std::pair<std::string, StateId>>> out(n);
  for (const auto& t : m.transitions)
    out[static_cast<size_t>(t.src)].emplace_back(t.label.key(), t.dst);

  const std::vector<std::string> epsilon;
  std::vector<std::set<std::vector<std::string>>> tails(n);
  for (size_t s = 0; s < n; ++s)
    if (m.finals[s]) tails[s].insert(epsilon);
  for (int round = 0; round < k; ++round) {
    std::vector<std::set<std::vector<std::string>>> next(n);
    for (size_t s = 0; s < n; ++s) {
      if (m.finals[s]) next[s].insert(epsilon);
      for (const auto& [lbl, dst] : out[s]) {
        for (const auto& tail : tails[static_cast<size_t>(dst)]) {
          std::vector<std::string> ext{lbl};
          ext.insert(ext.end(), tail.begin(), tail.end());
          next[s].insert(std::move(ext));
        }
      }
    }
    tails.swap(next);
  }
  return tails;
}

}  // namespace

GuardedFsm infer_component_model(const std::vector<const ComponentLog*>& logs,
                                 const TemplateSet& templates, const MergePolicy& policy) {
  if (logs.empty()) throw EmptyInputError("no logs to infer a model from");
  auto guards = build_guards(logs, templates, policy.guard_split_limit);
  GuardedFsm pta = build_prefix_tree(logs, guards);

  // group states by accepted-tail signature and merge each group at once
  auto tails = accepted_tails(pta, policy.k);
  std::map<std::set<std::vector<std::string>>, std::vector<StateId>> groups;
  for (StateId s = 0; s < pta.num_states(); ++s)
    groups[tails[static_cast<size_t>(s)]].push_back(s);

  std::map<StateId, StateId> leader;
  for (const auto& [_, members] : groups)
    for (StateId s : members) leader[s] = members.front();

  GuardedFsm merged;
  std::map<StateId, StateId> remap;  // pta leader -> merged state
  for (StateId s = 0; s < pta.num_states(); ++s)
    if (leader[s] == s) remap[s] = merged.add_state(false);
  for (StateId s = 0; s < pta.num_states(); ++s)
    if (pta.is_final(s)) merged.set_final(remap[leader[s]]);
  merged.initial = remap[leader[pta.initial]];
  for (const auto& t : pta.transitions)
    merged.add_transition(remap[leader[t.src]], t.label, remap[leader[t.dst]]);
  merged.normalize();

  return determinize(merged);
}

std::map<std::string, GuardedFsm> infer_component_models(const std::vector<Execution>& executions,
                                                         const TemplateSet& templates,
                                                         const MergePolicy& policy) {
  if (executions.empty()) throw TooFewExecutionsError("need at least one execution");
  std::map<std::string, std::vector<const ComponentLog*>> by_component;
  for (const auto& exec : executions)
    for (const auto& [component, log] : exec.logs) by_component[component].push_back(&log);

  std::map<std::string, GuardedFsm> models;
  for (const auto& [component, logs] : by_component)
    models[component] = infer_component_model(logs, templates, policy);
  return models;
}

}  // namespace logstitch

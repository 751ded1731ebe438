#include "logstitch/stitching.hpp"

#include <algorithm>
#include <fstream>

namespace logstitch {

StateId GraftContext::cursor(const std::string& component) {
  auto it = cursors.find(component);
  if (it != cursors.end()) return it->second;
  auto mit = models->find(component);
  if (mit == models->end()) throw Error("no model for component " + component);
  return mit->second.initial;
}

void GraftContext::set_cursor(const std::string& component, StateId s) { cursors[component] = s; }

namespace {

struct SlicedPath {
  GuardedFsm fsm;
  std::vector<StateId> spine;   // state after reading i entries, in fsm ids
  std::vector<Label> labels;    // label taken at step i
};

// Replays `log` from the component's cursor and carves out exactly the
// traversed sub-machine. Sole final = last visited state; cursor advanced.
SlicedPath slice_path(GraftContext& ctx, const std::string& component,
                      std::span<const LogEntry> log) {
  auto mit = ctx.models->find(component);
  if (mit == ctx.models->end()) throw Error("no model for component " + component);
  const GuardedFsm& model = mit->second;

  std::vector<std::vector<const GuardedTransition*>> out(
      static_cast<size_t>(model.num_states()));
  for (const auto& t : model.transitions) out[static_cast<size_t>(t.src)].push_back(&t);

  SlicedPath res;
  std::map<StateId, StateId> remap;
  auto local = [&](StateId s) {
    auto [it, inserted] = remap.emplace(s, res.fsm.num_states());
    if (inserted) res.fsm.add_state(false, component + ":" + std::to_string(s));
    return it->second;
  };

  StateId cur = ctx.cursor(component);
  res.fsm.initial = local(cur);
  res.spine.push_back(res.fsm.initial);
  for (size_t i = 0; i < log.size(); ++i) {
    const GuardedTransition* chosen = nullptr;
    for (const auto* t : out[static_cast<size_t>(cur)]) {
      if (t->label.event != log[i].template_id) continue;
      if (!t->label.guard.admits(log[i].params)) continue;
      if (!chosen || (chosen->label.guard.always && !t->label.guard.always) ||
          (chosen->label.guard.always == t->label.guard.always &&
           t->label.key() < chosen->label.key()))
        chosen = t;
    }
    if (!chosen)
      throw ReplayStuckError("component " + component + " model has no transition for entry " +
                             std::to_string(i) + " (" + log[i].template_id + ") from state " +
                             std::to_string(cur));
    StateId a = local(chosen->src), b = local(chosen->dst);
    res.fsm.add_transition(a, chosen->label, b);
    res.labels.push_back(chosen->label);
    cur = chosen->dst;
    res.spine.push_back(remap.at(cur));
  }
  res.fsm.normalize();
  res.fsm.set_final(res.spine.back());
  if (!log.empty()) ctx.set_cursor(component, cur);
  return res;
}

}  // namespace

GuardedFsm slice(GraftContext& ctx, const std::string& component, std::span<const LogEntry> log) {
  return slice_path(ctx, component, log).fsm;
}

MappedFsm insert(const GuardedFsm& m_x, const GuardedTransition& gt, const GuardedFsm& m_y) {
  bool present = std::any_of(m_x.transitions.begin(), m_x.transitions.end(),
                             [&](const GuardedTransition& t) {
                               return t.src == gt.src && t.dst == gt.dst && t.label == gt.label;
                             });
  if (!present)
    throw TransitionNotFoundError("insert: transition " + std::to_string(gt.src) + " -" +
                                  gt.label.display() + "-> " + std::to_string(gt.dst) +
                                  " not in machine");

  GuardedFsm res = m_x;
  StateId offset = res.num_states();
  // m_y's finals accept only where a run may actually end, i.e. when the
  // insertion point itself ends runs; otherwise runs must continue through
  // the re-sourced copies of the target's outgoing transitions
  bool target_final = m_x.is_final(gt.dst);
  for (StateId s = 0; s < m_y.num_states(); ++s)
    res.add_state(m_y.is_final(s) && target_final, m_y.notes[static_cast<size_t>(s)]);
  for (const auto& t : m_y.transitions)
    res.add_transition(t.src + offset, t.label, t.dst + offset);

  // duplicate gt, redirected to m_y's initial state
  res.add_transition(gt.src, gt.label, m_y.initial + offset);
  // re-source copies of the target's outgoing transitions from m_y's finals
  for (const auto& t : m_x.transitions) {
    if (t.src != gt.dst) continue;
    for (StateId f = 0; f < m_y.num_states(); ++f)
      if (m_y.is_final(f)) res.add_transition(f + offset, t.label, t.dst);
  }
  res.normalize();
  return determinize_mapped(res);
}

GuardedFsm graft(GraftContext& ctx, const std::string& component, std::span<const LogEntry> log) {
  SlicedPath sliced = slice_path(ctx, component, log);
  GuardedFsm m = std::move(sliced.fsm);
  std::vector<StateId> spine = std::move(sliced.spine);

  for (size_t i = 0; i < log.size(); ++i) {
    const auto* seqs = ctx.deps->sequences_for(component, log[i].seq_no);
    if (!seqs || seqs->empty()) continue;

    // sequences of the same dependent component are concatenated: their
    // alphabets overlap, so they cannot be interleaved by composition
    std::vector<std::pair<std::string, std::vector<LogEntry>>> grouped;
    for (const auto& seq : *seqs) {
      if (grouped.empty() || grouped.back().first != seq.component)
        grouped.emplace_back(seq.component, std::vector<LogEntry>{});
      auto& entries = grouped.back().second;
      entries.insert(entries.end(), seq.entries.begin(), seq.entries.end());
    }

    std::vector<GuardedFsm> parts;
    parts.reserve(grouped.size());
    for (const auto& [dep_component, entries] : grouped)
      parts.push_back(graft(ctx, dep_component, entries));
    GuardedFsm composite =
        parts.size() == 1 ? std::move(parts.front()) : parallel_composition(parts);

    GuardedTransition gt{spine[i], sliced.labels[i], spine[i + 1]};
    MappedFsm updated = insert(m, gt, composite);
    m = std::move(updated.fsm);
    for (auto& s : spine) s = updated.state_map[static_cast<size_t>(s)];
  }
  return m;
}

GuardedFsm stitch(const std::vector<Execution>& executions,
                  const std::vector<DependencyMap>& deps,
                  const std::map<std::string, GuardedFsm>& models, const ArchitectureGraph& arch,
                  const StitchOptions& opts) {
  if (executions.empty()) throw EmptyInputError("stitch needs at least one execution");
  if (deps.size() != executions.size())
    throw Error("stitch: one dependency map per execution required");

  std::vector<GuardedFsm> grafted;
  grafted.reserve(executions.size());
  for (size_t i = 0; i < executions.size(); ++i) {
    const auto& exec = executions[i];
    auto it = exec.logs.find(arch.main);
    if (it == exec.logs.end())
      throw EmptyExecutionError("execution " + exec.exec_id + " has no log for main component " +
                                arch.main);
    GraftContext ctx(exec, deps[i], models);
    GuardedFsm g = graft(ctx, arch.main, it->second.entries);
    if (opts.dump_grafts) {
      std::filesystem::create_directories(*opts.dump_grafts);
      std::ofstream out(*opts.dump_grafts / (exec.exec_id + ".model"));
      out << to_text(g);
    }
    grafted.push_back(std::move(g));
  }
  GuardedFsm sys = fsm_union(grafted);
  if (opts.minimize) sys = minimize(sys);
  return sys;
}

}  // namespace logstitch

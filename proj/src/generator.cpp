#include "logstitch/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <tuple>

#include "json.hpp"

namespace logstitch {

GeneratorSpec GeneratorSpec::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open generator spec " + file.string());
  nlohmann::json j = nlohmann::json::parse(in);
  GeneratorSpec spec;
  for (const auto& c : j.at("components")) {
    GeneratorComponent gc;
    gc.name = c.at("name").get<std::string>();
    gc.num_states = c.value("states", gc.num_states);
    gc.num_events = c.value("events", gc.num_events);
    gc.num_comm_events = c.value("comm_events", gc.num_comm_events);
    gc.num_param_events = c.value("param_events", gc.num_param_events);
    gc.param_pool = c.value("param_pool", gc.param_pool);
    spec.components.push_back(std::move(gc));
  }
  for (const auto& e : j.at("edges"))
    spec.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  spec.main = j.at("main").get<std::string>();
  spec.executions = j.value("executions", spec.executions);
  spec.max_trace_len = j.value("max_trace_len", spec.max_trace_len);
  spec.timestamp_step = j.value("timestamp_step", spec.timestamp_step);
  spec.coarsening = j.value("coarsening", spec.coarsening);
  spec.response_prob = j.value("response_prob", spec.response_prob);
  spec.max_fan = j.value("max_fan", spec.max_fan);
  spec.max_extras = j.value("max_extras", spec.max_extras);
  return spec;
}

void GeneratorSpec::save(const std::filesystem::path& file) const {
  nlohmann::json j;
  j["components"] = nlohmann::json::array();
  for (const auto& c : components)
    j["components"].push_back({{"name", c.name},
                               {"states", c.num_states},
                               {"events", c.num_events},
                               {"comm_events", c.num_comm_events},
                               {"param_events", c.num_param_events},
                               {"param_pool", c.param_pool}});
  j["edges"] = nlohmann::json::array();
  for (const auto& [from, to] : edges) j["edges"].push_back({from, to});
  j["main"] = main;
  j["executions"] = executions;
  j["max_trace_len"] = max_trace_len;
  j["timestamp_step"] = timestamp_step;
  j["coarsening"] = coarsening;
  j["response_prob"] = response_prob;
  j["max_fan"] = max_fan;
  j["max_extras"] = max_extras;
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

namespace {

struct Event {
  std::string template_id;
  bool comm = false;
  bool has_param = false;
};

struct Machine {
  std::vector<Event> events;
  // per state: (event index, destination)
  std::vector<std::vector<std::pair<int, int>>> edges;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
  return a;
}

Machine build_machine(const GeneratorComponent& c, bool needs_comm_everywhere, int max_fan,
                      std::mt19937_64& rng) {
  Machine m;
  int num_comm = std::min(c.num_comm_events, c.num_events);
  for (int i = 0; i < c.num_events; ++i) {
    Event ev;
    ev.template_id = c.name + "_ev" + std::to_string(i);
    ev.comm = i < num_comm;
    ev.has_param = i >= c.num_events - c.num_param_events;
    m.events.push_back(std::move(ev));
  }
  std::vector<int> comm_events, all_events;
  for (int i = 0; i < c.num_events; ++i) {
    all_events.push_back(i);
    if (m.events[static_cast<size_t>(i)].comm) comm_events.push_back(i);
  }

  std::uniform_int_distribution<int> state_dist(0, c.num_states - 1);
  m.edges.resize(static_cast<size_t>(c.num_states));

  if (max_fan == 1) {
    // deterministic ring: state s emits one fixed event and moves on; random
    // single-edge graphs collapse into short loops that nothing can learn
    for (int s = 0; s < c.num_states; ++s) {
      auto& out = m.edges[static_cast<size_t>(s)];
      int dst = (s + 1) % c.num_states;
      out.emplace_back(s % c.num_events, dst);
      if (needs_comm_everywhere && !comm_events.empty() &&
          !m.events[static_cast<size_t>(s % c.num_events)].comm)
        out.emplace_back(comm_events[static_cast<size_t>(s) % comm_events.size()], dst);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return m;
  }

  for (int s = 0; s < c.num_states; ++s) {
    auto& out = m.edges[static_cast<size_t>(s)];
    int fan = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, max_fan)));
    for (int i = 0; i < fan; ++i) {
      int ev = all_events[rng() % all_events.size()];
      out.emplace_back(ev, state_dist(rng));
    }
    if (needs_comm_everywhere && !comm_events.empty()) {
      bool has = std::any_of(out.begin(), out.end(), [&](const auto& e) {
        return m.events[static_cast<size_t>(e.first)].comm;
      });
      if (!has) out.emplace_back(comm_events[rng() % comm_events.size()], state_dist(rng));
    }
    // avoid duplicate (event, dst) pairs; keep at least one edge
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return m;
}

struct Emitter {
  const GeneratorSpec& spec;
  const std::map<std::string, Machine>& machines;
  const std::map<std::string, std::vector<std::string>>& children;
  std::mt19937_64& rng;

  std::int64_t ts = 0;
  std::map<std::string, int> cursor;               // component -> machine state
  std::map<std::string, std::vector<LogEntry>> logs;
  std::map<DepKey, std::vector<DepSequence>> truth;

  LogEntry emit(const std::string& component, int event_index) {
    const Machine& m = machines.at(component);
    const Event& ev = m.events[static_cast<size_t>(event_index)];
    LogEntry e;
    ts += spec.timestamp_step;
    e.timestamp = ts;
    e.template_id = ev.template_id;
    if (ev.has_param) {
      int pool = 1;
      for (const auto& c : spec.components)
        if (c.name == component) pool = std::max(1, c.param_pool);
      e.params.push_back("v" + std::to_string(rng() % static_cast<std::uint64_t>(pool)));
    }
    e.seq_no = static_cast<int>(logs[component].size());
    logs[component].push_back(e);
    return e;
  }

  // take one edge labeled by `event_index` must exist from the cursor
  std::pair<int, int> pick_edge(const std::string& component, bool comm_only, bool avoid_comm) {
    const Machine& m = machines.at(component);
    const auto& out = m.edges[static_cast<size_t>(cursor[component])];
    std::vector<std::pair<int, int>> candidates;
    for (const auto& e : out) {
      bool is_comm = m.events[static_cast<size_t>(e.first)].comm;
      if (comm_only && !is_comm) continue;
      if (avoid_comm && is_comm) continue;
      candidates.push_back(e);
    }
    if (candidates.empty()) return {-1, -1};
    return candidates[rng() % candidates.size()];
  }

  // Response of `component` to an upstream communication entry: one comm
  // entry plus up to two non-comm entries; then its own children respond.
  void respond(const std::string& component, const std::string& upstream) {
    auto [ev, dst] = pick_edge(component, true, false);
    if (ev < 0) return;  // no comm edge here; the stimulus goes unanswered
    const auto& up_log = logs.at(upstream);
    DepKey key{upstream, up_log.back().seq_no};

    DepSequence seq;
    seq.component = component;
    seq.entries.push_back(emit(component, ev));
    cursor[component] = dst;
    int extra = spec.max_extras > 0
                    ? static_cast<int>(rng() % static_cast<std::uint64_t>(spec.max_extras + 1))
                    : 0;
    for (int i = 0; i < extra; ++i) {
      auto [nev, ndst] = pick_edge(component, false, true);
      if (nev < 0) break;
      seq.entries.push_back(emit(component, nev));
      cursor[component] = ndst;
    }
    truth[key].push_back(seq);
    trigger_children(component);
  }

  void trigger_children(const std::string& component) {
    auto it = children.find(component);
    if (it == children.end()) return;
    for (const auto& child : it->second) {
      if (spec.response_prob < 1.0 &&
          std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= spec.response_prob)
        continue;
      respond(child, component);
    }
  }

  void run_main(const std::string& main, int steps) {
    const Machine& m = machines.at(main);
    for (int i = 0; i < steps; ++i) {
      const auto& out = m.edges[static_cast<size_t>(cursor[main])];
      if (out.empty()) break;
      auto [ev, dst] = out[rng() % out.size()];
      emit(main, ev);
      cursor[main] = dst;
      if (m.events[static_cast<size_t>(ev)].comm) trigger_children(main);
    }
  }
};

}  // namespace

GeneratedDataset generate(const GeneratorSpec& spec, std::uint64_t seed,
                          const std::filesystem::path& out_dir) {
  if (spec.components.empty()) throw EmptyInputError("generator spec has no components");
  std::mt19937_64 build_rng(mix(seed, 0xB01Dull));

  std::map<std::string, std::vector<std::string>> children;
  std::set<std::string> downstream;
  for (const auto& [from, to] : spec.edges) {
    children[from].push_back(to);
    downstream.insert(to);
  }

  TemplateSet templates;
  std::map<std::string, Machine> machines;
  for (const auto& c : spec.components) {
    // downstream components need comm entries to head their response
    // segments; parents need comm edges to be able to trigger children
    bool needs_comm = downstream.count(c.name) > 0 || children.count(c.name) > 0;
    Machine m = build_machine(c, needs_comm, spec.max_fan, build_rng);
    for (const auto& ev : m.events) {
      EventTemplate t;
      t.id = ev.template_id;
      t.is_communication = ev.comm;
      t.tokens = tokenize(c.name + " " + ev.template_id +
                          (ev.has_param ? " val = $1" : ""));
      templates.add(std::move(t));
    }
    machines.emplace(c.name, std::move(m));
  }

  ArchitectureGraph arch;
  arch.main = spec.main;
  arch.uses = spec.edges;
  {
    std::set<std::string> comps;
    for (const auto& c : spec.components) comps.insert(c.name);
    arch.components.assign(comps.begin(), comps.end());
  }
  arch.validate();

  std::filesystem::create_directories(out_dir / "dataset");
  templates.save(out_dir / "templates.tsv");
  arch.save(out_dir / "arch.txt");

  GeneratedDataset result;
  result.root = out_dir;
  nlohmann::json truth_json;

  for (int e = 0; e < spec.executions; ++e) {
    char id[32];
    std::snprintf(id, sizeof(id), "exec%04d", e);
    std::mt19937_64 rng(mix(seed, 0xE0ull + static_cast<std::uint64_t>(e)));
    Emitter em{spec, machines, children, rng};
    for (const auto& c : spec.components) em.cursor[c.name] = 0;
    int steps = std::max(1, static_cast<int>(rng() % static_cast<std::uint64_t>(
                                                std::max(1, spec.max_trace_len))) +
                                1);
    steps = std::min(steps, spec.max_trace_len);
    em.run_main(spec.main, steps);

    Execution exec;
    exec.exec_id = id;
    for (auto& [comp, entries] : em.logs) {
      if (spec.coarsening > 1)
        for (auto& le : entries) le.timestamp -= le.timestamp % spec.coarsening;
      ComponentLog log;
      log.component = comp;
      log.entries = std::move(entries);
      result.total_entries += log.entries.size();
      exec.logs.emplace(comp, std::move(log));
    }
    write_execution(exec, out_dir / "dataset" / id, templates);

    result.truth.attachments[id] = em.truth;
    nlohmann::json rels = nlohmann::json::array();
    for (const auto& [key, seqs] : em.truth)
      for (const auto& seq : seqs) {
        std::vector<int> seq_nos;
        for (const auto& le : seq.entries) seq_nos.push_back(le.seq_no);
        rels.push_back({{"component", key.component},
                        {"seq_no", key.seq_no},
                        {"target", seq.component},
                        {"entries", seq_nos}});
      }
    truth_json[id] = std::move(rels);
  }

  std::ofstream out(out_dir / "truth.json");
  if (!out) throw IoError("cannot write truth.json");
  out << truth_json.dump(2) << '\n';
  return result;
}

double RecoveryStats::mismatch_rate() const {
  std::size_t total = truth_relations + extracted_relations;
  if (total == 0) return 0.0;
  return 1.0 - 2.0 * static_cast<double>(matched) / static_cast<double>(total);
}

bool RecoveryStats::exact() const {
  return matched == truth_relations && matched == extracted_relations;
}

RecoveryStats compare_dependencies(const GroundTruth& truth,
                                   const std::vector<DependencyMap>& extracted) {
  // relation = (upstream key, dependent component, dependent entry seq_nos)
  using Rel = std::tuple<std::string, std::string, int, std::string, std::vector<int>>;
  auto relations = [](const std::string& exec_id,
                      const std::map<DepKey, std::vector<DepSequence>>& deps) {
    std::set<Rel> out;
    for (const auto& [key, seqs] : deps)
      for (const auto& seq : seqs) {
        std::vector<int> seq_nos;
        for (const auto& e : seq.entries) seq_nos.push_back(e.seq_no);
        out.insert({exec_id, key.component, key.seq_no, seq.component, std::move(seq_nos)});
      }
    return out;
  };

  std::set<Rel> truth_rels, extracted_rels;
  for (const auto& [exec_id, deps] : truth.attachments) {
    auto r = relations(exec_id, deps);
    truth_rels.insert(r.begin(), r.end());
  }
  for (const auto& map : extracted) {
    auto r = relations(map.exec_id, map.deps);
    extracted_rels.insert(r.begin(), r.end());
  }

  RecoveryStats stats;
  stats.truth_relations = truth_rels.size();
  stats.extracted_relations = extracted_rels.size();
  for (const auto& r : truth_rels)
    if (extracted_rels.count(r)) stats.matched++;
  return stats;
}

}  // namespace logstitch

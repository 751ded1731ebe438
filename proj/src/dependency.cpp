#include "logstitch/dependency.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace logstitch {

std::vector<std::string> ArchitectureGraph::users_of(const std::string& component) const {
  std::vector<std::string> out;
  for (const auto& [from, to] : uses)
    if (to == component) out.push_back(from);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> ArchitectureGraph::used_by(const std::string& component) const {
  std::vector<std::string> out;
  for (const auto& [from, to] : uses)
    if (from == component) out.push_back(to);
  std::sort(out.begin(), out.end());
  return out;
}

bool ArchitectureGraph::has_component(const std::string& c) const {
  return std::find(components.begin(), components.end(), c) != components.end();
}

void ArchitectureGraph::validate() const {
  if (!has_component(main)) throw IoError("main component '" + main + "' not declared");
  for (const auto& [from, to] : uses)
    if (!has_component(from) || !has_component(to))
      throw IoError("architecture edge references unknown component: " + from + " -> " + to);
  // cycle check via repeated removal of sources
  std::map<std::string, int> indeg;
  for (const auto& c : components) indeg[c] = 0;
  for (const auto& [from, to] : uses) indeg[to]++;
  std::vector<std::string> order;
  std::set<std::string> removed;
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& [c, d] : indeg) {
      if (d == 0 && !removed.count(c)) {
        removed.insert(c);
        progress = true;
        for (const auto& [from, to] : uses)
          if (from == c) indeg[to]--;
      }
    }
  }
  if (removed.size() != components.size())
    throw CycleDetectedError("architecture graph contains a cycle");
}

ArchitectureGraph ArchitectureGraph::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open architecture file " + file.string());
  ArchitectureGraph g;
  std::set<std::string> comps;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip whitespace
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("main:", 0) == 0) {
      auto name = line.substr(5);
      name.erase(0, name.find_first_not_of(" \t"));
      g.main = name;
      comps.insert(name);
      continue;
    }
    auto arrow = line.find("->");
    if (arrow == std::string::npos)
      throw IoError(file.string() + ":" + std::to_string(lineno) + ": expected 'FROM -> TO'");
    auto from = line.substr(0, arrow);
    auto to = line.substr(arrow + 2);
    auto strip = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    g.uses.emplace_back(strip(from), strip(to));
    comps.insert(g.uses.back().first);
    comps.insert(g.uses.back().second);
  }
  g.components.assign(comps.begin(), comps.end());
  if (g.main.empty()) {
    // default: the unique component with no incoming edge
    std::vector<std::string> roots;
    for (const auto& c : g.components) {
      bool incoming = false;
      for (const auto& [_, to] : g.uses)
        if (to == c) incoming = true;
      if (!incoming) roots.push_back(c);
    }
    if (roots.size() != 1)
      throw IoError("architecture file has no 'main:' line and no unique root");
    g.main = roots[0];
  }
  g.validate();
  return g;
}

void ArchitectureGraph::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "main: " << main << '\n';
  for (const auto& [from, to] : uses) out << from << " -> " << to << '\n';
}

const std::vector<DepSequence>* DependencyMap::sequences_for(const std::string& component,
                                                             int seq_no) const {
  auto it = deps.find(DepKey{component, seq_no});
  return it == deps.end() ? nullptr : &it->second;
}

std::size_t DependencyMap::relation_count() const {
  std::size_t n = 0;
  for (const auto& [_, seqs] : deps) n += seqs.size();
  return n;
}

namespace {

// Most recent upstream entry at or before `ts`; ties go to the larger seq_no.
// Returns -1 when no entry qualifies.
int most_recent_at_or_before(const ComponentLog& upstream, std::int64_t ts) {
  int best = -1;
  for (const auto& e : upstream.entries) {
    if (e.timestamp > ts) break;
    best = e.seq_no;  // entries are in seq order, so the last qualifying wins
  }
  return best;
}

std::vector<std::vector<LogEntry>> segment_downstream(const ComponentLog& log,
                                                      const TemplateSet& templates) {
  std::vector<std::vector<LogEntry>> segments;
  for (const auto& e : log.entries) {
    if (templates.is_communication(e.template_id) || segments.empty())
      segments.push_back({});
    segments.back().push_back(e);
  }
  // entries before the first communication entry belong to the first segment;
  // the construction above already folds them in
  return segments;
}

}  // namespace

std::map<int, int> comm_leads_to(const ComponentLog& upstream, const ComponentLog& downstream,
                                 const TemplateSet& templates) {
  std::map<int, int> pairs;
  for (const auto& e : downstream.entries) {
    if (!templates.is_communication(e.template_id)) continue;
    int up = most_recent_at_or_before(upstream, e.timestamp);
    if (up < 0) {
      if (upstream.entries.empty()) continue;
      std::cerr << "warning: " << downstream.component << " entry " << e.seq_no
                << " precedes every " << upstream.component
                << " entry; attaching to the earliest\n";
      up = upstream.entries.front().seq_no;
    }
    pairs[e.seq_no] = up;
  }
  return pairs;
}

DependencyMap extract_dependencies(const Execution& exec, const ArchitectureGraph& arch,
                                   const TemplateSet& templates) {
  DependencyMap map;
  map.exec_id = exec.exec_id;

  for (const auto& [component, log] : exec.logs) {
    auto users = arch.users_of(component);
    std::vector<const ComponentLog*> parents;
    for (const auto& u : users) {
      auto it = exec.logs.find(u);
      if (it != exec.logs.end() && !it->second.entries.empty()) parents.push_back(&it->second);
    }
    if (parents.empty() || log.entries.empty()) continue;

    bool has_comm = std::any_of(log.entries.begin(), log.entries.end(), [&](const LogEntry& e) {
      return templates.is_communication(e.template_id);
    });
    if (!has_comm) {
      std::cerr << "warning: " << component << " has no communication entries in "
                << exec.exec_id << "; its log stays unattached\n";
      continue;
    }

    for (auto& segment : segment_downstream(log, templates)) {
      const LogEntry& head = segment.front();
      // best parent across all using components: most recent entry, ties by
      // larger seq_no, then by component id
      const ComponentLog* best_parent = nullptr;
      int best_seq = -1;
      std::int64_t best_ts = 0;
      for (const auto* parent : parents) {
        int seq = most_recent_at_or_before(*parent, head.timestamp);
        if (seq < 0) continue;
        std::int64_t ts = parent->entries[static_cast<size_t>(seq)].timestamp;
        if (!best_parent || ts > best_ts) {
          best_parent = parent;
          best_seq = seq;
          best_ts = ts;
        }
      }
      if (!best_parent) {
        best_parent = parents.front();
        best_seq = best_parent->entries.front().seq_no;
        std::cerr << "warning: segment of " << component << " at seq " << head.seq_no
                  << " precedes every upstream entry; attaching to the earliest\n";
      }
      map.deps[DepKey{best_parent->component, best_seq}].push_back(
          DepSequence{component, std::move(segment)});
    }
  }

  // canonical ordering of sibling sequences
  for (auto& [_, seqs] : map.deps)
    std::sort(seqs.begin(), seqs.end(), [](const DepSequence& a, const DepSequence& b) {
      if (a.component != b.component) return a.component < b.component;
      return a.entries.front().seq_no < b.entries.front().seq_no;
    });
  return map;
}

std::vector<LogEntry> strip_components(const std::vector<LinearEntry>& seq) {
  std::vector<LogEntry> out;
  out.reserve(seq.size());
  for (const auto& e : seq) out.push_back(e.entry);
  return out;
}

namespace {

struct Expander {
  const DependencyMap& deps;
  std::mt19937_64* rng;  // null = canonical

  std::vector<LinearEntry> expand_entry(const std::string& component, const LogEntry& entry) {
    std::vector<LinearEntry> out{{component, entry}};
    const auto* seqs = deps.sequences_for(component, entry.seq_no);
    if (!seqs || seqs->empty()) return out;

    // sequences of the same component form one block: their relative order is
    // fixed, only blocks of different components may interleave
    std::vector<std::vector<LinearEntry>> blocks;
    std::string prev;
    for (const auto& seq : *seqs) {
      if (blocks.empty() || seq.component != prev) {
        blocks.push_back({});
        prev = seq.component;
      }
      for (const auto& e : seq.entries) {
        auto sub = expand_entry(seq.component, e);
        blocks.back().insert(blocks.back().end(), sub.begin(), sub.end());
      }
    }
    if (!rng) {
      for (auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    } else {
      std::vector<size_t> pos(blocks.size(), 0);
      size_t remaining = 0;
      for (const auto& b : blocks) remaining += b.size();
      while (remaining > 0) {
        // pick among blocks with items left, weighted by remaining length
        std::uniform_int_distribution<size_t> dist(0, remaining - 1);
        size_t pick = dist(*rng);
        for (size_t i = 0; i < blocks.size(); ++i) {
          size_t left = blocks[i].size() - pos[i];
          if (pick < left) {
            out.push_back(blocks[i][pos[i]++]);
            break;
          }
          pick -= left;
        }
        --remaining;
      }
    }
    return out;
  }
};

std::vector<LinearEntry> linearize_impl(const Execution& exec, const DependencyMap& deps,
                                        const ArchitectureGraph& arch, std::mt19937_64* rng) {
  auto it = exec.logs.find(arch.main);
  if (it == exec.logs.end())
    throw EmptyExecutionError("execution " + exec.exec_id + " has no log for main component " +
                              arch.main);
  Expander ex{deps, rng};
  std::vector<LinearEntry> out;
  for (const auto& e : it->second.entries) {
    auto sub = ex.expand_entry(arch.main, e);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

}  // namespace

std::vector<LinearEntry> linearize_canonical(const Execution& exec, const DependencyMap& deps,
                                             const ArchitectureGraph& arch) {
  return linearize_impl(exec, deps, arch, nullptr);
}

std::vector<LinearEntry> linearize_seeded(const Execution& exec, const DependencyMap& deps,
                                          const ArchitectureGraph& arch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return linearize_impl(exec, deps, arch, &rng);
}

std::string format_dependency_map(const DependencyMap& map) {
  std::ostringstream out;
  out << "# " << map.exec_id << "\n";
  for (const auto& [key, seqs] : map.deps) {
    for (const auto& seq : seqs) {
      out << "e^" << key.component << "_" << key.seq_no + 1 << " ~> <";
      for (size_t i = 0; i < seq.entries.size(); ++i) {
        if (i) out << ", ";
        out << "e^" << seq.component << "_" << seq.entries[i].seq_no + 1;
      }
      out << ">\n";
    }
  }
  return out.str();
}

}  // namespace logstitch

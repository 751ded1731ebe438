#include "logstitch/automata.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace logstitch {

namespace {

// Hash for product-state tuples.
struct VecHash {
  std::size_t operator()(const std::vector<StateId>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (StateId s : v) {
      h ^= static_cast<std::size_t>(s) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

Guard Guard::any() { return Guard{}; }

Guard Guard::exact(std::vector<std::string> valuation) {
  Guard g;
  g.always = false;
  g.valuations.push_back(std::move(valuation));
  return g;
}

Guard Guard::of(std::vector<std::vector<std::string>> valuations) {
  Guard g;
  g.always = false;
  g.valuations = std::move(valuations);
  std::sort(g.valuations.begin(), g.valuations.end());
  g.valuations.erase(std::unique(g.valuations.begin(), g.valuations.end()), g.valuations.end());
  return g;
}

bool Guard::admits(const std::vector<std::string>& valuation) const {
  if (always) return true;
  return std::binary_search(valuations.begin(), valuations.end(), valuation);
}

std::string Guard::key() const {
  if (always) return "*";
  std::string out;
  for (size_t i = 0; i < valuations.size(); ++i) {
    if (i) out += '|';
    for (size_t j = 0; j < valuations[i].size(); ++j) {
      if (j) out += ',';
      out += valuations[i][j];
    }
  }
  return out;
}

const std::vector<std::string>& Guard::representative() const {
  static const std::vector<std::string> empty;
  if (always || valuations.empty()) return empty;
  return valuations.front();  // sorted, so the smallest
}

std::string Label::display() const {
  if (guard.always || guard.representative().empty()) return event;
  std::string out = event + " (";
  const auto& rep = guard.representative();
  for (size_t i = 0; i < rep.size(); ++i) {
    if (i) out += ", ";
    out += rep[i];
  }
  return out + ")";
}

StateId GuardedFsm::add_state(bool fin, std::string note) {
  finals.push_back(fin ? 1 : 0);
  notes.push_back(std::move(note));
  return static_cast<StateId>(finals.size()) - 1;
}

void GuardedFsm::add_transition(StateId src, Label label, StateId dst) {
  transitions.push_back({src, std::move(label), dst});
}

bool GuardedFsm::is_deterministic() const {
  std::unordered_set<std::string> seen;
  for (const auto& t : transitions) {
    std::string k = std::to_string(t.src) + "\x1e" + t.label.key();
    auto [it, inserted] = seen.insert(std::move(k));
    if (!inserted) {
      // duplicate (src, label): deterministic only if it is the same edge
      bool dup = false;
      for (const auto& u : transitions)
        if (&u != &t && u.src == t.src && u.dst == t.dst && u.label == t.label) dup = true;
      if (!dup) return false;
    }
  }
  return true;
}

std::vector<Label> GuardedFsm::alphabet() const {
  std::map<std::string, Label> by_key;
  for (const auto& t : transitions) by_key.emplace(t.label.key(), t.label);
  std::vector<Label> out;
  out.reserve(by_key.size());
  for (auto& [_, l] : by_key) out.push_back(l);
  return out;
}

void GuardedFsm::normalize() {
  std::sort(transitions.begin(), transitions.end(),
            [](const GuardedTransition& a, const GuardedTransition& b) {
              if (a.src != b.src) return a.src < b.src;
              auto ak = a.label.key(), bk = b.label.key();
              if (ak != bk) return ak < bk;
              return a.dst < b.dst;
            });
  transitions.erase(std::unique(transitions.begin(), transitions.end(),
                                [](const GuardedTransition& a, const GuardedTransition& b) {
                                  return a.src == b.src && a.dst == b.dst && a.label == b.label;
                                }),
                    transitions.end());
}

RunResult accepts(const GuardedFsm& m, std::span<const LogEntry> log) {
  std::vector<std::vector<const GuardedTransition*>> out(static_cast<size_t>(m.num_states()));
  for (const auto& t : m.transitions) out[static_cast<size_t>(t.src)].push_back(&t);

  // subset simulation: exact on nondeterministic machines too. `visited` is
  // recorded only while the run is unambiguous (always, on a DFA).
  RunResult r;
  std::set<StateId> frontier{m.initial};
  r.visited.push_back(m.initial);
  for (size_t i = 0; i < log.size(); ++i) {
    std::set<StateId> next;
    for (StateId s : frontier)
      for (const auto* t : out[static_cast<size_t>(s)]) {
        if (t->label.event != log[i].template_id) continue;
        if (!t->label.guard.admits(log[i].params)) continue;
        next.insert(t->dst);
      }
    if (next.empty()) {
      r.accepted = false;
      r.failure_index = i;
      return r;
    }
    frontier.swap(next);
    if (frontier.size() == 1) r.visited.push_back(*frontier.begin());
  }
  r.accepted = std::any_of(frontier.begin(), frontier.end(),
                           [&](StateId s) { return m.is_final(s); });
  if (!r.accepted) r.failure_index = log.size();
  return r;
}

namespace {

// Deterministic successor tables keyed by label key.
std::vector<std::unordered_map<std::string, StateId>> successor_tables(const GuardedFsm& m) {
  std::vector<std::unordered_map<std::string, StateId>> out(static_cast<size_t>(m.num_states()));
  for (const auto& t : m.transitions) out[static_cast<size_t>(t.src)][t.label.key()] = t.dst;
  return out;
}

// Drops states that are unreachable or cannot reach a final state.
GuardedFsm trim(const GuardedFsm& m) {
  size_t n = static_cast<size_t>(m.num_states());
  std::vector<char> fwd(n, 0), bwd(n, 0);
  std::vector<std::vector<StateId>> out(n), in(n);
  for (const auto& t : m.transitions) {
    out[static_cast<size_t>(t.src)].push_back(t.dst);
    in[static_cast<size_t>(t.dst)].push_back(t.src);
  }
  std::deque<StateId> q{m.initial};
  fwd[static_cast<size_t>(m.initial)] = 1;
  while (!q.empty()) {
    StateId s = q.front();
    q.pop_front();
    for (StateId d : out[static_cast<size_t>(s)])
      if (!fwd[static_cast<size_t>(d)]) {
        fwd[static_cast<size_t>(d)] = 1;
        q.push_back(d);
      }
  }
  for (size_t s = 0; s < n; ++s)
    if (m.finals[s]) {
      bwd[s] = 1;
      q.push_back(static_cast<StateId>(s));
    }
  while (!q.empty()) {
    StateId s = q.front();
    q.pop_front();
    for (StateId p : in[static_cast<size_t>(s)])
      if (!bwd[static_cast<size_t>(p)]) {
        bwd[static_cast<size_t>(p)] = 1;
        q.push_back(p);
      }
  }

  std::vector<StateId> remap(n, -1);
  GuardedFsm res;
  for (size_t s = 0; s < n; ++s)
    if (fwd[s] && bwd[s]) remap[s] = res.add_state(m.finals[s] != 0, m.notes[s]);
  if (remap[static_cast<size_t>(m.initial)] < 0) {
    // empty language: keep a lone initial state
    res = GuardedFsm{};
    res.add_state(false);
    res.initial = 0;
    return res;
  }
  res.initial = remap[static_cast<size_t>(m.initial)];
  for (const auto& t : m.transitions) {
    StateId a = remap[static_cast<size_t>(t.src)], b = remap[static_cast<size_t>(t.dst)];
    if (a >= 0 && b >= 0) res.add_transition(a, t.label, b);
  }
  res.normalize();
  return res;
}

}  // namespace

GuardedFsm fsm_union(const std::vector<GuardedFsm>& ms) {
  if (ms.empty()) throw EmptyInputError("union of zero machines");
  if (ms.size() == 1) return trim(ms.front());

  // linear-size nondeterministic union: a fresh initial state mirrors every
  // machine's initial transitions; the exact union DFA can be exponential
  GuardedFsm res;
  bool init_final = std::any_of(ms.begin(), ms.end(),
                                [](const GuardedFsm& m) { return m.is_final(m.initial); });
  res.add_state(init_final);
  res.initial = 0;
  for (const auto& m : ms) {
    StateId offset = res.num_states();
    for (StateId s = 0; s < m.num_states(); ++s)
      res.add_state(m.is_final(s), m.notes[static_cast<size_t>(s)]);
    for (const auto& t : m.transitions) {
      res.add_transition(t.src + offset, t.label, t.dst + offset);
      if (t.src == m.initial) res.add_transition(0, t.label, t.dst + offset);
    }
  }
  res.normalize();
  return trim(res);
}

GuardedFsm parallel_composition(const std::vector<GuardedFsm>& ms) {
  if (ms.empty()) throw EmptyInputError("parallel composition of zero machines");
  std::map<std::string, size_t> owner;
  for (size_t i = 0; i < ms.size(); ++i)
    for (const auto& t : ms[i].transitions) {
      auto [it, inserted] = owner.emplace(t.label.event, i);
      if (!inserted && it->second != i)
        throw AlphabetOverlapError("template " + t.label.event +
                                   " appears in two composed machines");
    }

  std::vector<std::vector<std::vector<const GuardedTransition*>>> out;
  out.reserve(ms.size());
  for (const auto& m : ms) {
    std::vector<std::vector<const GuardedTransition*>> per(static_cast<size_t>(m.num_states()));
    for (const auto& t : m.transitions) per[static_cast<size_t>(t.src)].push_back(&t);
    out.push_back(std::move(per));
  }

  GuardedFsm res;
  std::unordered_map<std::vector<StateId>, StateId, VecHash> ids;
  std::deque<std::vector<StateId>> queue;
  auto is_accepting = [&](const std::vector<StateId>& tup) {
    for (size_t i = 0; i < ms.size(); ++i)
      if (!ms[i].is_final(tup[i])) return false;
    return true;
  };
  std::vector<StateId> start(ms.size());
  for (size_t i = 0; i < ms.size(); ++i) start[i] = ms[i].initial;
  ids[start] = res.add_state(is_accepting(start));
  res.initial = 0;
  queue.push_back(start);
  while (!queue.empty()) {
    auto tup = queue.front();
    queue.pop_front();
    StateId src = ids[tup];
    for (size_t i = 0; i < ms.size(); ++i) {
      for (const auto* t : out[i][static_cast<size_t>(tup[i])]) {
        auto next = tup;
        next[i] = t->dst;
        auto [it, inserted] = ids.emplace(next, res.num_states());
        if (inserted) {
          res.add_state(is_accepting(next));
          queue.push_back(next);
        }
        res.add_transition(src, t->label, it->second);
      }
    }
  }
  res.normalize();
  return res;
}

namespace {

struct UnionFind {
  std::vector<StateId> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  StateId find(StateId x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  }
  // smaller id becomes the representative
  void unite(StateId a, StateId b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[static_cast<size_t>(b)] = a;
  }
};

MappedFsm compact(const GuardedFsm& m, UnionFind& uf) {
  size_t n = static_cast<size_t>(m.num_states());
  std::vector<StateId> remap(n, -1);
  GuardedFsm res;
  // representatives keep their relative order
  for (size_t s = 0; s < n; ++s) {
    if (uf.find(static_cast<StateId>(s)) == static_cast<StateId>(s))
      remap[s] = res.add_state(false, m.notes[s]);
  }
  for (size_t s = 0; s < n; ++s) {
    StateId root = uf.find(static_cast<StateId>(s));
    if (m.finals[s]) res.set_final(remap[static_cast<size_t>(root)]);
    if (static_cast<StateId>(s) != root && !m.notes[s].empty()) {
      auto& note = res.notes[static_cast<size_t>(remap[static_cast<size_t>(root)])];
      if (note.empty()) note = m.notes[s];
    }
  }
  res.initial = remap[static_cast<size_t>(uf.find(m.initial))];
  for (const auto& t : m.transitions)
    res.add_transition(remap[static_cast<size_t>(uf.find(t.src))], t.label,
                       remap[static_cast<size_t>(uf.find(t.dst))]);
  res.normalize();

  MappedFsm out{std::move(res), {}};
  out.state_map.resize(n);
  for (size_t s = 0; s < n; ++s)
    out.state_map[s] = remap[static_cast<size_t>(uf.find(static_cast<StateId>(s)))];
  return out;
}

}  // namespace

MappedFsm determinize_mapped(const GuardedFsm& m) {
  UnionFind uf(static_cast<size_t>(m.num_states()));
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::pair<StateId, std::string>, StateId> seen;
    for (const auto& t : m.transitions) {
      StateId src = uf.find(t.src), dst = uf.find(t.dst);
      auto key = std::make_pair(src, t.label.key());
      auto [it, inserted] = seen.emplace(key, dst);
      if (!inserted && uf.find(it->second) != dst) {
        uf.unite(it->second, dst);
        changed = true;
      }
    }
  }
  return compact(m, uf);
}

GuardedFsm determinize(const GuardedFsm& m) { return determinize_mapped(m).fsm; }

namespace {

// Classic subset construction, keyed by full label identity.
GuardedFsm subset_determinize(const GuardedFsm& m) {
  std::vector<std::vector<const GuardedTransition*>> out(static_cast<size_t>(m.num_states()));
  for (const auto& t : m.transitions) out[static_cast<size_t>(t.src)].push_back(&t);

  GuardedFsm res;
  std::map<std::vector<StateId>, StateId> ids;
  std::deque<std::vector<StateId>> queue;
  auto is_accepting = [&](const std::vector<StateId>& set) {
    return std::any_of(set.begin(), set.end(), [&](StateId s) { return m.is_final(s); });
  };
  std::vector<StateId> start{m.initial};
  ids[start] = res.add_state(is_accepting(start));
  res.initial = 0;
  queue.push_back(start);
  while (!queue.empty()) {
    auto set = queue.front();
    queue.pop_front();
    StateId src = ids.at(set);
    std::map<std::string, std::pair<Label, std::set<StateId>>> moves;
    for (StateId s : set)
      for (const auto* t : out[static_cast<size_t>(s)]) {
        auto& slot = moves[t->label.key()];
        slot.first = t->label;
        slot.second.insert(t->dst);
      }
    for (auto& [_, slot] : moves) {
      std::vector<StateId> next(slot.second.begin(), slot.second.end());
      auto [it, inserted] = ids.emplace(next, res.num_states());
      if (inserted) {
        res.add_state(is_accepting(next));
        queue.push_back(next);
      }
      res.add_transition(src, slot.first, it->second);
    }
  }
  res.normalize();
  return res;
}

}  // namespace

GuardedFsm minimize(const GuardedFsm& m) {
  GuardedFsm t = trim(m);
  if (!t.is_deterministic()) t = trim(subset_determinize(t));
  size_t n = static_cast<size_t>(t.num_states());
  auto succ = successor_tables(t);
  auto alphabet = t.alphabet();

  // Moore partition refinement with an implicit sink class (-1).
  std::vector<int> cls(n);
  for (size_t s = 0; s < n; ++s) cls[s] = t.finals[s] ? 1 : 0;
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::vector<int>, int> sig_to_class;
    std::vector<int> next_cls(n);
    for (size_t s = 0; s < n; ++s) {
      std::vector<int> sig{cls[s]};
      for (const auto& l : alphabet) {
        auto it = succ[s].find(l.key());
        sig.push_back(it == succ[s].end() ? -1 : cls[static_cast<size_t>(it->second)]);
      }
      auto [it, inserted] = sig_to_class.emplace(sig, static_cast<int>(sig_to_class.size()));
      next_cls[s] = it->second;
    }
    if (next_cls != cls) {
      cls = std::move(next_cls);
      changed = true;
    }
  }

  UnionFind uf(n);
  std::map<int, StateId> first_of;
  for (size_t s = 0; s < n; ++s) {
    auto [it, inserted] = first_of.emplace(cls[s], static_cast<StateId>(s));
    if (!inserted) uf.unite(it->second, static_cast<StateId>(s));
  }
  return compact(t, uf).fsm;
}

std::set<std::vector<std::string>> enumerate_language(const GuardedFsm& m, int max_len,
                                                      std::size_t cap) {
  std::vector<std::vector<const GuardedTransition*>> out(static_cast<size_t>(m.num_states()));
  for (const auto& t : m.transitions) out[static_cast<size_t>(t.src)].push_back(&t);
  for (auto& v : out)
    std::sort(v.begin(), v.end(), [](const GuardedTransition* a, const GuardedTransition* b) {
      return a->label.key() < b->label.key();
    });

  std::set<std::vector<std::string>> lang;
  struct Item {
    StateId state;
    std::vector<std::string> word;
  };
  std::deque<Item> queue{{m.initial, {}}};
  std::size_t explored = 0;
  while (!queue.empty()) {
    auto [state, word] = std::move(queue.front());
    queue.pop_front();
    if (m.is_final(state)) lang.insert(word);
    if (static_cast<int>(word.size()) >= max_len) continue;
    for (const auto* t : out[static_cast<size_t>(state)]) {
      if (++explored > cap)
        throw ExplosionGuardError("language enumeration exceeded cap of " + std::to_string(cap));
      auto next = word;
      next.push_back(t->label.key());
      queue.push_back({t->dst, std::move(next)});
    }
  }
  return lang;
}

LogEntry representative_entry(const Label& label) {
  return LogEntry{0, label.event, label.guard.representative(), 0};
}

std::string to_dot(const GuardedFsm& m) {
  std::ostringstream out;
  out << "digraph gfsm {\n  rankdir=LR;\n  __start [shape=point];\n";
  for (int s = 0; s < m.num_states(); ++s)
    out << "  s" << s << " [shape=" << (m.is_final(s) ? "doublecircle" : "circle") << "];\n";
  out << "  __start -> s" << m.initial << ";\n";
  for (const auto& t : m.transitions)
    out << "  s" << t.src << " -> s" << t.dst << " [label=\"" << t.label.display() << "\"];\n";
  out << "}\n";
  return out.str();
}

std::string to_text(const GuardedFsm& m) {
  nlohmann::json j;
  j["format"] = "gfsm";
  j["version"] = 1;
  j["states"] = m.num_states();
  j["initial"] = m.initial;
  std::vector<int> finals;
  for (int s = 0; s < m.num_states(); ++s)
    if (m.is_final(s)) finals.push_back(s);
  j["finals"] = finals;
  nlohmann::json trans = nlohmann::json::array();
  GuardedFsm copy = m;
  copy.normalize();
  for (const auto& t : copy.transitions) {
    nlohmann::json e;
    e["src"] = t.src;
    e["event"] = t.label.event;
    e["dst"] = t.dst;
    if (t.label.guard.always)
      e["guard"] = nullptr;
    else
      e["guard"] = t.label.guard.valuations;
    trans.push_back(std::move(e));
  }
  j["transitions"] = std::move(trans);
  return j.dump(2) + "\n";
}

GuardedFsm from_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "gfsm" || j.value("version", 0) != 1)
    throw IoError("not a gfsm v1 model file");
  GuardedFsm m;
  int states = j.at("states").get<int>();
  for (int s = 0; s < states; ++s) m.add_state(false);
  m.initial = j.at("initial").get<StateId>();
  for (int s : j.at("finals").get<std::vector<int>>()) m.set_final(s);
  for (const auto& e : j.at("transitions")) {
    Label l;
    l.event = e.at("event").get<std::string>();
    if (!e.at("guard").is_null())
      l.guard = Guard::of(e.at("guard").get<std::vector<std::vector<std::string>>>());
    m.add_transition(e.at("src").get<StateId>(), std::move(l), e.at("dst").get<StateId>());
  }
  m.normalize();
  return m;
}

}  // namespace logstitch

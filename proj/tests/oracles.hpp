#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is deliberately brute-force.

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "logstitch/automata.hpp"

namespace oracles {

using logstitch::GuardedFsm;
using logstitch::Label;
using logstitch::StateId;

// NFA acceptance of a label-key word via subset simulation.
inline bool nfa_accepts(const GuardedFsm& m, const std::vector<std::string>& word) {
  std::set<StateId> cur{m.initial};
  for (const auto& sym : word) {
    std::set<StateId> next;
    for (StateId s : cur)
      for (const auto& t : m.transitions)
        if (t.src == s && t.label.key() == sym) next.insert(t.dst);
    if (next.empty()) return false;
    cur = std::move(next);
  }
  for (StateId s : cur)
    if (m.is_final(s)) return true;
  return false;
}

// All label keys appearing in any of the machines.
inline std::vector<std::string> joint_alphabet(const std::vector<GuardedFsm>& ms) {
  std::set<std::string> keys;
  for (const auto& m : ms)
    for (const auto& t : m.transitions) keys.insert(t.label.key());
  return {keys.begin(), keys.end()};
}

// All words over `alphabet` of length <= max_len satisfying `pred`.
template <typename Pred>
std::set<std::vector<std::string>> filter_words(const std::vector<std::string>& alphabet,
                                                int max_len, Pred pred) {
  std::set<std::vector<std::string>> out;
  std::vector<std::vector<std::string>> frontier{{}};
  for (int len = 0; len <= max_len; ++len) {
    for (const auto& w : frontier)
      if (pred(w)) out.insert(w);
    if (len == max_len) break;
    std::vector<std::vector<std::string>> next;
    for (const auto& w : frontier)
      for (const auto& sym : alphabet) {
        auto x = w;
        x.push_back(sym);
        next.push_back(std::move(x));
      }
    frontier = std::move(next);
  }
  return out;
}

// Bounded language by brute force over the joint alphabet.
inline std::set<std::vector<std::string>> union_language(const std::vector<GuardedFsm>& ms,
                                                         int max_len) {
  return filter_words(joint_alphabet(ms), max_len, [&](const std::vector<std::string>& w) {
    for (const auto& m : ms)
      if (nfa_accepts(m, w)) return true;
    return false;
  });
}

// Interleaving semantics with disjoint event alphabets: a word is accepted
// iff its projection onto each machine's alphabet is accepted by it.
inline bool shuffle_member(const std::vector<GuardedFsm>& ms, const std::vector<std::string>& w) {
  std::map<std::string, size_t> owner;  // label key -> machine
  for (size_t i = 0; i < ms.size(); ++i)
    for (const auto& t : ms[i].transitions) owner[t.label.key()] = i;
  std::vector<std::vector<std::string>> projected(ms.size());
  for (const auto& sym : w) {
    auto it = owner.find(sym);
    if (it == owner.end()) return false;
    projected[it->second].push_back(sym);
  }
  for (size_t i = 0; i < ms.size(); ++i)
    if (!nfa_accepts(ms[i], projected[i])) return false;
  return true;
}

inline std::set<std::vector<std::string>> shuffle_language(const std::vector<GuardedFsm>& ms,
                                                           int max_len) {
  return filter_words(joint_alphabet(ms), max_len,
                      [&](const std::vector<std::string>& w) { return shuffle_member(ms, w); });
}

inline std::set<std::vector<std::string>> nfa_language(const GuardedFsm& m, int max_len) {
  return filter_words(joint_alphabet({m}), max_len,
                      [&](const std::vector<std::string>& w) { return nfa_accepts(m, w); });
}

// Random machine over single-event labels a..a+alpha_size, possibly
// nondeterministic; every state reaches a final one (not guaranteed trim).
inline GuardedFsm random_machine(std::mt19937_64& rng, int max_states, int alpha_size,
                                 char first_event = 'a', bool deterministic = false) {
  GuardedFsm m;
  int n = 2 + static_cast<int>(rng() % static_cast<unsigned long>(max_states - 1));
  for (int s = 0; s < n; ++s) m.add_state(rng() % 3 == 0);
  if (!std::any_of(m.finals.begin(), m.finals.end(), [](char c) { return c != 0; }))
    m.set_final(static_cast<StateId>(rng() % static_cast<unsigned long>(n)));
  std::set<std::pair<StateId, std::string>> used;
  int edges = n + static_cast<int>(rng() % static_cast<unsigned long>(2 * n));
  for (int i = 0; i < edges; ++i) {
    StateId src = static_cast<StateId>(rng() % static_cast<unsigned long>(n));
    StateId dst = static_cast<StateId>(rng() % static_cast<unsigned long>(n));
    Label l;
    l.event = std::string(1, static_cast<char>(first_event + rng() % static_cast<unsigned long>(
                                                                 alpha_size)));
    if (deterministic && !used.insert({src, l.key()}).second) continue;
    m.add_transition(src, l, dst);
  }
  m.normalize();
  return m;
}

}  // namespace oracles

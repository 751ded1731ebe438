#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "logstitch/errors.hpp"
#include "logstitch/log_model.hpp"

namespace logstitch {

/// Transition guard: either always-true or an explicit set of admissible
/// parameter valuations. Identity is syntactic (equal valuation sets).
struct Guard {
  bool always = true;
  std::vector<std::vector<std::string>> valuations;  // sorted, deduped

  static Guard any();
  static Guard exact(std::vector<std::string> valuation);
  static Guard of(std::vector<std::vector<std::string>> valuations);

  bool admits(const std::vector<std::string>& valuation) const;
  std::string key() const;
  // Lexicographically smallest admissible valuation (empty for always).
  const std::vector<std::string>& representative() const;

  bool operator==(const Guard& o) const { return key() == o.key(); }
};

struct Label {
  std::string event;  // template id
  Guard guard;

  std::string key() const { return event + "\x1f" + guard.key(); }
  // Human-readable form, e.g. "tmp1 (X, f0)".
  std::string display() const;
  bool operator==(const Label& o) const { return key() == o.key(); }
  bool operator<(const Label& o) const { return key() < o.key(); }
};

using StateId = int;

struct GuardedTransition {
  StateId src;
  Label label;
  StateId dst;
};

struct GuardedFsm {
  StateId initial = 0;
  std::vector<char> finals;  // indexed by state id
  std::vector<GuardedTransition> transitions;
  std::vector<std::string> notes;  // per-state provenance, debugging only

  int num_states() const { return static_cast<int>(finals.size()); }
  bool is_final(StateId s) const { return finals[static_cast<size_t>(s)] != 0; }
  StateId add_state(bool fin = false, std::string note = {});
  void add_transition(StateId src, Label label, StateId dst);
  void set_final(StateId s, bool fin = true) { finals[static_cast<size_t>(s)] = fin ? 1 : 0; }

  // No two transitions share (source, label key).
  bool is_deterministic() const;
  std::vector<Label> alphabet() const;
  // Canonical ordering of the transition list; makes serialized output stable.
  void normalize();
};

struct RunResult {
  bool accepted = false;
  std::vector<StateId> visited;
  std::optional<std::size_t> failure_index;
};

RunResult accepts(const GuardedFsm& m, std::span<const LogEntry> log);

// Result of an operation that renumbers or merges states.
struct MappedFsm {
  GuardedFsm fsm;
  std::vector<StateId> state_map;  // old id -> new id
};

// Synchronized product over the joint syntactic alphabet (implicit reject
// sink); accepts what any input accepts; unreachable/dead states pruned.
GuardedFsm fsm_union(const std::vector<GuardedFsm>& ms);

// Interleaving product; template alphabets must be pairwise disjoint.
GuardedFsm parallel_composition(const std::vector<GuardedFsm>& ms);

// Merges target states of same-labeled transitions until deterministic.
// May generalize the language.
GuardedFsm determinize(const GuardedFsm& m);
MappedFsm determinize_mapped(const GuardedFsm& m);

// Language-preserving state minimization (partition refinement).
GuardedFsm minimize(const GuardedFsm& m);

// All accepted label-key sequences of length <= max_len. Works for
// nondeterministic machines too (path enumeration).
std::set<std::vector<std::string>> enumerate_language(const GuardedFsm& m, int max_len,
                                                      std::size_t cap = 1000000);

// One concrete log entry per label, using the guard's representative valuation.
LogEntry representative_entry(const Label& label);

std::string to_dot(const GuardedFsm& m);
std::string to_text(const GuardedFsm& m);
GuardedFsm from_text(const std::string& text);

}  // namespace logstitch

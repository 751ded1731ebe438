#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logstitch/automata.hpp"
#include "logstitch/dependency.hpp"
#include "logstitch/log_model.hpp"

namespace logstitch {

/// Per-execution working state: the replay cursor of each component model.
/// Successive slices of the same component continue where the previous one
/// stopped; a fresh context is used for every execution.
struct GraftContext {
  const Execution* exec = nullptr;
  const DependencyMap* deps = nullptr;
  const std::map<std::string, GuardedFsm>* models = nullptr;
  std::map<std::string, StateId> cursors;

  GraftContext(const Execution& e, const DependencyMap& d,
               const std::map<std::string, GuardedFsm>& m)
      : exec(&e), deps(&d), models(&m) {}

  StateId cursor(const std::string& component);
  void set_cursor(const std::string& component, StateId s);
};

// Sub-machine containing exactly the states and transitions traversed while
// replaying `log` from the component's cursor; the last visited state is the
// sole final state. Advances the cursor.
GuardedFsm slice(GraftContext& ctx, const std::string& component, std::span<const LogEntry> log);

// Duplicates gt toward m_y's initial state and re-sources copies of gt's
// target's outgoing transitions from every final state of m_y; originals are
// kept; the result is determinized. Returns the updated machine plus the
// state renumbering.
MappedFsm insert(const GuardedFsm& m_x, const GuardedTransition& gt, const GuardedFsm& m_y);

// Slice plus recursive expansion: every dependent sequence of each log entry
// is grafted, sibling components are parallel-composed, and the composite is
// inserted under the transition reading that entry.
GuardedFsm graft(GraftContext& ctx, const std::string& component, std::span<const LogEntry> log);

struct StitchOptions {
  bool minimize = false;
  std::optional<std::filesystem::path> dump_grafts;  // per-execution machines
};

// Union of the per-execution grafted machines of the main component.
GuardedFsm stitch(const std::vector<Execution>& executions,
                  const std::vector<DependencyMap>& deps,
                  const std::map<std::string, GuardedFsm>& models, const ArchitectureGraph& arch,
                  const StitchOptions& opts = {});

}  // namespace logstitch

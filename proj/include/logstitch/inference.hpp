#pragma once

#include <map>
#include <string>
#include <vector>

#include "logstitch/automata.hpp"
#include "logstitch/log_model.hpp"

namespace logstitch {

struct MergePolicy {
  int k = 2;                  // tail depth for state merging
  int guard_split_limit = 8;  // max distinct valuations before collapsing to an always-true guard
};

/// Per-template guard partition: one singleton guard per observed valuation,
/// or a single always-true guard past the split limit.
using GuardTable = std::map<std::string, std::vector<Guard>>;

GuardTable build_guards(const std::vector<const ComponentLog*>& logs, const TemplateSet& templates,
                        int guard_split_limit);

// The guard class admitting this valuation; always-true if the template is
// collapsed or unknown.
Guard guard_for(const GuardTable& table, const std::string& template_id,
                const std::vector<std::string>& valuation);

Label label_for(const GuardTable& table, const LogEntry& entry);

// Tree-shaped acceptor of exactly the training logs (plus the empty log:
// the root is accepting).
GuardedFsm build_prefix_tree(const std::vector<const ComponentLog*>& logs,
                             const GuardTable& guards);

// Prefix tree + k-tails merging: states with equal sets of accepted tails of
// length <= k are merged, then residual nondeterminism is merged away.
GuardedFsm infer_component_model(const std::vector<const ComponentLog*>& logs,
                                 const TemplateSet& templates, const MergePolicy& policy);

// One model per component, over all executions that have a log for it.
std::map<std::string, GuardedFsm> infer_component_models(const std::vector<Execution>& executions,
                                                         const TemplateSet& templates,
                                                         const MergePolicy& policy);

}  // namespace logstitch

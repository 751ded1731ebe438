#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "logstitch/dependency.hpp"
#include "logstitch/log_model.hpp"

namespace logstitch {

struct GeneratorComponent {
  std::string name;
  int num_states = 5;
  int num_events = 6;
  int num_comm_events = 2;
  int num_param_events = 1;  // events carrying one parameter
  int param_pool = 3;        // distinct values per parameter
};

/// Synthetic ground-truth system: random communicating component machines
/// emitting logs in the standard dataset layout, with the true causal
/// attachments recorded alongside.
struct GeneratorSpec {
  std::vector<GeneratorComponent> components;
  std::vector<std::pair<std::string, std::string>> edges;  // (from, to)
  std::string main;
  int executions = 10;
  int max_trace_len = 30;
  std::int64_t timestamp_step = 1;
  std::int64_t coarsening = 1;    // timestamps floored to multiples of this
  double response_prob = 1.0;     // chance a comm event triggers a dependent
  int max_fan = 3;                // max outgoing edges drawn per machine state
  int max_extras = 2;             // max non-comm entries trailing a response

  static GeneratorSpec load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
};

struct GroundTruth {
  // exec_id -> upstream (component, seq_no) -> dependent segments
  std::map<std::string, std::map<DepKey, std::vector<DepSequence>>> attachments;
};

struct GeneratedDataset {
  std::filesystem::path root;       // contains templates.tsv, arch.txt, dataset/
  GroundTruth truth;
  std::size_t total_entries = 0;
};

// Writes <out_dir>/templates.tsv, arch.txt, truth.json and
// <out_dir>/dataset/<exec_id>/<component>.log.
GeneratedDataset generate(const GeneratorSpec& spec, std::uint64_t seed,
                          const std::filesystem::path& out_dir);

struct RecoveryStats {
  std::size_t truth_relations = 0;
  std::size_t extracted_relations = 0;
  std::size_t matched = 0;

  double mismatch_rate() const;
  bool exact() const;
};

// Compares extracted dependencies against the generator's attachments.
RecoveryStats compare_dependencies(const GroundTruth& truth,
                                   const std::vector<DependencyMap>& extracted);

}  // namespace logstitch

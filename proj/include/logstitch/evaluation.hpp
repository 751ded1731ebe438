#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logstitch/automata.hpp"
#include "logstitch/dependency.hpp"
#include "logstitch/inference.hpp"
#include "logstitch/log_model.hpp"

namespace logstitch {

enum class MutationKind { Swap, Delete, Add };

struct MutationSpec {
  MutationKind kind;
  std::uint64_t seed;
};

// Applies the operator and checks that every label trigram around the
// mutation site (with start/end markers) is absent from all positive logs.
// Returns nothing when the mutant is rejected by that filter.
std::optional<std::vector<LinearEntry>> mutate(const std::vector<LinearEntry>& log,
                                               const std::vector<std::vector<LinearEntry>>& positives,
                                               const MutationSpec& spec);

// Mutation with resampling, up to `retries` fresh draws.
std::optional<std::vector<LinearEntry>> make_negative(
    const std::vector<LinearEntry>& log, const std::vector<std::vector<LinearEntry>>& positives,
    std::uint64_t seed, int retries = 100);

std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed);

struct FoldResult {
  int repeat = 0;
  int fold = 0;
  int tp = 0, fn = 0, tn = 0, fp = 0;
  double prep_seconds = 0.0;
  double stitch_seconds = 0.0;
  int states = 0;
  int transitions = 0;
  bool timed_out = false;

  double recall() const;
  double specificity() const;
};

struct EvalConfig {
  int folds = 10;
  int repeats = 10;
  std::uint64_t seed = 0;
  MergePolicy policy;
  bool minimize = false;
  double fold_timeout_seconds = 86400.0;
  int jobs = 0;             // 0 = hardware concurrency
  bool sanity_mode = false; // train = test, recall must be 1.0
};

struct EvalReport {
  std::string dataset;
  std::size_t total_entries = 0;
  int executions = 0;
  std::vector<FoldResult> folds;

  double mean_recall() const;
  double stddev_recall() const;
  double mean_specificity() const;
  double stddev_specificity() const;
  double mean_states() const;
  double mean_transitions() const;
  double total_prep_seconds() const;
  double total_stitch_seconds() const;

  // One delimiter-separated row per dataset plus a header.
  std::string table() const;
  std::string full_dump() const;
};

EvalReport evaluate(const std::vector<Execution>& dataset, const ArchitectureGraph& arch,
                    const TemplateSet& templates, const EvalConfig& config,
                    const std::string& dataset_name = "dataset");

}  // namespace logstitch

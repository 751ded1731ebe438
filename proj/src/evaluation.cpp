#include "logstitch/evaluation.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "logstitch/stitching.hpp"

namespace logstitch {

namespace {

std::string entry_key(const LinearEntry& e) {
  std::string k = e.entry.template_id;
  for (const auto& p : e.entry.params) k += "\x1f" + p;
  return k;
}

using Trigram = std::array<std::string, 3>;

std::vector<std::string> marked_keys(const std::vector<LinearEntry>& log) {
  std::vector<std::string> keys;
  keys.reserve(log.size() + 2);
  keys.emplace_back("^");
  for (const auto& e : log) keys.push_back(entry_key(e));
  keys.emplace_back("$");
  return keys;
}

std::set<Trigram> positive_trigrams(const std::vector<std::vector<LinearEntry>>& positives) {
  std::set<Trigram> out;
  for (const auto& log : positives) {
    auto keys = marked_keys(log);
    for (size_t i = 0; i + 2 < keys.size(); ++i) out.insert({keys[i], keys[i + 1], keys[i + 2]});
  }
  return out;
}

// True when every trigram of `mutant` touching one of `touched` (indices into
// the marked sequence) is absent from the positives.
bool window_unseen(const std::vector<LinearEntry>& mutant, const std::set<size_t>& touched,
                   const std::set<Trigram>& seen) {
  auto keys = marked_keys(mutant);
  for (size_t i = 0; i + 2 < keys.size(); ++i) {
    bool relevant = touched.count(i) || touched.count(i + 1) || touched.count(i + 2);
    if (!relevant) continue;
    if (seen.count({keys[i], keys[i + 1], keys[i + 2]})) return false;
  }
  return true;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
  return a;
}

}  // namespace

std::optional<std::vector<LinearEntry>> mutate(
    const std::vector<LinearEntry>& log, const std::vector<std::vector<LinearEntry>>& positives,
    const MutationSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  auto seen = positive_trigrams(positives);
  std::vector<LinearEntry> mutant = log;
  std::set<size_t> touched;  // indices into the marker-extended sequence

  switch (spec.kind) {
    case MutationKind::Swap: {
      if (log.size() < 2) return std::nullopt;
      std::uniform_int_distribution<size_t> dist(0, log.size() - 1);
      size_t i = dist(rng), j = dist(rng);
      if (i == j) return std::nullopt;
      std::swap(mutant[i], mutant[j]);
      // keep timestamps in place so the file stays ordered
      std::swap(mutant[i].entry.timestamp, mutant[j].entry.timestamp);
      touched = {i + 1, j + 1};
      break;
    }
    case MutationKind::Delete: {
      if (log.size() < 2) return std::nullopt;
      std::uniform_int_distribution<size_t> dist(0, log.size() - 1);
      size_t i = dist(rng);
      mutant.erase(mutant.begin() + static_cast<std::ptrdiff_t>(i));
      touched = {i, i + 1};  // the junction
      break;
    }
    case MutationKind::Add: {
      if (positives.empty()) return std::nullopt;
      std::uniform_int_distribution<size_t> donor_log(0, positives.size() - 1);
      const auto& donor = positives[donor_log(rng)];
      if (donor.empty()) return std::nullopt;
      std::uniform_int_distribution<size_t> donor_pos(0, donor.size() - 1);
      LinearEntry extra = donor[donor_pos(rng)];
      std::uniform_int_distribution<size_t> dist(0, log.size());
      size_t i = dist(rng);
      // reuse a neighbour's timestamp so ordering stays plausible
      extra.entry.timestamp =
          i < log.size() ? log[i].entry.timestamp : (log.empty() ? 0 : log.back().entry.timestamp);
      mutant.insert(mutant.begin() + static_cast<std::ptrdiff_t>(i), std::move(extra));
      touched = {i + 1};
      break;
    }
  }
  if (!window_unseen(mutant, touched, seen)) return std::nullopt;
  return mutant;
}

std::optional<std::vector<LinearEntry>> make_negative(
    const std::vector<LinearEntry>& log, const std::vector<std::vector<LinearEntry>>& positives,
    std::uint64_t seed, int retries) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < retries; ++attempt) {
    MutationSpec spec;
    spec.kind = static_cast<MutationKind>(rng() % 3);
    spec.seed = rng();
    if (auto mutant = mutate(log, positives, spec)) return mutant;
  }
  return std::nullopt;
}

std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed) {
  if (k < 2) throw TooFewExecutionsError("need at least 2 folds");
  if (n < k) throw TooFewExecutionsError("need at least " + std::to_string(k) + " executions for " +
                                         std::to_string(k) + "-fold cross validation");
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> folds(static_cast<size_t>(k));
  for (size_t i = 0; i < order.size(); ++i) folds[i % static_cast<size_t>(k)].push_back(order[i]);
  return folds;
}

double FoldResult::recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
double FoldResult::specificity() const { return tn + fp == 0 ? 0.0 : double(tn) / double(tn + fp); }

namespace {

struct Agg {
  double mean = 0.0, stddev = 0.0;
};

Agg aggregate(const std::vector<double>& xs) {
  Agg a;
  if (xs.empty()) return a;
  a.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - a.mean) * (x - a.mean);
  a.stddev = xs.size() > 1 ? std::sqrt(var / double(xs.size() - 1)) : 0.0;
  return a;
}

// One recall/specificity value per repeat, from the repeat's pooled counts.
std::vector<double> per_repeat(const std::vector<FoldResult>& folds, bool want_recall) {
  std::map<int, std::array<long, 4>> counts;  // repeat -> tp, fn, tn, fp
  for (const auto& f : folds) {
    if (f.timed_out) continue;
    auto& c = counts[f.repeat];
    c[0] += f.tp;
    c[1] += f.fn;
    c[2] += f.tn;
    c[3] += f.fp;
  }
  std::vector<double> out;
  for (const auto& [_, c] : counts) {
    long num = want_recall ? c[0] : c[2];
    long den = want_recall ? c[0] + c[1] : c[2] + c[3];
    if (den > 0) out.push_back(double(num) / double(den));
  }
  return out;
}

}  // namespace

double EvalReport::mean_recall() const { return aggregate(per_repeat(folds, true)).mean; }
double EvalReport::stddev_recall() const { return aggregate(per_repeat(folds, true)).stddev; }
double EvalReport::mean_specificity() const { return aggregate(per_repeat(folds, false)).mean; }
double EvalReport::stddev_specificity() const {
  return aggregate(per_repeat(folds, false)).stddev;
}

double EvalReport::mean_states() const {
  std::vector<double> xs;
  for (const auto& f : folds)
    if (!f.timed_out) xs.push_back(f.states);
  return aggregate(xs).mean;
}

double EvalReport::mean_transitions() const {
  std::vector<double> xs;
  for (const auto& f : folds)
    if (!f.timed_out) xs.push_back(f.transitions);
  return aggregate(xs).mean;
}

double EvalReport::total_prep_seconds() const {
  double s = 0.0;
  for (const auto& f : folds) s += f.prep_seconds;
  return s;
}

double EvalReport::total_stitch_seconds() const {
  double s = 0.0;
  for (const auto& f : folds) s += f.stitch_seconds;
  return s;
}

std::string EvalReport::table() const {
  std::ostringstream out;
  out << "dataset\tentries\texecs\tstates\ttransitions\tprep_s\tstitch_s\ttotal_s\trecall\t"
         "recall_sd\tspecificity\tspecificity_sd\n";
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s\t%zu\t%d\t%.1f\t%.1f\t%.2f\t%.2f\t%.2f\t%.4f\t%.4f\t%.4f\t%.4f\n",
                dataset.c_str(), total_entries, executions, mean_states(), mean_transitions(),
                total_prep_seconds(), total_stitch_seconds(),
                total_prep_seconds() + total_stitch_seconds(), mean_recall(), stddev_recall(),
                mean_specificity(), stddev_specificity());
  out << buf;
  return out.str();
}

std::string EvalReport::full_dump() const {
  std::ostringstream out;
  out << "repeat\tfold\ttp\tfn\ttn\tfp\trecall\tspecificity\tstates\ttransitions\tprep_s\t"
         "stitch_s\ttimed_out\n";
  for (const auto& f : folds) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d\t%d\t%d\t%d\t%d\t%d\t%.4f\t%.4f\t%d\t%d\t%.3f\t%.3f\t%d\n",
                  f.repeat, f.fold, f.tp, f.fn, f.tn, f.fp, f.recall(), f.specificity(), f.states,
                  f.transitions, f.prep_seconds, f.stitch_seconds, f.timed_out ? 1 : 0);
    out << buf;
  }
  return out.str();
}

namespace {

struct FoldTask {
  int repeat;
  int fold;
  std::vector<int> train;
  std::vector<int> test;
  std::uint64_t seed;
};

FoldResult run_fold(const FoldTask& task, const std::vector<Execution>& dataset,
                    const ArchitectureGraph& arch, const TemplateSet& templates,
                    const EvalConfig& config,
                    const std::vector<std::vector<LinearEntry>>& repeat_positives) {
  using clock = std::chrono::steady_clock;
  FoldResult r;
  r.repeat = task.repeat;
  r.fold = task.fold;

  auto t0 = clock::now();
  std::vector<Execution> train;
  train.reserve(task.train.size());
  for (int i : task.train) train.push_back(dataset[static_cast<size_t>(i)]);
  std::vector<DependencyMap> train_deps;
  train_deps.reserve(train.size());
  for (const auto& exec : train) train_deps.push_back(extract_dependencies(exec, arch, templates));
  auto models = infer_component_models(train, templates, config.policy);
  auto t1 = clock::now();
  r.prep_seconds = std::chrono::duration<double>(t1 - t0).count();

  StitchOptions opts;
  opts.minimize = config.minimize;
  GuardedFsm sys = stitch(train, train_deps, models, arch, opts);
  auto t2 = clock::now();
  r.stitch_seconds = std::chrono::duration<double>(t2 - t1).count();
  r.states = sys.num_states();
  r.transitions = static_cast<int>(sys.transitions.size());
  if (r.prep_seconds + r.stitch_seconds > config.fold_timeout_seconds) {
    r.timed_out = true;
    return r;
  }

  for (size_t idx = 0; idx < task.test.size(); ++idx) {
    const auto& positive = repeat_positives[static_cast<size_t>(task.test[idx])];
    auto entries = strip_components(positive);
    if (accepts(sys, entries).accepted)
      r.tp++;
    else
      r.fn++;

    auto negative =
        make_negative(positive, repeat_positives, mix(task.seed, 0x4e65 + idx), 100);
    if (!negative) {
      std::cerr << "warning: repeat " << task.repeat << " fold " << task.fold
                << ": no valid negative after 100 retries; sample skipped\n";
      continue;
    }
    auto neg_entries = strip_components(*negative);
    if (accepts(sys, neg_entries).accepted)
      r.fp++;
    else
      r.tn++;
  }
  return r;
}

}  // namespace

EvalReport evaluate(const std::vector<Execution>& dataset, const ArchitectureGraph& arch,
                    const TemplateSet& templates, const EvalConfig& config,
                    const std::string& dataset_name) {
  if (dataset.empty()) throw TooFewExecutionsError("empty dataset");
  EvalReport report;
  report.dataset = dataset_name;
  report.executions = static_cast<int>(dataset.size());
  for (const auto& exec : dataset) report.total_entries += exec.total_entries();

  // one seeded system-level log per execution, refreshed each repeat
  std::vector<DependencyMap> all_deps;
  all_deps.reserve(dataset.size());
  for (const auto& exec : dataset) all_deps.push_back(extract_dependencies(exec, arch, templates));

  int jobs = config.jobs > 0 ? config.jobs
                             : std::max(1u, std::thread::hardware_concurrency());

  for (int rep = 0; rep < config.repeats; ++rep) {
    std::uint64_t rep_seed = mix(config.seed, 0x5265ull + static_cast<std::uint64_t>(rep));

    std::vector<std::vector<LinearEntry>> positives;
    positives.reserve(dataset.size());
    for (size_t i = 0; i < dataset.size(); ++i)
      positives.push_back(
          linearize_seeded(dataset[i], all_deps[i], arch, mix(rep_seed, 0x4c69ull + i)));

    std::vector<FoldTask> tasks;
    if (config.sanity_mode) {
      FoldTask t;
      t.repeat = rep;
      t.fold = 0;
      for (int i = 0; i < static_cast<int>(dataset.size()); ++i) {
        t.train.push_back(i);
        t.test.push_back(i);
      }
      t.seed = mix(rep_seed, 1);
      tasks.push_back(std::move(t));
    } else {
      auto folds = kfold_split(static_cast<int>(dataset.size()), config.folds, rep_seed);
      for (size_t f = 0; f < folds.size(); ++f) {
        FoldTask t;
        t.repeat = rep;
        t.fold = static_cast<int>(f);
        t.test = folds[f];
        for (size_t g = 0; g < folds.size(); ++g)
          if (g != f) t.train.insert(t.train.end(), folds[g].begin(), folds[g].end());
        std::sort(t.train.begin(), t.train.end());
        t.seed = mix(rep_seed, 0x466f6c64ull + f);
        tasks.push_back(std::move(t));
      }
    }

    for (size_t start = 0; start < tasks.size(); start += static_cast<size_t>(jobs)) {
      size_t end = std::min(tasks.size(), start + static_cast<size_t>(jobs));
      std::vector<std::future<FoldResult>> futures;
      for (size_t i = start; i < end; ++i)
        futures.push_back(std::async(std::launch::async, [&, i] {
          return run_fold(tasks[i], dataset, arch, templates, config, positives);
        }));
      for (auto& f : futures) report.folds.push_back(f.get());
    }
  }
  return report;
}

}  // namespace logstitch

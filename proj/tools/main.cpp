#include <chrono>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "logstitch/automata.hpp"
#include "logstitch/dependency.hpp"
#include "logstitch/evaluation.hpp"
#include "logstitch/generator.hpp"
#include "logstitch/inference.hpp"
#include "logstitch/log_model.hpp"
#include "logstitch/stitching.hpp"

namespace {

using namespace logstitch;

struct CommonOpts {
  std::string dataset;
  std::string templates;
  std::string arch;
  std::string out = ".";
  int k = 2;
  int guard_split_limit = 8;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--dataset", opts.dataset, "dataset directory (one subdir per execution)")
      ->required();
  cmd->add_option("--templates", opts.templates, "event template file")->required();
  cmd->add_option("--arch", opts.arch, "architecture file")->required();
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--k", opts.k, "state-merging tail depth");
  cmd->add_option("--guard-split-limit", opts.guard_split_limit,
                  "max distinct valuations before a guard collapses to always-true");
}

struct Loaded {
  TemplateSet templates;
  ArchitectureGraph arch;
  std::vector<Execution> executions;
};

Loaded load_inputs(const CommonOpts& opts) {
  Loaded in;
  in.templates = TemplateSet::load(opts.templates);
  in.arch = ArchitectureGraph::load(opts.arch);
  in.executions = load_dataset(opts.dataset, in.templates);
  return in;
}

int cmd_infer(const CommonOpts& opts, bool minimize_flag, const std::string& dump_grafts,
              const std::string& format) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  Loaded in = load_inputs(opts);
  std::cerr << "loaded " << in.executions.size() << " executions\n";

  std::vector<DependencyMap> deps;
  deps.reserve(in.executions.size());
  for (const auto& exec : in.executions)
    deps.push_back(extract_dependencies(exec, in.arch, in.templates));
  MergePolicy policy{opts.k, opts.guard_split_limit};
  auto models = infer_component_models(in.executions, in.templates, policy);
  auto t1 = clock::now();
  std::cerr << "inferred " << models.size() << " component models\n";

  StitchOptions sopts;
  sopts.minimize = minimize_flag;
  if (!dump_grafts.empty()) sopts.dump_grafts = dump_grafts;
  GuardedFsm sys = stitch(in.executions, deps, models, in.arch, sopts);
  auto t2 = clock::now();

  std::filesystem::create_directories(opts.out);
  if (format == "model" || format == "both") {
    std::ofstream out(std::filesystem::path(opts.out) / "model.json");
    out << to_text(sys);
  }
  if (format == "dot" || format == "both") {
    std::ofstream out(std::filesystem::path(opts.out) / "model.dot");
    out << to_dot(sys);
  }
  double prep = std::chrono::duration<double>(t1 - t0).count();
  double st = std::chrono::duration<double>(t2 - t1).count();
  {
    std::ofstream out(std::filesystem::path(opts.out) / "stats.tsv");
    out << "states\ttransitions\tprep_s\tstitch_s\ttotal_s\n"
        << sys.num_states() << '\t' << sys.transitions.size() << '\t' << prep << '\t' << st << '\t'
        << prep + st << '\n';
  }
  std::cerr << "model: " << sys.num_states() << " states, " << sys.transitions.size()
            << " transitions (prep " << prep << "s, stitch " << st << "s)\n";
  return 0;
}

int cmd_eval(const CommonOpts& opts, const EvalConfig& base_config) {
  Loaded in = load_inputs(opts);
  EvalConfig config = base_config;
  config.policy = MergePolicy{opts.k, opts.guard_split_limit};
  auto report = evaluate(in.executions, in.arch, in.templates, config,
                         std::filesystem::path(opts.dataset).filename().string());
  std::filesystem::create_directories(opts.out);
  {
    std::ofstream out(std::filesystem::path(opts.out) / "report.tsv");
    out << report.table();
  }
  {
    std::ofstream out(std::filesystem::path(opts.out) / "report_full.tsv");
    out << report.full_dump();
  }
  std::cerr << report.table();
  return 0;
}

int cmd_deps(const CommonOpts& opts) {
  Loaded in = load_inputs(opts);
  std::filesystem::create_directories(opts.out);
  std::ofstream out(std::filesystem::path(opts.out) / "deps.txt");
  for (const auto& exec : in.executions)
    out << format_dependency_map(extract_dependencies(exec, in.arch, in.templates));
  std::cerr << "wrote dependency dump for " << in.executions.size() << " executions\n";
  return 0;
}

int cmd_generate(const std::string& spec_file, std::uint64_t seed, const std::string& out_dir) {
  auto spec = GeneratorSpec::load(spec_file);
  auto dataset = generate(spec, seed, out_dir);
  std::cerr << "generated " << spec.executions << " executions, " << dataset.total_entries
            << " entries in " << out_dir << "\n";
  return 0;
}

int cmd_accepts(const std::string& model_file, const std::string& templates_file,
                const std::string& log_file) {
  std::ifstream mf(model_file);
  if (!mf) throw IoError("cannot open model " + model_file);
  std::string text((std::istreambuf_iterator<char>(mf)), std::istreambuf_iterator<char>());
  GuardedFsm model = from_text(text);
  TemplateSet templates = TemplateSet::load(templates_file);

  std::ifstream lf(log_file);
  if (!lf) throw IoError("cannot open log " + log_file);
  std::vector<LogEntry> entries;
  std::string line;
  while (std::getline(lf, line)) {
    if (line.empty()) continue;
    auto m = match_entry(line, templates);
    entries.push_back({m.timestamp, m.template_id, std::move(m.params),
                       static_cast<int>(entries.size())});
  }
  auto r = accepts(model, entries);
  if (r.accepted) {
    std::cout << "accepted\n";
    return 0;
  }
  std::cout << "rejected at entry " << (r.failure_index ? *r.failure_index : entries.size())
            << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infer a system-level guarded FSM from per-component execution logs"};
  app.require_subcommand(1);

  CommonOpts infer_opts;
  bool minimize_flag = false;
  std::string dump_grafts;
  std::string format = "both";
  auto* infer = app.add_subcommand("infer", "infer the stitched system model");
  add_common(infer, infer_opts);
  infer->add_flag("--minimize", minimize_flag, "minimize the final model");
  infer->add_option("--dump-grafts", dump_grafts, "dump per-execution machines to this directory");
  infer->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"dot", "model", "both"}));

  CommonOpts eval_opts;
  EvalConfig eval_config;
  bool sanity = false;
  auto* eval = app.add_subcommand("eval", "k-fold recall/specificity evaluation");
  add_common(eval, eval_opts);
  eval->add_option("--folds", eval_config.folds, "cross-validation folds");
  eval->add_option("--repeats", eval_config.repeats, "full CV repetitions");
  eval->add_option("--seed", eval_config.seed, "master seed");
  eval->add_option("--timeout", eval_config.fold_timeout_seconds, "per-fold timeout in seconds");
  eval->add_option("--jobs", eval_config.jobs, "max parallel folds (0 = all cores)");
  eval->add_flag("--minimize", eval_config.minimize, "minimize per-fold models");
  eval->add_flag("--sanity", sanity, "train = test sanity mode");

  CommonOpts deps_opts;
  auto* deps = app.add_subcommand("deps", "dump extracted dependencies per execution");
  add_common(deps, deps_opts);

  std::string gen_spec, gen_out = "generated";
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate", "emit a synthetic ground-truth dataset");
  gen->add_option("--spec", gen_spec, "generator spec file")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output directory");

  std::string acc_model, acc_templates, acc_log;
  auto* acc = app.add_subcommand("accepts", "check one system-level log against a saved model");
  acc->add_option("--model", acc_model, "model file")->required();
  acc->add_option("--templates", acc_templates, "event template file")->required();
  acc->add_option("--log", acc_log, "system-level log file")->required();

  try {
    app.parse(argc, argv);
    if (*infer) return cmd_infer(infer_opts, minimize_flag, dump_grafts, format);
    if (*eval) {
      eval_config.sanity_mode = sanity;
      return cmd_eval(eval_opts, eval_config);
    }
    if (*deps) return cmd_deps(deps_opts);
    if (*gen) return cmd_generate(gen_spec, gen_seed, gen_out);
    if (*acc) return cmd_accepts(acc_model, acc_templates, acc_log);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const logstitch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

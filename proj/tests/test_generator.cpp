#include "doctest.h"
#include "logstitch/generator.hpp"

#include <filesystem>
#include <fstream>

using namespace logstitch;

namespace {

GeneratorSpec small_spec() {
  GeneratorSpec spec;
  spec.components = {{"ROOT", 4, 5, 2, 1, 3}, {"MID", 4, 5, 2, 1, 3}, {"LEAF", 3, 4, 2, 0, 0}};
  spec.edges = {{"ROOT", "MID"}, {"MID", "LEAF"}};
  spec.main = "ROOT";
  spec.executions = 6;
  spec.max_trace_len = 12;
  return spec;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("logstitch_gen_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("generated datasets parse back through the standard loaders") {
  auto dir = scratch("roundtrip");
  auto dataset = generate(small_spec(), 7, dir);
  CHECK(dataset.total_entries > 0);

  auto templates = TemplateSet::load(dir / "templates.tsv");
  auto arch = ArchitectureGraph::load(dir / "arch.txt");
  CHECK(arch.main == "ROOT");
  auto execs = load_dataset(dir / "dataset", templates);
  CHECK(execs.size() == 6);
  std::size_t total = 0;
  for (const auto& e : execs) total += e.total_entries();
  CHECK(total == dataset.total_entries);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dependency extraction recovers the ground truth exactly at coarsening 1") {
  auto dir = scratch("exact");
  auto spec = small_spec();
  auto dataset = generate(spec, 21, dir);

  auto templates = TemplateSet::load(dir / "templates.tsv");
  auto arch = ArchitectureGraph::load(dir / "arch.txt");
  auto execs = load_dataset(dir / "dataset", templates);
  std::vector<DependencyMap> extracted;
  for (const auto& e : execs) extracted.push_back(extract_dependencies(e, arch, templates));

  auto stats = compare_dependencies(dataset.truth, extracted);
  CHECK(stats.truth_relations > 0);
  CHECK(stats.exact());
  CHECK(stats.mismatch_rate() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("coarsened timestamps degrade dependency recovery measurably") {
  auto dir = scratch("coarse");
  auto spec = small_spec();
  spec.coarsening = 4;
  spec.executions = 10;
  spec.max_trace_len = 20;
  auto dataset = generate(spec, 21, dir);

  auto templates = TemplateSet::load(dir / "templates.tsv");
  auto arch = ArchitectureGraph::load(dir / "arch.txt");
  auto execs = load_dataset(dir / "dataset", templates);
  std::vector<DependencyMap> extracted;
  for (const auto& e : execs) extracted.push_back(extract_dependencies(e, arch, templates));

  auto stats = compare_dependencies(dataset.truth, extracted);
  CHECK(stats.truth_relations > 0);
  CHECK(stats.mismatch_rate() > 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("generation is deterministic per seed") {
  auto d1 = scratch("det1");
  auto d2 = scratch("det2");
  generate(small_spec(), 13, d1);
  generate(small_spec(), 13, d2);

  for (const auto& entry : std::filesystem::recursive_directory_iterator(d1)) {
    if (!entry.is_regular_file()) continue;
    auto rel = std::filesystem::relative(entry.path(), d1);
    std::ifstream a(entry.path()), b(d2 / rel);
    REQUIRE(b.good());
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("single component with no edges yields no dependencies") {
  auto dir = scratch("solo");
  GeneratorSpec spec;
  spec.components = {{"ONLY", 3, 4, 1, 0, 0}};
  spec.main = "ONLY";
  spec.executions = 3;
  spec.max_trace_len = 8;
  auto dataset = generate(spec, 3, dir);
  CHECK(dataset.truth.attachments.size() == 3);
  for (const auto& [_, rels] : dataset.truth.attachments) CHECK(rels.empty());

  auto templates = TemplateSet::load(dir / "templates.tsv");
  auto arch = ArchitectureGraph::load(dir / "arch.txt");
  auto execs = load_dataset(dir / "dataset", templates);
  for (const auto& e : execs)
    CHECK(extract_dependencies(e, arch, templates).relation_count() == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("generator spec round-trips through JSON") {
  auto spec = small_spec();
  spec.coarsening = 2;
  spec.response_prob = 0.75;
  spec.max_fan = 2;
  spec.max_extras = 1;
  auto file = std::filesystem::temp_directory_path() / "logstitch_spec.json";
  spec.save(file);
  auto back = GeneratorSpec::load(file);
  CHECK(back.components.size() == spec.components.size());
  CHECK(back.edges == spec.edges);
  CHECK(back.main == spec.main);
  CHECK(back.executions == spec.executions);
  CHECK(back.coarsening == spec.coarsening);
  CHECK(back.response_prob == spec.response_prob);
  CHECK(back.max_fan == spec.max_fan);
  CHECK(back.max_extras == spec.max_extras);
  std::filesystem::remove(file);
}

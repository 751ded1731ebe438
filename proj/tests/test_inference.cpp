#include "doctest.h"
#include "logstitch/inference.hpp"
#include "oracles.hpp"

#include <filesystem>

using namespace logstitch;

namespace {

const std::filesystem::path kFixture = std::filesystem::path(FIXTURES_DIR) / "running_example";

ComponentLog make_log(const std::string& component,
                      const std::vector<std::pair<std::string, std::vector<std::string>>>& entries) {
  ComponentLog log;
  log.component = component;
  for (size_t i = 0; i < entries.size(); ++i)
    log.entries.push_back({static_cast<std::int64_t>(i), entries[i].first, entries[i].second,
                           static_cast<int>(i)});
  return log;
}

std::vector<std::string> word(const std::vector<Label>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) out.push_back(l.key());
  return out;
}

}  // namespace

TEST_CASE("guard tables split per observed valuation up to the limit") {
  TemplateSet set = TemplateSet::load(kFixture / "templates.tsv");
  auto log = make_log("TC", {{"tmp1", {"X", "f0"}}, {"tmp1", {"Y", "f1"}}, {"tmp2", {}}});
  auto table = build_guards({&log}, set, 8);
  REQUIRE(table.count("tmp1"));
  CHECK(table.at("tmp1").size() == 2);
  CHECK(guard_for(table, "tmp1", {"X", "f0"}) == Guard::exact({"X", "f0"}));
  CHECK(guard_for(table, "tmp2", {}) == Guard::any());       // zero-param template
  CHECK(guard_for(table, "tmp1", {"Z", "f9"}) == Guard::any());  // unseen valuation

  auto collapsed = build_guards({&log}, set, 1);  // 2 valuations > limit 1
  CHECK(collapsed.at("tmp1").size() == 1);
  CHECK(collapsed.at("tmp1")[0].always);
}

TEST_CASE("prefix tree accepts exactly the training logs plus the empty log") {
  TemplateSet set = TemplateSet::load(kFixture / "templates.tsv");
  auto a = make_log("TC", {{"tmp1", {"X", "f0"}}, {"tmp2", {}}});
  auto b = make_log("TC", {{"tmp1", {"Y", "f1"}}, {"tmp3", {}}});
  auto guards = build_guards({&a, &b}, set, 8);
  auto pta = build_prefix_tree({&a, &b}, guards);

  CHECK(pta.is_deterministic());
  CHECK(pta.is_final(pta.initial));  // epsilon accepted
  auto lang = enumerate_language(pta, 4);
  CHECK(lang.size() == 3);  // epsilon + two logs
  CHECK(lang.count(word({{"tmp1", Guard::exact({"X", "f0"})}, {"tmp2", Guard::any()}})) == 1);
  CHECK(lang.count(word({{"tmp1", Guard::exact({"Y", "f1"})}, {"tmp3", Guard::any()}})) == 1);
}

TEST_CASE("k-tails folds repeated behaviour into loops") {
  TemplateSet set;
  set.add({"a", tokenize("a"), 0, true});
  set.add({"b", tokenize("b"), 0, true});
  // logs a b, a b a b: with k=2 the states after 'b' share tails -> loop
  auto l1 = make_log("C", {{"a", {}}, {"b", {}}});
  auto l2 = make_log("C", {{"a", {}}, {"b", {}}, {"a", {}}, {"b", {}}});
  auto m = infer_component_model({&l1, &l2}, set, MergePolicy{2, 8});
  CHECK(m.is_deterministic());

  auto key = [](const char* e) { return Label{e, Guard::any()}.key(); };
  auto lang = enumerate_language(m, 8);
  CHECK(lang.count({key("a"), key("b")}) == 1);
  CHECK(lang.count({key("a"), key("b"), key("a"), key("b")}) == 1);
  // generalization: three rounds accepted through the merged loop
  CHECK(lang.count({key("a"), key("b"), key("a"), key("b"), key("a"), key("b")}) == 1);
  CHECK(lang.count({key("b")}) == 0);
  CHECK(lang.count({key("a"), key("a")}) == 0);
}

TEST_CASE("larger k merges less: language shrinks monotonically in k") {
  TemplateSet set;
  set.add({"a", tokenize("a"), 0, true});
  set.add({"b", tokenize("b"), 0, true});
  set.add({"c", tokenize("c"), 0, true});
  auto l1 = make_log("C", {{"a", {}}, {"b", {}}, {"c", {}}});
  auto l2 = make_log("C", {{"b", {}}, {"b", {}}, {"c", {}}});
  auto m1 = infer_component_model({&l1, &l2}, set, MergePolicy{1, 8});
  auto m3 = infer_component_model({&l1, &l2}, set, MergePolicy{3, 8});
  auto lang1 = enumerate_language(m1, 5);
  auto lang3 = enumerate_language(m3, 5);
  for (const auto& w : lang3) CHECK(lang1.count(w) == 1);
}

TEST_CASE("component models replay their own training logs") {
  TemplateSet set = TemplateSet::load(kFixture / "templates.tsv");
  auto execs = load_dataset(kFixture / "dataset", set);
  auto models = infer_component_models(execs, set, MergePolicy{});
  CHECK(models.size() == 4);
  for (const auto& exec : execs)
    for (const auto& [component, log] : exec.logs) {
      auto r = accepts(models.at(component), log.entries);
      CHECK(r.accepted);
    }
  CHECK_THROWS_AS(infer_component_models({}, set, MergePolicy{}), TooFewExecutionsError);
  CHECK_THROWS_AS(infer_component_model({}, set, MergePolicy{}), EmptyInputError);
}

TEST_CASE("inference output is deterministic across runs") {
  TemplateSet set = TemplateSet::load(kFixture / "templates.tsv");
  auto execs = load_dataset(kFixture / "dataset", set);
  auto a = infer_component_models(execs, set, MergePolicy{});
  auto b = infer_component_models(execs, set, MergePolicy{});
  for (const auto& [component, m] : a) CHECK(to_text(m) == to_text(b.at(component)));
}

#include "fairpsy/dataset.hpp"
#include "fairpsy/featurize.hpp"
#include "fairpsy/synth.hpp"

#include <doctest.h>

#include <map>
#include <numeric>
#include <random>
#include <set>

using namespace fairpsy;

namespace {

Table people() {
  Table t("people", {{"pid", ColumnKind::identifier},
                     {"gender", ColumnKind::categorical},
                     {"age", ColumnKind::integer},
                     {"score", ColumnKind::floating},
                     {"smoker", ColumnKind::boolean},
                     {"outcome", ColumnKind::boolean}});
  t.add_row({std::string("1"), std::string("man"), std::int64_t{30}, 0.5, true, true});
  t.add_row({std::string("2"), std::string("woman"), std::int64_t{41}, 1.5, false, false});
  t.add_row({std::string("3"), std::string("man"), std::int64_t{52}, -2.0, false, false});
  t.add_row({std::string("3"), std::string("woman"), std::int64_t{63}, 4.25, true, true});
  return t;
}

LabelingSpec people_spec() { return {"outcome", "gender", "pid", "man", "true"}; }

void check_partition(const std::vector<IndexVector>& parts, const std::vector<std::string>& groups) {
  std::vector<int> seen(groups.size(), 0);
  std::map<std::string, std::size_t> owner;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    CHECK(!parts[p].empty());
    for (Eigen::Index r : parts[p]) {
      ++seen[static_cast<std::size_t>(r)];
      auto [it, inserted] = owner.emplace(groups[static_cast<std::size_t>(r)], p);
      CHECK(it->second == p);
    }
  }
  for (int s : seen) CHECK(s == 1);
}

}  // namespace

TEST_CASE("to_labeled maps the privileged value to 1") {
  const LabeledDataset ds = to_labeled(people(), people_spec());
  CHECK(ds.n_rows() == 4);
  CHECK(ds.protected_attr() == Eigen::Vector4i(1, 0, 1, 0));
  CHECK(ds.labels() == Eigen::Vector4i(1, 0, 0, 1));
  CHECK(ds.weights() == Vector::Ones(4));
  CHECK(ds.feature_names() == std::vector<std::string>{"age", "score", "smoker"});
  CHECK(ds.group_ids() == std::vector<std::string>{"1", "2", "3", "3"});
}

TEST_CASE("to_labeled reconstruction is lossless for numeric and boolean columns") {
  const Table t = people();
  const LabeledDataset ds = to_labeled(t, people_spec());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    CHECK(static_cast<std::int64_t>(ds.features()(row, 0)) == *cell_int(t.at(r, 2)));
    CHECK(ds.features()(row, 1) == *cell_number(t.at(r, 3)));
    CHECK((ds.features()(row, 2) == 1.0) == *cell_bool(t.at(r, 4)));
    CHECK((ds.labels()[row] == 1) == *cell_bool(t.at(r, 5)));
    CHECK((ds.protected_attr()[row] == 1) == (*cell_string(t.at(r, 1)) == "man"));
  }
}

TEST_CASE("to_labeled errors") {
  Table same("s", people().columns());
  same.add_row({std::string("1"), std::string("man"), std::int64_t{1}, 0.0, true, true});
  same.add_row({std::string("2"), std::string("man"), std::int64_t{1}, 0.0, true, false});
  CHECK_THROWS_AS(to_labeled(same, people_spec()), DataError);

  Table three = people();
  three.add_row({std::string("4"), std::string("other"), std::int64_t{1}, 0.0, true, true});
  CHECK_THROWS_AS(to_labeled(three, people_spec()), DataError);

  Table missing = people();
  missing.add_row({std::string("4"), std::string("man"), Cell{}, 0.0, true, true});
  CHECK_THROWS_AS(to_labeled(missing, people_spec()), DataError);

  Table no_group = people();
  no_group.add_row({Cell{}, std::string("man"), std::int64_t{1}, 0.0, true, true});
  CHECK_THROWS_AS(to_labeled(no_group, people_spec()), DataError);

  LabelingSpec bad = people_spec();
  bad.label_col = "nope";
  CHECK_THROWS_AS(to_labeled(people(), bad), DataError);

  Table categorical("c", {{"pid", ColumnKind::identifier}, {"gender", ColumnKind::categorical},
                          {"colour", ColumnKind::categorical}, {"outcome", ColumnKind::boolean}});
  categorical.add_row({std::string("1"), std::string("man"), std::string("red"), true});
  categorical.add_row({std::string("2"), std::string("woman"), std::string("blue"), false});
  CHECK_THROWS_AS(to_labeled(categorical, people_spec()), DataError);
}

TEST_CASE("the feature table without label, protected and group columns has 35 features") {
  SynthConfig cfg;
  cfg.n_patients = 150;
  const Table features = with_binary_target(assemble(generate(cfg), DoseTable()).features);
  LabelingSpec spec{"Target", "Gender", "Patient ID", "man", "true"};
  CHECK(to_labeled(features, spec).n_features() == 35);
  spec.protected_as_feature = true;
  CHECK(to_labeled(features, spec).n_features() == 36);
}

TEST_CASE("LabeledDataset invariants") {
  const Matrix x = Matrix::Zero(2, 1);
  const std::vector<std::string> g = {"a", "b"};
  CHECK_THROWS_AS(LabeledDataset(x, {"f"}, Eigen::Vector2i(0, 2), Eigen::Vector2i(0, 1), g), DataError);
  CHECK_THROWS_AS(LabeledDataset(x, {"f"}, Eigen::Vector2i(0, 1), Eigen::Vector2i(0, 1), Vector::Constant(2, 0.0), g),
                  DataError);
  CHECK_THROWS_AS(LabeledDataset(x, {"f"}, Eigen::Vector2i(0, 1), Eigen::Vector2i(0, 1), {"a"}), DataError);
  CHECK_THROWS_AS(LabeledDataset(Matrix::Zero(2, 2), {"f", "f"}, Eigen::Vector2i(0, 1), Eigen::Vector2i(0, 1), g),
                  DataError);
  const LabeledDataset ok(x, {"f"}, Eigen::Vector2i(0, 1), Eigen::Vector2i(0, 1), g);
  CHECK(ok.weights() == Vector::Ones(2));
}

TEST_CASE("SplitSpec validation") {
  CHECK_THROWS_AS((SplitSpec{{0.5, 0.4}, 0}.validate()), ConfigError);
  CHECK_THROWS_AS((SplitSpec{{1.0, 0.0}, 0}.validate()), ConfigError);
  CHECK_THROWS_AS((SplitSpec{{}, 0}.validate()), ConfigError);
  CHECK_NOTHROW((SplitSpec{{0.625, 0.375}, 0}.validate()));
}

TEST_CASE("split with one row per group never shares a group") {
  std::vector<std::string> groups;
  for (int i = 0; i < 37; ++i) groups.push_back("g" + std::to_string(i));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto parts = split_group_indices(groups, {{0.5, 0.5}, seed});
    REQUIRE(parts.size() == 2);
    check_partition(parts, groups);
    CHECK(parts[0].size() + parts[1].size() == groups.size());
  }
}

TEST_CASE("all admissions of a patient land in one partition") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> groups;
    for (int p = 0; p < 40; ++p) {
      const int k = 1 + static_cast<int>(rng() % 3);
      for (int a = 0; a < k; ++a) groups.push_back(std::to_string(p));
    }
    std::shuffle(groups.begin(), groups.end(), rng);
    const auto parts = split_group_indices(groups, {{0.2, 0.2, 0.2, 0.2, 0.2}, static_cast<std::uint64_t>(trial)});
    check_partition(parts, groups);
    for (const auto& part : parts) {
      // Rows keep their original order.
      CHECK(std::is_sorted(part.begin(), part.end()));
      // Sizes approximate the fractions.
      CHECK(std::abs(static_cast<double>(part.size()) - 0.2 * static_cast<double>(groups.size())) <= 6.0);
    }
  }
}

TEST_CASE("split is deterministic per seed and errors on too few groups") {
  const std::vector<std::string> groups = {"a", "b", "b", "c", "d", "e", "e", "f"};
  const SplitSpec spec{{0.5, 0.25, 0.25}, 99};
  CHECK(split_group_indices(groups, spec) == split_group_indices(groups, spec));
  CHECK_THROWS_AS(split_group_indices({"a", "a", "b"}, {{0.25, 0.25, 0.5}, 1}), DataError);

  const Matrix x = Matrix::Random(8, 2);
  const LabeledDataset ds(x, {"u", "v"}, Eigen::VectorXi::Ones(8), Eigen::VectorXi::Zero(8), groups);
  const auto split = split_disjoint_groups(ds, spec);
  REQUIRE(split.size() == 3);
  Eigen::Index total = 0;
  std::set<std::string> seen;
  for (const auto& part : split) {
    total += part.n_rows();
    std::set<std::string> here(part.group_ids().begin(), part.group_ids().end());
    for (const auto& g : here) CHECK(seen.insert(g).second);
  }
  CHECK(total == 8);
}

TEST_CASE("subset and with_weights keep rows aligned") {
  const Matrix x = (Matrix(3, 1) << 1, 2, 3).finished();
  const LabeledDataset ds(x, {"f"}, Eigen::Vector3i(1, 0, 1), Eigen::Vector3i(0, 1, 1), {"a", "b", "c"});
  const IndexVector rows = {2, 0};
  const LabeledDataset s = ds.with_weights(Vector::LinSpaced(3, 1, 3)).subset(rows);
  CHECK(s.features()(0, 0) == 3.0);
  CHECK(s.weights()[0] == 3.0);
  CHECK(s.weights()[1] == 1.0);
  CHECK(s.group_ids() == std::vector<std::string>{"c", "a"});
  const IndexVector bad = {5};
  CHECK_THROWS_AS(ds.subset(bad), DataError);
}

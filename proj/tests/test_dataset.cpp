#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include "osda/common.hpp"
#include "osda/dataset.hpp"

using namespace osda;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "osda_dataset_tests";
  fs::create_directories(dir);
  return (dir / name).string();
}

Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                     const std::vector<std::string>& labels, Role role) {
  Dataset ds;
  ds.role = role;
  ds.features.resize(static_cast<Eigen::Index>(rows[0].size()),
                     static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t d = 0; d < rows[i].size(); ++d)
      ds.features(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = rows[i][d];
    ds.ids.push_back("r" + std::to_string(i));
    ds.labels.push_back(labels[i]);
  }
  return ds;
}

// pool with classes c01..cNN (alphabetical order = numeric order), 4 samples
// per class
Dataset make_pool(int n_classes, int per_class, int dim, std::uint64_t seed) {
  Rng rng(seed);
  Dataset pool;
  pool.role = Role::Source;
  const int n = n_classes * per_class;
  pool.features.resize(dim, n);
  int row = 0;
  for (int c = 1; c <= n_classes; ++c) {
    char name[8];
    std::snprintf(name, sizeof(name), "c%02d", c);
    for (int i = 0; i < per_class; ++i) {
      for (int d = 0; d < dim; ++d) pool.features(d, row) = rng.normal() + 3.0 * c;
      pool.ids.push_back("p" + std::to_string(row));
      pool.labels.emplace_back(name);
      ++row;
    }
  }
  return pool;
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
  return a.ids == b.ids && a.labels == b.labels && a.features == b.features;
}

}  // namespace

TEST_CASE("load_features parses a labeled source file") {
  auto path = temp_path("basic.csv");
  write_file(path, "s1,a,0.5,1\ns2,a,1.5,2\ns3,b,-1,0.25\n");
  Dataset ds = load_features(path, Role::Source);
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.labels[0] == "a");
  CHECK(ds.labels[2] == "b");
  CHECK(ds.features(0, 2) == -1.0);
  CHECK(ClassCatalog::from_labels(ds.labels).shared_classes.size() == 2);
}

TEST_CASE("load_features rejects ragged rows") {
  auto path = temp_path("ragged.csv");
  write_file(path, "s1,a,1,2,3\ns2,a,1,2,3,4\n");
  CHECK_THROWS_AS(load_features(path, Role::Source), FormatError);
}

TEST_CASE("load_features accepts an unlabeled target file") {
  auto path = temp_path("target.csv");
  write_file(path, "t1,,1,2\nt2,,3,4\n");
  Dataset ds = load_features(path, Role::Target);
  CHECK(ds.size() == 2);
  CHECK_FALSE(ds.is_labeled(0));
  CHECK_FALSE(ds.is_labeled(1));
}

TEST_CASE("load_features rejects non-finite values and unlabeled sources") {
  auto nan_path = temp_path("nan.csv");
  write_file(nan_path, "s1,a,1,nan\n");
  CHECK_THROWS_AS(load_features(nan_path, Role::Source), DataError);

  auto unlabeled = temp_path("unlabeled_source.csv");
  write_file(unlabeled, "s1,,1,2\n");
  CHECK_THROWS_AS(load_features(unlabeled, Role::Source), LabelError);

  CHECK_THROWS_AS(load_features(temp_path("missing.csv"), Role::Source), IoError);
}

TEST_CASE("load_features strict mode rejects labels outside the catalog") {
  auto path = temp_path("strict.csv");
  write_file(path, "s1,a,1,2\ns2,zzz,3,4\n");
  ClassCatalog catalog;
  catalog.shared_classes = {"a", "b"};
  CHECK_THROWS_AS(load_features(path, Role::Source, &catalog), LabelError);
}

TEST_CASE("feature CSV round-trips exactly") {
  Dataset ds = make_dataset({{0.1, -2.75}, {1e-17, 3.0}}, {"a", "b"}, Role::Source);
  auto path = temp_path("roundtrip.csv");
  save_features(ds, path);
  Dataset back = load_features(path, Role::Source);
  CHECK(datasets_equal(ds, back));
}

TEST_CASE("class_means computes exact per-class means") {
  Dataset ds = make_dataset({{0, 0}, {2, 2}, {5, 7}}, {"a", "a", "b"}, Role::Source);
  ClassCatalog catalog = ClassCatalog::from_labels(ds.labels);
  MeanTable means = class_means(ds, catalog);
  CHECK(means.size() == 2);
  CHECK(means.means(0, 0) == 1.0);
  CHECK(means.means(1, 0) == 1.0);
  // single-sample class: the mean is the sample
  CHECK(means.means(0, 1) == 5.0);
  CHECK(means.means(1, 1) == 7.0);
}

TEST_CASE("class_means matches an independent column-average oracle") {
  Rng rng(7);
  const int per_class = 20, n_classes = 5, dim = 6;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (int c = 0; c < n_classes; ++c)
    for (int i = 0; i < per_class; ++i) {
      std::vector<double> row(dim);
      for (auto& v : row) v = rng.normal() * 10.0;
      rows.push_back(row);
      labels.push_back("class" + std::to_string(c));
    }
  Dataset ds = make_dataset(rows, labels, Role::Source);
  ClassCatalog catalog = ClassCatalog::from_labels(labels);
  MeanTable means = class_means(ds, catalog);
  // oracle: plain running sum per class, in row order
  for (std::size_t c = 0; c < catalog.shared_classes.size(); ++c) {
    std::vector<double> sum(dim, 0.0);
    int count = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (labels[i] == catalog.shared_classes[c]) {
        for (int d = 0; d < dim; ++d) sum[static_cast<std::size_t>(d)] += rows[i][static_cast<std::size_t>(d)];
        ++count;
      }
    for (int d = 0; d < dim; ++d)
      CHECK(means.means(d, static_cast<Eigen::Index>(c)) ==
            doctest::Approx(sum[static_cast<std::size_t>(d)] / count).epsilon(1e-12));
  }
}

TEST_CASE("class_means is bit-identical under row permutations") {
  Rng rng(11);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < 30; ++i) {
    rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    labels.push_back(i % 3 == 0 ? "a" : (i % 3 == 1 ? "b" : "c"));
  }
  Dataset ds = make_dataset(rows, labels, Role::Source);
  ClassCatalog catalog = ClassCatalog::from_labels(labels);
  MeanTable m1 = class_means(ds, catalog);

  std::vector<std::size_t> perm(rows.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng shuffler(99);
  shuffler.shuffle(perm);
  std::vector<std::vector<double>> rows2;
  std::vector<std::string> labels2;
  for (std::size_t i : perm) {
    rows2.push_back(rows[i]);
    labels2.push_back(labels[i]);
  }
  MeanTable m2 = class_means(make_dataset(rows2, labels2, Role::Source), catalog);
  CHECK(m1.means == m2.means);
}

TEST_CASE("class_means reports classes without samples") {
  Dataset ds = make_dataset({{1, 2}}, {"a"}, Role::Source);
  ClassCatalog catalog;
  catalog.shared_classes = {"a", "b"};
  CHECK_THROWS_AS(class_means(ds, catalog), CoverageError);
}

TEST_CASE("open-set split follows the class ranges") {
  Dataset pool = make_pool(31, 4, 3, 5);
  OpenSetSplit split = make_open_set_split(pool, 10, {11, 20}, {21, 31}, 17);

  // source: 10 shared classes plus relabeled unknowns = 11 effective classes
  std::set<std::string> src_classes(split.source.labels.begin(), split.source.labels.end());
  CHECK(src_classes.size() == 11);
  CHECK(src_classes.count(kUnknownLabel) == 1);
  CHECK(split.source.size() == 20 * 4);

  // target: shared + its own unknown classes, unlabeled
  CHECK(split.target.size() == 21 * 4);
  for (std::size_t i = 0; i < split.target.size(); ++i) CHECK_FALSE(split.target.is_labeled(i));

  // ground truth keeps the original labels; classes 21..31 score as unknown
  ClassCatalog catalog = ClassCatalog::from_labels(split.source.labels);
  auto truth = split.truth.catalog_labels(split.target, catalog);
  std::size_t n_unknown = 0;
  for (const auto& t : truth)
    if (t == catalog.unknown_id) ++n_unknown;
  CHECK(n_unknown == 11 * 4);

  // disjointness of the unknown pools
  std::set<std::string> fine(split.truth.labels.begin(), split.truth.labels.end());
  for (int c = 11; c <= 20; ++c) {
    char name[8];
    std::snprintf(name, sizeof(name), "c%02d", c);
    CHECK(fine.count(name) == 0);
  }
}

TEST_CASE("open-set split rejects overlapping ranges") {
  Dataset pool = make_pool(31, 2, 2, 5);
  CHECK_THROWS_AS(make_open_set_split(pool, 10, {11, 21}, {21, 31}, 1), ProtocolError);
  CHECK_THROWS_AS(make_open_set_split(pool, 10, {5, 20}, {21, 31}, 1), ProtocolError);
  CHECK_THROWS_AS(make_open_set_split(pool, 10, {11, 20}, {21, 40}, 1), ProtocolError);
}

TEST_CASE("open-set split with an empty target range is closed-set") {
  Dataset pool = make_pool(12, 3, 2, 5);
  OpenSetSplit split = make_open_set_split(pool, 10, {11, 12}, ClassRange::none(), 3);
  ClassCatalog catalog = ClassCatalog::from_labels(split.source.labels);
  for (const auto& t : split.truth.catalog_labels(split.target, catalog))
    CHECK(t != catalog.unknown_id);
  CHECK(split.target.size() == 10 * 3);
}

TEST_CASE("open-set split is deterministic per seed") {
  Dataset pool = make_pool(31, 4, 3, 5);
  OpenSetSplit a = make_open_set_split(pool, 10, {11, 20}, {21, 31}, 42);
  OpenSetSplit b = make_open_set_split(pool, 10, {11, 20}, {21, 31}, 42);
  CHECK(datasets_equal(a.source, b.source));
  CHECK(datasets_equal(a.target, b.target));
  CHECK(a.truth.ids == b.truth.ids);
  OpenSetSplit c = make_open_set_split(pool, 10, {11, 20}, {21, 31}, 43);
  CHECK_FALSE(a.target.ids == c.target.ids);
}

TEST_CASE("per-class subsampling keeps exhaustive classes intact") {
  Dataset pool = make_pool(3, 8, 2, 5);
  Dataset sub = subsample_per_class(pool, 8, 1);
  CHECK(sub.size() == 24);
  Dataset smaller = subsample_per_class(pool, 5, 1);
  CHECK(smaller.size() == 15);
  CHECK_THROWS_AS(subsample_per_class(pool, 9, 1), SamplingError);
}

TEST_CASE("total subsampling returns the exact cardinality") {
  Dataset pool = make_pool(8, 50, 2, 5);  // 400 rows
  Dataset sub = subsample_total(pool, 50, 7);
  CHECK(sub.size() == 50);
  CHECK_THROWS_AS(subsample_total(pool, 401, 7), SamplingError);

  // different seeds give different subsets
  Dataset s1 = subsample_total(pool, 50, 1);
  Dataset s2 = subsample_total(pool, 50, 2);
  CHECK_FALSE(s1.ids == s2.ids);
  // same seed is pure
  Dataset s3 = subsample_total(pool, 50, 1);
  CHECK(datasets_equal(s1, s3));
}

TEST_CASE("synth_shift with identity shift keeps the domains aligned") {
  SynthParams p;
  p.n_classes = 3;
  p.n_per_class = 50;
  p.dim = 4;
  p.unknown_ratio = 0.0;
  OpenSetSplit split = synth_shift(p, 9);
  split.source.validate();
  split.target.validate();
  CHECK(split.source.size() == 150);
  CHECK(split.target.size() == 150);

  ClassCatalog catalog = ClassCatalog::from_labels(split.source.labels);
  MeanTable src_means = class_means(split.source, catalog);
  // same centers, so the empirical means agree up to sampling noise
  Dataset labeled_target = split.target;
  labeled_target.role = Role::Source;
  labeled_target.labels = split.truth.labels;
  MeanTable tgt_means = class_means(labeled_target, catalog);
  for (std::size_t c = 0; c < src_means.size(); ++c)
    CHECK((src_means.means.col(static_cast<Eigen::Index>(c)) -
           tgt_means.means.col(static_cast<Eigen::Index>(c)))
              .norm() < 1.0);
}

TEST_CASE("synth_shift honors the unknown ratio") {
  SynthParams p;
  p.n_classes = 3;
  p.n_per_class = 40;
  p.dim = 5;
  p.unknown_ratio = 2.0;
  OpenSetSplit split = synth_shift(p, 21);
  const std::size_t known = 120;
  CHECK(split.target.size() == known + 240);
  CHECK(split.source.indices_of(kUnknownLabel).size() == 240);

  ClassCatalog catalog = ClassCatalog::from_labels(split.source.labels);
  auto truth = split.truth.catalog_labels(split.target, catalog);
  std::size_t unknowns = 0;
  for (const auto& t : truth)
    if (t == catalog.unknown_id) ++unknowns;
  CHECK(unknowns == 2 * known);
}

TEST_CASE("synth_shift is a pure function of its seed") {
  SynthParams p;
  p.shift.rotation_deg = 25.0;
  OpenSetSplit a = synth_shift(p, 123);
  OpenSetSplit b = synth_shift(p, 123);
  CHECK(datasets_equal(a.source, b.source));
  CHECK(datasets_equal(a.target, b.target));
  OpenSetSplit c = synth_shift(p, 124);
  CHECK_FALSE(a.source.features == c.source.features);
}

TEST_CASE("validate enforces catalog membership") {
  Dataset ds = make_dataset({{1, 2}}, {"zzz"}, Role::Source);
  ClassCatalog catalog;
  catalog.shared_classes = {"a"};
  CHECK_THROWS_AS(ds.validate(&catalog), LabelError);
  ds.labels[0] = "a";
  CHECK_NOTHROW(ds.validate(&catalog));
}

#include <doctest.h>

#include <cmath>

#include "osda/common.hpp"
#include "osda/eval.hpp"

using namespace osda;

namespace {

ClassCatalog small_catalog() {
  ClassCatalog c;
  c.shared_classes = {"a", "b", "c"};
  return c;
}

}  // namespace

TEST_CASE("perfect predictions score 1.0 with a diagonal confusion") {
  ClassCatalog catalog = small_catalog();
  std::vector<std::string> truth = {"a", "b", "c", kUnknownLabel};
  EvalReport r = score(truth, truth, catalog, Protocol::OS);
  CHECK(r.overall_accuracy == 1.0);
  CHECK(r.mean_class_accuracy == 1.0);
  CHECK(r.n_evaluated == 4);
  CHECK(r.confusion.diagonal().sum() == 4);
  CHECK(r.confusion.sum() == 4);
}

TEST_CASE("everything-unknown predictions zero the shared-class score") {
  ClassCatalog catalog = small_catalog();
  std::vector<std::string> truth, pred;
  for (int i = 0; i < 30; ++i) truth.push_back(catalog.shared_classes[static_cast<std::size_t>(i % 3)]);
  for (int i = 0; i < 10; ++i) truth.push_back(kUnknownLabel);
  pred.assign(40, kUnknownLabel);

  EvalReport os_star = score(pred, truth, catalog, Protocol::OS_STAR);
  CHECK(os_star.overall_accuracy == 0.0);
  CHECK(os_star.n_evaluated == 30);

  EvalReport os = score(pred, truth, catalog, Protocol::OS);
  CHECK(os.overall_accuracy == doctest::Approx(0.25));  // the true unknowns
  CHECK(os.n_evaluated == 40);
}

TEST_CASE("three of four correct scores 0.75") {
  ClassCatalog catalog = small_catalog();
  std::vector<std::string> truth = {"a", "a", "b", "c"};
  std::vector<std::string> pred = {"a", "b", "b", "c"};
  EvalReport r = score(pred, truth, catalog, Protocol::OS);
  CHECK(r.overall_accuracy == 0.75);
}

TEST_CASE("closed-set scoring rejects unknown truth labels") {
  ClassCatalog catalog = small_catalog();
  std::vector<std::string> truth = {"a", kUnknownLabel};
  std::vector<std::string> pred = {"a", "a"};
  CHECK_THROWS_AS(score(pred, truth, catalog, Protocol::CS), ProtocolError);
  CHECK_NOTHROW(score(pred, truth, catalog, Protocol::OS));
}

TEST_CASE("evaluated counts are protocol-consistent") {
  ClassCatalog catalog = small_catalog();
  std::vector<std::string> truth = {"a", "b", kUnknownLabel, kUnknownLabel, "c"};
  std::vector<std::string> pred = {"a", "a", "b", kUnknownLabel, "c"};
  EvalReport os = score(pred, truth, catalog, Protocol::OS);
  EvalReport os_star = score(pred, truth, catalog, Protocol::OS_STAR);
  CHECK(os_star.n_evaluated <= os.n_evaluated);
  CHECK(os.n_evaluated == 5);
  CHECK(os_star.n_evaluated == 3);
  CHECK(static_cast<std::size_t>(os.confusion.sum()) == os.n_evaluated);
  CHECK(static_cast<std::size_t>(os_star.confusion.sum()) == os_star.n_evaluated);
}

TEST_CASE("scoring is invariant to joint permutations") {
  ClassCatalog catalog = small_catalog();
  std::vector<std::string> truth = {"a", "b", "c", kUnknownLabel, "a", "b"};
  std::vector<std::string> pred = {"a", "c", "c", "a", kUnknownLabel, "b"};
  EvalReport r1 = score(pred, truth, catalog, Protocol::OS);
  std::vector<std::size_t> perm = {5, 3, 0, 4, 1, 2};
  std::vector<std::string> truth2, pred2;
  for (auto i : perm) {
    truth2.push_back(truth[i]);
    pred2.push_back(pred[i]);
  }
  EvalReport r2 = score(pred2, truth2, catalog, Protocol::OS);
  CHECK(r1.confusion == r2.confusion);
  CHECK(r1.overall_accuracy == r2.overall_accuracy);
  CHECK(r1.mean_class_accuracy == r2.mean_class_accuracy);
}

TEST_CASE("mean class accuracy averages per-row recalls") {
  ClassCatalog catalog;
  catalog.shared_classes = {"a", "b"};
  // class a: 2/4 correct, class b: 1/1, unknown row empty
  std::vector<std::string> truth = {"a", "a", "a", "a", "b"};
  std::vector<std::string> pred = {"a", "a", "b", "b", "b"};
  EvalReport r = score(pred, truth, catalog, Protocol::OS);
  CHECK(r.mean_class_accuracy == doctest::Approx(0.75));
  CHECK(r.overall_accuracy == doctest::Approx(0.6));
}

TEST_CASE("aggregate of identical reports has zero spread") {
  ClassCatalog catalog = small_catalog();
  std::vector<std::string> truth = {"a", "b"};
  std::vector<std::string> pred = {"a", "b"};
  EvalReport r = score(pred, truth, catalog, Protocol::OS);
  AggregateReport agg = aggregate({r, r, r});
  CHECK(agg.overall_accuracy.mean == 1.0);
  CHECK(agg.overall_accuracy.stddev == 0.0);
  CHECK(agg.n_runs == 3);
}

TEST_CASE("two-point aggregation follows the sample formula") {
  ClassCatalog catalog = small_catalog();
  // accuracies 0.8 and 0.9 from 10 samples each
  std::vector<std::string> truth(10, "a");
  std::vector<std::string> p8(10, "a"), p9(10, "a");
  p8[0] = p8[1] = "b";
  p9[0] = "b";
  EvalReport r8 = score(p8, truth, catalog, Protocol::OS);
  EvalReport r9 = score(p9, truth, catalog, Protocol::OS);
  CHECK(r8.overall_accuracy == doctest::Approx(0.8));
  AggregateReport agg = aggregate({r8, r9});
  CHECK(agg.overall_accuracy.mean == doctest::Approx(0.85));
  CHECK(agg.overall_accuracy.stddev == doctest::Approx(0.070710678).epsilon(1e-6));
  CHECK(agg.overall_accuracy.min == doctest::Approx(0.8));
  CHECK(agg.overall_accuracy.max == doctest::Approx(0.9));
}

TEST_CASE("aggregation matches a two-pass statistics oracle") {
  Rng rng(7);
  ClassCatalog catalog = small_catalog();
  std::vector<EvalReport> reports;
  std::vector<double> overall;
  for (int run = 0; run < 5; ++run) {
    std::vector<std::string> truth, pred;
    for (int i = 0; i < 40; ++i) {
      truth.push_back(catalog.shared_classes[rng.uniform_index(3)]);
      pred.push_back(rng.next_unit() < 0.7 ? truth.back()
                                           : catalog.shared_classes[rng.uniform_index(3)]);
    }
    reports.push_back(score(pred, truth, catalog, Protocol::OS));
    overall.push_back(reports.back().overall_accuracy);
  }
  AggregateReport agg = aggregate(reports);
  double mean = 0;
  for (double v : overall) mean += v;
  mean /= 5.0;
  double ss = 0;
  for (double v : overall) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / 4.0);
  CHECK(agg.overall_accuracy.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(agg.overall_accuracy.stddev == doctest::Approx(sd).epsilon(1e-12));
}

TEST_CASE("aggregate rejects empty and mixed-protocol input") {
  CHECK_THROWS_AS(aggregate({}), DataError);
  ClassCatalog catalog = small_catalog();
  std::vector<std::string> t = {"a"}, p = {"a"};
  EvalReport os = score(p, t, catalog, Protocol::OS);
  EvalReport cs = score(p, t, catalog, Protocol::CS);
  CHECK_THROWS_AS(aggregate({os, cs}), ProtocolError);
}

TEST_CASE("reports serialize with the unknown class last") {
  ClassCatalog catalog = small_catalog();
  std::vector<std::string> truth = {"a", kUnknownLabel};
  std::vector<std::string> pred = {"a", "b"};
  EvalReport r = score(pred, truth, catalog, Protocol::OS);
  std::string j = report_to_json(r);
  CHECK(j.find("\"protocol\": \"os\"") != std::string::npos);
  CHECK(r.classes.back() == kUnknownLabel);
  std::string csv = confusion_to_csv(r);
  CHECK(csv.rfind(kUnknownLabel) != std::string::npos);
  std::string plot = confusion_to_plot_data(r);
  CHECK(plot.find('\n') != std::string::npos);
}

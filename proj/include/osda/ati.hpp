#ifndef OSDA_ATI_HPP
#define OSDA_ATI_HPP

#include <optional>
#include <string>
#include <vector>

#include "osda/assign.hpp"
#include "osda/dataset.hpp"
#include "osda/transform.hpp"

namespace osda {

enum class Variant { Ati, AtiLambda, AtiLambdaNk };

std::string variant_name(Variant v, int neighbor_k);
/// Accepts ati, ati-lambda, ati-lambda-n1, ati-lambda-n2.
std::pair<Variant, int> parse_variant(const std::string& name);

struct AtiConfig {
  Variant variant = Variant::AtiLambda;
  double rho = 0.5;
  int neighbor_k = 0;  // used by the locality variant
  double epsilon = 0.01;
  int max_iterations = 10;
  bool coverage = true;
  bool cover_unknown = true;  // include the unknown class in the coverage constraint
  SolveBackend backend = SolveBackend::Auto;
  std::vector<std::pair<int, int>> semi_supervised_labels;  // (target index, class index)
  /// Replaces the solver in iteration 1 (seeded-assignment experiments).
  std::optional<Assignment> initial_assignment;
  /// Catalog-level truth per target; enables assignment-accuracy tracking.
  std::optional<std::vector<std::string>> ground_truth_labels;
  /// When set, every iteration's instance and solution are dumped to
  /// <dir>/assign_iter_<k>.json for `osda check`.
  std::optional<std::string> instance_dump_dir;
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  double lambda = 0.0;
  std::size_t n_assigned = 0;
  std::size_t n_outliers = 0;
  double objective = 0.0;
  double stop_metric = 0.0;  // sqrt(sum_t sum_c x_ct ||W_k S_c - T_t||^2)
  std::optional<double> assignment_accuracy;
  Assignment assignment;
};

struct AtiResult {
  Dataset adapted_source;
  Transform transform;  // composition of all per-iteration maps
  std::vector<IterationRecord> history;
};

/// Classes the assignment operates on: the shared classes plus the unknown
/// class when the source actually carries unknown samples.
std::vector<std::string> active_classes(const Dataset& source, const ClassCatalog& catalog);

/// Alternate the assignment problem and the mapping estimation: per
/// iteration, class means are recomputed from the current (already
/// transformed) source, lambda is re-derived from the fresh costs (except for
/// the plain variant, which never rejects), W is fit to the matched pairs and
/// applied to the source. Stops when the fit distance falls below epsilon or
/// the iteration cap is reached. The target dataset is never modified.
AtiResult run_ati(const Dataset& source, const Dataset& target, const ClassCatalog& catalog,
                  const AtiConfig& cfg);

/// Iteration-1 assignment with the stated fraction of targets on their true
/// class and the remainder uniformly random over the class list.
Assignment seed_assignments(const Dataset& target, const std::vector<std::string>& truth,
                            const ClassCatalog& catalog, int n_classes, double fraction_correct,
                            std::uint64_t seed);

/// History CSV: iteration,lambda,n_assigned,n_outliers,objective,stop_metric,assign_acc
std::string history_to_csv(const std::vector<IterationRecord>& history);

}  // namespace osda

#endif  // OSDA_ATI_HPP

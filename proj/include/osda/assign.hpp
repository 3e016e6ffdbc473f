#ifndef OSDA_ASSIGN_HPP
#define OSDA_ASSIGN_HPP

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osda/dataset.hpp"

namespace osda {

/// Per-target label: a class index, or rejected as outlier.
inline constexpr int kOutlier = -1;

/// |C| x |T| squared Euclidean distances between class means and targets.
using CostMatrix = Eigen::MatrixXd;

/// |C| x |C| squared Euclidean distances between class means.
using ClassDistanceMatrix = Eigen::MatrixXd;

/// k nearest target neighbors per target (by Euclidean distance in the fixed
/// target feature space, self excluded, distance ties by lower index).
struct NeighborGraph {
  std::vector<std::vector<int>> neighbors;  // size |T|, each of size k
  int k = 0;
};

enum class SolveBackend { Exact, Heuristic, Auto };

struct SolveConfig {
  double lambda = kInfinity;  // outlier cost; infinity disables rejection
  double rho = 0.5;           // only recorded here; lambda is set explicitly
  bool coverage = true;       // enforce >= 1 target per class
  std::optional<int> uncovered_class;          // class exempt from coverage
  std::vector<std::pair<int, int>> fixed_labels;  // (target, class) constraints
  int neighbor_k = 0;
  SolveBackend backend = SolveBackend::Auto;
};

/// Binary solution of the assignment problem, stored as one label per target
/// (so sum_c x_ct + o_t = 1 holds structurally).
struct Assignment {
  std::vector<int> labels;  // class index or kOutlier, per target
  double objective = 0.0;
  int n_classes = 0;

  std::size_t n_targets() const { return labels.size(); }
  bool outlier(std::size_t t) const { return labels[t] == kOutlier; }
  bool x(int c, std::size_t t) const { return labels[t] == c; }
  std::size_t n_outliers() const;
  std::size_t n_assigned() const { return labels.size() - n_outliers(); }
  std::vector<std::size_t> class_counts() const;
};

// --- cost construction --------------------------------------------------------

/// d_ct = ||S_c - T_t||_2^2.
CostMatrix compute_costs(const MeanTable& means, const Dataset& targets);

/// d_cc' = ||S_c - S_c'||_2^2.
ClassDistanceMatrix class_distances(const MeanTable& means);

/// lambda = rho * (max_ct d_ct + min_ct d_ct).
double lambda_from_costs(const CostMatrix& d, double rho);

NeighborGraph build_neighbors(const Dataset& targets, int k);

// --- solvers -------------------------------------------------------------------

/// Exact global optimum of the linear assignment problem with outlier
/// rejection and the per-class coverage constraint, via min-cost flow.
/// Deterministic: among optima, the labeling that is lexicographically
/// smallest in target order (classes ascending, outlier last) is returned.
Assignment solve_unsupervised(const CostMatrix& d, const SolveConfig& cfg);

/// Same problem with cfg.fixed_labels pinned; reduces to solve_unsupervised
/// when no labels are fixed.
Assignment solve_semi_supervised(const CostMatrix& d, const SolveConfig& cfg);

/// Locality-constrained objective: each assignment additionally pays the
/// inter-class distance to the classes of its k nearest neighbors. The exact
/// backend is branch and bound with a flow-based lower bound; the heuristic
/// backend is multi-start ICM seeded from the linear solution. The returned
/// objective is the quadratic objective value.
Assignment solve_locality(const CostMatrix& d, const ClassDistanceMatrix& dcc,
                          const NeighborGraph& nbrs, const SolveConfig& cfg);

/// Quadratic objective of a labeling (the linear objective when dcc/nbrs are
/// null). Used to recompute Assignment::objective.
double assignment_objective(const CostMatrix& d, const ClassDistanceMatrix* dcc,
                            const NeighborGraph* nbrs, const std::vector<int>& labels,
                            double lambda);

/// Debug dump of an instance and its solution, consumed by `osda check`.
std::string instance_to_json(const CostMatrix& d, const SolveConfig& cfg,
                             const ClassDistanceMatrix* dcc, const NeighborGraph* nbrs,
                             const Assignment* solution);

}  // namespace osda

#endif  // OSDA_ASSIGN_HPP

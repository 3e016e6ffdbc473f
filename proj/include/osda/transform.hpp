#ifndef OSDA_TRANSFORM_HPP
#define OSDA_TRANSFORM_HPP

#include <Eigen/Core>
#include <string>

#include "osda/assign.hpp"
#include "osda/dataset.hpp"

namespace osda {

/// Linear source-to-target map with its fit diagnostics. `residual` is the
/// loss 0.5 * ||W P_S - P_T||_F^2 at the returned W.
struct Transform {
  Eigen::MatrixXd w;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Matched pairs of one assignment round: column j of `source_means` is the
/// mean of the class that column j of `targets` was assigned to. Outliers are
/// excluded; columns are ordered by ascending target index.
struct AssignmentMatrices {
  Eigen::MatrixXd source_means;  // P_S, D x L
  Eigen::MatrixXd targets;       // P_T, D x L
  Eigen::Index pair_count() const { return targets.cols(); }
};

AssignmentMatrices build_pairs(const Assignment& assignment, const MeanTable& means,
                               const Dataset& targets);

/// Minimize 0.5 * ||W P_S - P_T||_F^2 over W. Well-conditioned Gram matrices
/// (condition estimate < 1e8) go through the normal equations; otherwise W is
/// the minimum-Frobenius-norm least-squares solution, reached by steepest
/// descent with exact line search from `w_init` followed by a projection onto
/// the row space of P_S (which leaves the loss and its gradient unchanged).
Transform estimate_transform(const AssignmentMatrices& pairs, const Eigen::MatrixXd& w_init);

/// Replace every source sample x by W x; ids, labels and roles are kept.
Dataset apply_transform(const Transform& transform, const Dataset& source);

std::string transform_to_json(const Transform& transform);
Transform transform_from_json(const std::string& text);

}  // namespace osda

#endif  // OSDA_TRANSFORM_HPP

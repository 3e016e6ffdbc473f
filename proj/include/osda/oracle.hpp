#ifndef OSDA_ORACLE_HPP
#define OSDA_ORACLE_HPP

#include <Eigen/Core>

#include "osda/assign.hpp"

namespace osda {
namespace oracle {

/// Exhaustive enumeration of all (class | outlier) labelings, evaluating the
/// linear objective (or the quadratic one when dcc/nbrs are given) directly.
/// Same feasibility rules and tie-break as the production solvers, but shares
/// no code with them. Throws DataError when the instance exceeds 1e7
/// labelings and InfeasibleError when no labeling is feasible.
Assignment brute_force_assignment(const CostMatrix& d, const ClassDistanceMatrix* dcc,
                                  const NeighborGraph* nbrs, const SolveConfig& cfg);

/// Central finite differences of the mapping loss 0.5*||W P_S - P_T||_F^2,
/// entry by entry.
Eigen::MatrixXd finite_diff_gradient(const Eigen::MatrixXd& p_s, const Eigen::MatrixXd& p_t,
                                     const Eigen::MatrixXd& w, double h);

}  // namespace oracle
}  // namespace osda

#endif  // OSDA_ORACLE_HPP

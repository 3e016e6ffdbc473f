#ifndef OSDA_FLOW_HPP
#define OSDA_FLOW_HPP

#include <Eigen/Core>
#include <vector>

namespace osda {

/// Linear assignment instance in the form consumed by the flow solver:
/// per-target allowed label sets (classes 0..C-1 plus the outlier pseudo
/// label C) and per-class coverage requirements.
struct LinearInstance {
  const Eigen::MatrixXd* costs = nullptr;  // C x T
  double lambda = 0.0;                     // outlier cost (ignored where outlier disallowed)
  std::vector<char> cover;                 // size C: 1 = at least one target required
  std::vector<std::vector<char>> allowed;  // T x (C+1); column C = outlier allowed
};

struct FlowSolution {
  std::vector<int> labels;  // class index or -1 (outlier)
  double objective = 0.0;   // sum of arc costs, recomputed from the labels
};

/// Exact min-cost flow solve of the instance: source -> class arcs carry the
/// coverage lower bounds (removed by the excess-node transformation),
/// class -> target arcs cost d_ct, a bypass arc per target costs lambda.
/// Successive shortest paths with potentials, then a canonicalization pass
/// that turns the optimum into the lexicographically smallest optimal
/// labeling (target-major, classes ascending, outlier last).
/// Throws InfeasibleError when no complete labeling exists.
FlowSolution solve_assignment_flow(const LinearInstance& inst);

}  // namespace osda

#endif  // OSDA_FLOW_HPP

#include "osda/oracle.hpp"

#include <cmath>
#include <map>

#include "osda/common.hpp"

namespace osda {
namespace oracle {

namespace {

// Direct evaluation of the (possibly quadratic) objective. Written from the
// formulas, independently of the solver-side evaluator.
double evaluate(const CostMatrix& d, const ClassDistanceMatrix* dcc,
                const NeighborGraph* nbrs, const std::vector<int>& labels, double lambda) {
  const int T = static_cast<int>(d.cols());
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    const int c = labels[static_cast<std::size_t>(t)];
    if (c < 0) {
      total += lambda;
      continue;
    }
    double cost = d(c, t);
    if (dcc && nbrs)
      for (int u : nbrs->neighbors[static_cast<std::size_t>(t)]) {
        const int cu = labels[static_cast<std::size_t>(u)];
        if (cu >= 0) cost += (*dcc)(c, cu);
      }
    total += cost;
  }
  return total;
}

}  // namespace

Assignment brute_force_assignment(const CostMatrix& d, const ClassDistanceMatrix* dcc,
                                  const NeighborGraph* nbrs, const SolveConfig& cfg) {
  const int C = static_cast<int>(d.rows());
  const int T = static_cast<int>(d.cols());
  const bool outlier_ok = std::isfinite(cfg.lambda);
  const int n_options = C + (outlier_ok ? 1 : 0);

  double state_count = std::pow(static_cast<double>(n_options), static_cast<double>(T));
  if (state_count > 1e7)
    throw DataError("brute force instance too large: " + format_double(state_count) +
                    " labelings");

  std::map<int, int> fixed;
  for (const auto& [t, c] : cfg.fixed_labels) {
    if (t < 0 || t >= T || c < 0 || c >= C) throw DataError("fixed label out of range");
    auto [it, inserted] = fixed.emplace(t, c);
    if (!inserted && it->second != c)
      throw DataError("target " + std::to_string(t) + " fixed to two different classes");
  }

  std::vector<char> must_cover(static_cast<std::size_t>(C), cfg.coverage ? 1 : 0);
  if (cfg.coverage && cfg.uncovered_class) {
    if (*cfg.uncovered_class < 0 || *cfg.uncovered_class >= C)
      throw DataError("uncovered_class index out of range");
    must_cover[static_cast<std::size_t>(*cfg.uncovered_class)] = 0;
  }

  // options per target, in tie-break order: classes ascending, outlier last
  std::vector<std::vector<int>> options(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    auto it = fixed.find(t);
    if (it != fixed.end()) {
      options[static_cast<std::size_t>(t)] = {it->second};
      continue;
    }
    for (int c = 0; c < C; ++c) options[static_cast<std::size_t>(t)].push_back(c);
    if (outlier_ok) options[static_cast<std::size_t>(t)].push_back(-1);
  }

  std::vector<int> labels(static_cast<std::size_t>(T));
  std::vector<int> best;
  double best_obj = kInfinity;
  std::vector<int> counts(static_cast<std::size_t>(C), 0);

  // depth-first enumeration, target 0 outermost: the first optimum found is
  // the lexicographically smallest one
  auto recurse = [&](auto&& self, int t) -> void {
    if (t == T) {
      for (int c = 0; c < C; ++c)
        if (must_cover[static_cast<std::size_t>(c)] && counts[static_cast<std::size_t>(c)] == 0)
          return;
      double obj = evaluate(d, dcc, nbrs, labels, cfg.lambda);
      if (obj < best_obj - 1e-12) {
        best_obj = obj;
        best = labels;
      }
      return;
    }
    for (int option : options[static_cast<std::size_t>(t)]) {
      labels[static_cast<std::size_t>(t)] = option;
      if (option >= 0) ++counts[static_cast<std::size_t>(option)];
      self(self, t + 1);
      if (option >= 0) --counts[static_cast<std::size_t>(option)];
    }
  };
  recurse(recurse, 0);

  if (best.empty()) throw InfeasibleError("no feasible labeling exists");
  Assignment out;
  out.labels = best;
  out.n_classes = C;
  out.objective = best_obj;
  return out;
}

Eigen::MatrixXd finite_diff_gradient(const Eigen::MatrixXd& p_s, const Eigen::MatrixXd& p_t,
                                     const Eigen::MatrixXd& w, double h) {
  if (h <= 0) throw DataError("finite difference step must be positive");
  auto f = [&](const Eigen::MatrixXd& m) { return 0.5 * (m * p_s - p_t).squaredNorm(); };
  Eigen::MatrixXd grad(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      Eigen::MatrixXd plus = w;
      Eigen::MatrixXd minus = w;
      plus(i, j) += h;
      minus(i, j) -= h;
      grad(i, j) = (f(plus) - f(minus)) / (2.0 * h);
    }
  return grad;
}

}  // namespace oracle
}  // namespace osda

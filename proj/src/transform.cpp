#include "osda/transform.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include <nlohmann/json.hpp>

#include "osda/common.hpp"

namespace osda {

using json = nlohmann::json;

AssignmentMatrices build_pairs(const Assignment& assignment, const MeanTable& means,
                               const Dataset& targets) {
  if (assignment.n_targets() != targets.size())
    throw DataError("assignment/target size mismatch");
  if (assignment.n_classes != static_cast<int>(means.size()))
    throw DataError("assignment/mean class count mismatch");
  const Eigen::Index L = static_cast<Eigen::Index>(assignment.n_assigned());
  AssignmentMatrices pairs;
  pairs.source_means.resize(means.dim(), L);
  pairs.targets.resize(means.dim(), L);
  Eigen::Index col = 0;
  for (std::size_t t = 0; t < assignment.n_targets(); ++t) {
    if (assignment.outlier(t)) continue;
    pairs.source_means.col(col) = means.means.col(assignment.labels[t]);
    pairs.targets.col(col) = targets.features.col(static_cast<Eigen::Index>(t));
    ++col;
  }
  return pairs;
}

namespace {

double loss(const Eigen::MatrixXd& w, const AssignmentMatrices& p) {
  return 0.5 * (w * p.source_means - p.targets).squaredNorm();
}

}  // namespace

Transform estimate_transform(const AssignmentMatrices& pairs, const Eigen::MatrixXd& w_init) {
  const Eigen::Index D = pairs.source_means.rows();
  if (D < 1 || pairs.pair_count() < 1)
    throw DataError("estimate_transform needs D >= 1 and at least one pair");
  if (w_init.rows() != D || w_init.cols() != D)
    throw DataError("w_init must be D x D");

  const Eigen::MatrixXd gram = pairs.source_means * pairs.source_means.transpose();
  const Eigen::MatrixXd cross = pairs.targets * pairs.source_means.transpose();
  const double grad_scale = 1.0 + cross.norm();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const Eigen::VectorXd& evals = eig.eigenvalues();  // ascending
  const double eval_max = evals(D - 1);
  const double eval_min = evals(0);
  const double cond = eval_min > 0.0 ? eval_max / eval_min : kInfinity;

  Transform out;
  if (cond < 1e8) {
    // W gram = cross, gram symmetric positive definite
    auto ldlt = gram.ldlt();
    Eigen::MatrixXd w = ldlt.solve(cross.transpose()).transpose();
    const double bound = 1e-8 * grad_scale;
    for (int refine = 0; refine < 4 && (w * gram - cross).norm() > bound; ++refine) {
      Eigen::MatrixXd residual = cross - w * gram;
      w += ldlt.solve(residual.transpose()).transpose();
    }
    if ((w * gram - cross).norm() > bound)
      throw NumericError("normal equations did not reach the gradient bound");
    out.w = w;
    out.iterations = 0;
    out.converged = true;
  } else {
    // steepest descent with exact line search; the quadratic objective makes
    // the optimal step <G,G>/<G gram, G>
    Eigen::MatrixXd w = w_init;
    const double tol = 1e-6 * grad_scale;
    const int max_iterations = 10000;
    int it = 0;
    bool converged = false;
    for (; it < max_iterations; ++it) {
      Eigen::MatrixXd grad = w * gram - cross;
      if (!grad.allFinite()) throw NumericError("non-finite gradient");
      double gnorm = grad.norm();
      if (gnorm <= tol) {
        converged = true;
        break;
      }
      double curvature = (grad * gram).cwiseProduct(grad).sum();
      if (curvature <= 0.0) throw NumericError("non-positive curvature in descent");
      w -= (gnorm * gnorm / curvature) * grad;
    }
    // minimum-norm: drop the null-space component of W, which changes
    // neither the loss nor the gradient
    double rank_tol = eval_max * 1e-12;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < D; ++i)
      if (evals(i) > rank_tol) ++rank;
    if (rank == 0) {
      w.setZero();
    } else if (rank < D) {
      Eigen::MatrixXd basis = eig.eigenvectors().rightCols(rank);
      w = w * (basis * basis.transpose());
    }
    out.w = w;
    out.iterations = it;
    out.converged = converged;
  }
  if (!out.w.allFinite()) throw NumericError("non-finite transform");
  out.residual = loss(out.w, pairs);
  return out;
}

Dataset apply_transform(const Transform& transform, const Dataset& source) {
  if (transform.w.cols() != source.dim())
    throw DataError("transform/source dimensionality mismatch");
  Dataset out = source;
  out.features = transform.w * source.features;
  return out;
}

std::string transform_to_json(const Transform& transform) {
  json j;
  j["d"] = transform.w.rows();
  json rows = json::array();
  for (Eigen::Index r = 0; r < transform.w.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < transform.w.cols(); ++c) row.push_back(transform.w(r, c));
    rows.push_back(row);
  }
  j["w"] = rows;
  j["residual"] = transform.residual;
  j["iterations"] = transform.iterations;
  j["converged"] = transform.converged;
  return j.dump(2);
}

Transform transform_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("invalid transform JSON");
  Transform t;
  const auto d = j.at("d").get<Eigen::Index>();
  t.w.resize(d, d);
  const auto& rows = j.at("w");
  if (static_cast<Eigen::Index>(rows.size()) != d) throw FormatError("transform row count mismatch");
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != d)
      throw FormatError("transform column count mismatch");
    for (Eigen::Index c = 0; c < d; ++c) t.w(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  t.residual = j.at("residual").get<double>();
  t.iterations = j.at("iterations").get<int>();
  t.converged = j.at("converged").get<bool>();
  return t;
}

}  // namespace osda

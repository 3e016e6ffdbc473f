#ifndef OSDA_SVM_HPP
#define OSDA_SVM_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "osda/dataset.hpp"

namespace osda {

struct SvmConfig {
  double c_param = 0.001;  // soft-margin misclassification weight
  int max_passes = 10000;
  double tolerance = 1e-6;
  bool include_bias = true;
};

/// Value of the constant bias feature appended when include_bias is set. A
/// large constant keeps the effective intercept essentially unregularized,
/// matching the behavior of solvers with a free intercept; with a plain 1
/// the soft-margin objective at small C cannot afford boundary offsets
/// larger than a few multiples of the weight norm.
inline constexpr double kBiasFeature = 100.0;

/// Solution of one binary C-SVM dual
///   min_a 0.5 a'Qa - e'a,  0 <= a_i <= C,  Q_ij = y_i y_j x_i'x_j
/// solved by coordinate descent over the samples in fixed order until both
/// the duality gap and the largest projected-gradient violation are within
/// tolerance.
struct PairSolution {
  Eigen::VectorXd weight;
  Eigen::VectorXd alpha;
  double dual_objective = 0.0;  // e'a - 0.5 ||w||^2
  double primal_objective = 0.0;
  int passes = 0;
};

/// Train a single binary SVM on column samples x with labels y in {-1, +1}.
PairSolution train_pair_svm(const Eigen::MatrixXd& x, const std::vector<double>& y,
                            const SvmConfig& cfg);

/// One L2-regularized L1-loss binary SVM per unordered class pair, trained by
/// deterministic dual coordinate descent in fixed sample order. The weight of
/// pair (i, j) with i < j in catalog order scores positive for class i; the
/// bias, when enabled, is the last weight component (constant-1 feature
/// augmentation).
struct OvoModel {
  struct PairModel {
    int first = 0;   // class index into `classes`
    int second = 0;
    Eigen::VectorXd weight;  // D (+1 with bias)
  };
  std::vector<std::string> classes;  // catalog order
  std::vector<PairModel> pairs;      // (0,1), (0,2), ..., (1,2), ...
  bool include_bias = true;

  double decision(const PairModel& pm, const Eigen::VectorXd& x) const;
};

/// Train on a fully labeled dataset covering >= 2 classes. Pair order,
/// sample order and coordinate order are fixed, so retraining on identical
/// data gives bit-identical weights.
OvoModel train_ovo(const Dataset& data, const ClassCatalog& catalog, const SvmConfig& cfg);

/// Majority vote over the pairwise decisions; vote ties go to the lowest
/// class index in catalog order, and a zero pairwise score votes for the pair's
/// lower-index class.
std::vector<std::string> predict(const OvoModel& model, const Dataset& samples);

std::string model_to_json(const OvoModel& model);
OvoModel model_from_json(const std::string& text);

}  // namespace osda

#endif  // OSDA_SVM_HPP

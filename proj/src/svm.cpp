#include "osda/svm.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "osda/common.hpp"

namespace osda {

using json = nlohmann::json;

PairSolution train_pair_svm(const Eigen::MatrixXd& x, const std::vector<double>& y,
                            const SvmConfig& cfg) {
  const Eigen::Index dim = x.rows();
  const Eigen::Index n = x.cols();
  if (static_cast<Eigen::Index>(y.size()) != n) throw DataError("label count mismatch");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd qii(n);
  for (Eigen::Index i = 0; i < n; ++i) qii(i) = x.col(i).squaredNorm();

  const double c = cfg.c_param;
  PairSolution sol;
  for (sol.passes = 0; sol.passes < cfg.max_passes; ++sol.passes) {
    double max_violation = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = y[static_cast<std::size_t>(i)] * w.dot(x.col(i)) - 1.0;
      double pg = g;
      if (alpha(i) <= 0.0)
        pg = std::min(g, 0.0);
      else if (alpha(i) >= c)
        pg = std::max(g, 0.0);
      max_violation = std::max(max_violation, std::abs(pg));
      if (pg == 0.0) continue;
      double next;
      if (qii(i) > 0.0)
        next = std::min(std::max(alpha(i) - g / qii(i), 0.0), c);
      else
        next = g < 0.0 ? c : 0.0;
      if (next != alpha(i)) {
        w += (next - alpha(i)) * y[static_cast<std::size_t>(i)] * x.col(i);
        alpha(i) = next;
      }
    }
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * w.dot(x.col(i)));
    sol.primal_objective = 0.5 * w.squaredNorm() + c * hinge;
    sol.dual_objective = alpha.sum() - 0.5 * w.squaredNorm();
    if (sol.primal_objective - sol.dual_objective <=
            cfg.tolerance * (1.0 + sol.primal_objective) &&
        max_violation <= cfg.tolerance)
      break;
  }
  sol.weight = std::move(w);
  sol.alpha = std::move(alpha);
  return sol;
}

namespace {

Eigen::VectorXd augment(const Eigen::VectorXd& x, bool include_bias) {
  if (!include_bias) return x;
  Eigen::VectorXd out(x.size() + 1);
  out.head(x.size()) = x;
  out(x.size()) = kBiasFeature;
  return out;
}

}  // namespace

double OvoModel::decision(const PairModel& pm, const Eigen::VectorXd& x) const {
  if (include_bias)
    return pm.weight.head(x.size()).dot(x) + pm.weight(x.size()) * kBiasFeature;
  return pm.weight.dot(x);
}

OvoModel train_ovo(const Dataset& data, const ClassCatalog& catalog, const SvmConfig& cfg) {
  if (cfg.c_param <= 0.0) throw ConfigError("svm c_param must be positive");
  data.validate(&catalog);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!data.is_labeled(i))
      throw LabelError("training sample '" + data.ids[i] + "' is unlabeled");

  // classes present in the data, catalog order (unknown last)
  std::vector<std::string> present;
  std::vector<std::string> order = catalog.shared_classes;
  order.push_back(catalog.unknown_id);
  for (const auto& name : order)
    if (!data.indices_of(name).empty()) present.push_back(name);
  if (present.size() < 2) throw DataError("need at least two classes to train");

  OvoModel model;
  model.classes = present;
  model.include_bias = cfg.include_bias;
  const Eigen::Index aug_dim = data.dim() + (cfg.include_bias ? 1 : 0);
  for (std::size_t i = 0; i < present.size(); ++i) {
    for (std::size_t j = i + 1; j < present.size(); ++j) {
      auto pos = data.indices_of(present[i]);
      auto neg = data.indices_of(present[j]);
      // keep the original row order: positives and negatives interleaved
      std::vector<std::size_t> rows;
      rows.reserve(pos.size() + neg.size());
      std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(rows));
      Eigen::MatrixXd x(aug_dim, static_cast<Eigen::Index>(rows.size()));
      std::vector<double> y(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        x.col(static_cast<Eigen::Index>(r)) =
            augment(data.features.col(static_cast<Eigen::Index>(rows[r])), cfg.include_bias);
        y[r] = data.labels[rows[r]] == present[i] ? 1.0 : -1.0;
      }
      OvoModel::PairModel pm;
      pm.first = static_cast<int>(i);
      pm.second = static_cast<int>(j);
      pm.weight = train_pair_svm(x, y, cfg).weight;
      if (!pm.weight.allFinite()) throw NumericError("non-finite SVM weights");
      model.pairs.push_back(std::move(pm));
    }
  }
  return model;
}

std::vector<std::string> predict(const OvoModel& model, const Dataset& samples) {
  std::vector<std::string> out;
  out.reserve(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    std::vector<int> votes(model.classes.size(), 0);
    for (const auto& pm : model.pairs) {
      double score = model.decision(pm, samples.features.col(static_cast<Eigen::Index>(s)));
      ++votes[static_cast<std::size_t>(score >= 0.0 ? pm.first : pm.second)];
    }
    std::size_t winner = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
      if (votes[c] > votes[winner]) winner = c;
    out.push_back(model.classes[winner]);
  }
  return out;
}

std::string model_to_json(const OvoModel& model) {
  json j;
  j["classes"] = model.classes;
  j["include_bias"] = model.include_bias;
  json pairs = json::array();
  for (const auto& pm : model.pairs) {
    json p;
    p["first"] = pm.first;
    p["second"] = pm.second;
    std::vector<double> w(pm.weight.data(), pm.weight.data() + pm.weight.size());
    p["weight"] = w;
    pairs.push_back(p);
  }
  j["pairs"] = pairs;
  return j.dump(2);
}

OvoModel model_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("invalid model JSON");
  OvoModel model;
  model.classes = j.at("classes").get<std::vector<std::string>>();
  model.include_bias = j.at("include_bias").get<bool>();
  for (const auto& p : j.at("pairs")) {
    OvoModel::PairModel pm;
    pm.first = p.at("first").get<int>();
    pm.second = p.at("second").get<int>();
    auto w = p.at("weight").get<std::vector<double>>();
    pm.weight = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    model.pairs.push_back(std::move(pm));
  }
  return model;
}

}  // namespace osda

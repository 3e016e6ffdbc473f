#include "osda/ati.hpp"

#include <cmath>

#include "osda/common.hpp"

namespace osda {

std::string variant_name(Variant v, int neighbor_k) {
  switch (v) {
    case Variant::Ati:
      return "ati";
    case Variant::AtiLambda:
      return "ati-lambda";
    case Variant::AtiLambdaNk:
      return "ati-lambda-n" + std::to_string(neighbor_k);
  }
  return "ati";
}

std::pair<Variant, int> parse_variant(const std::string& name) {
  if (name == "ati") return {Variant::Ati, 0};
  if (name == "ati-lambda") return {Variant::AtiLambda, 0};
  if (name == "ati-lambda-n1") return {Variant::AtiLambdaNk, 1};
  if (name == "ati-lambda-n2") return {Variant::AtiLambdaNk, 2};
  throw ConfigError("unknown variant '" + name + "'");
}

std::vector<std::string> active_classes(const Dataset& source, const ClassCatalog& catalog) {
  std::vector<std::string> names = catalog.shared_classes;
  if (!source.indices_of(catalog.unknown_id).empty()) names.push_back(catalog.unknown_id);
  return names;
}

namespace {

double assignment_accuracy(const Assignment& a, const std::vector<std::string>& truth,
                           const std::vector<std::string>& class_names) {
  std::size_t correct = 0;
  std::size_t assigned = 0;
  for (std::size_t t = 0; t < a.n_targets(); ++t) {
    if (a.outlier(t)) continue;
    ++assigned;
    if (class_names[static_cast<std::size_t>(a.labels[t])] == truth[t]) ++correct;
  }
  return assigned == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(assigned);
}

}  // namespace

AtiResult run_ati(const Dataset& source, const Dataset& target, const ClassCatalog& catalog,
                  const AtiConfig& cfg) {
  if (cfg.epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (source.dim() != target.dim()) throw DataError("source/target dimensionality mismatch");
  source.validate(&catalog);
  target.validate();

  const std::vector<std::string> class_names = active_classes(source, catalog);
  const int n_classes = static_cast<int>(class_names.size());

  SolveConfig solve_cfg;
  solve_cfg.rho = cfg.rho;
  solve_cfg.coverage = cfg.coverage;
  solve_cfg.backend = cfg.backend;
  solve_cfg.fixed_labels = cfg.semi_supervised_labels;
  if (!cfg.cover_unknown && class_names.back() == catalog.unknown_id)
    solve_cfg.uncovered_class = n_classes - 1;
  for (const auto& [t, c] : solve_cfg.fixed_labels) {
    if (t < 0 || t >= static_cast<int>(target.size()))
      throw DataError("semi-supervised target index out of range");
    if (c < 0 || c >= n_classes)
      throw DataError("semi-supervised class index out of range");
  }

  const bool locality = cfg.variant == Variant::AtiLambdaNk && cfg.neighbor_k > 0;
  // targets never move, so the neighborhood structure is fixed across iterations
  NeighborGraph nbrs;
  if (locality) nbrs = build_neighbors(target, cfg.neighbor_k);

  AtiResult result;
  result.adapted_source = source;
  const Eigen::Index dim = source.dim();
  Eigen::MatrixXd composite = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd w_prev = Eigen::MatrixXd::Identity(dim, dim);

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    try {
      MeanTable means = class_means(result.adapted_source, catalog);
      CostMatrix costs = compute_costs(means, target);
      solve_cfg.lambda =
          cfg.variant == Variant::Ati ? kInfinity : lambda_from_costs(costs, cfg.rho);

      ClassDistanceMatrix dcc;
      if (locality) dcc = class_distances(means);

      Assignment assignment;
      if (k == 1 && cfg.initial_assignment) {
        assignment = *cfg.initial_assignment;
        if (assignment.n_targets() != target.size() || assignment.n_classes != n_classes)
          throw DataError("initial assignment does not match the instance");
        assignment.objective =
            assignment_objective(costs, locality ? &dcc : nullptr, locality ? &nbrs : nullptr,
                                 assignment.labels, solve_cfg.lambda);
      } else if (locality) {
        assignment = solve_locality(costs, dcc, nbrs, solve_cfg);
      } else if (!solve_cfg.fixed_labels.empty()) {
        assignment = solve_semi_supervised(costs, solve_cfg);
      } else {
        assignment = solve_unsupervised(costs, solve_cfg);
      }

      if (cfg.instance_dump_dir) {
        std::string dump = instance_to_json(costs, solve_cfg, locality ? &dcc : nullptr,
                                            locality ? &nbrs : nullptr, &assignment);
        write_file(*cfg.instance_dump_dir + "/assign_iter_" + std::to_string(k) + ".json",
                   dump);
      }

      AssignmentMatrices pairs = build_pairs(assignment, means, target);
      Transform step = estimate_transform(pairs, w_prev);

      IterationRecord rec;
      rec.iteration = k;
      rec.lambda = solve_cfg.lambda;
      rec.n_assigned = assignment.n_assigned();
      rec.n_outliers = assignment.n_outliers();
      rec.objective = assignment.objective;
      rec.stop_metric = std::sqrt(2.0 * step.residual);
      if (cfg.ground_truth_labels)
        rec.assignment_accuracy =
            assignment_accuracy(assignment, *cfg.ground_truth_labels, class_names);
      rec.assignment = std::move(assignment);
      result.history.push_back(std::move(rec));

      result.adapted_source = apply_transform(step, result.adapted_source);
      composite = step.w * composite;
      w_prev = step.w;
      if (result.history.back().stop_metric < cfg.epsilon) break;
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("iteration " + std::to_string(k) + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(k) + ": " + e.what());
    } catch (const CoverageError& e) {
      throw CoverageError("iteration " + std::to_string(k) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("iteration " + std::to_string(k) + ": " + e.what());
    }
  }

  result.transform.w = composite;
  result.transform.iterations = static_cast<int>(result.history.size());
  result.transform.residual = result.history.back().stop_metric *
                              result.history.back().stop_metric / 2.0;
  result.transform.converged = result.history.back().stop_metric < cfg.epsilon;
  return result;
}

Assignment seed_assignments(const Dataset& target, const std::vector<std::string>& truth,
                            const ClassCatalog& catalog, int n_classes,
                            double fraction_correct, std::uint64_t seed) {
  if (fraction_correct < 0.0 || fraction_correct > 1.0)
    throw ConfigError("fraction_correct must be in [0, 1]");
  if (truth.size() != target.size()) throw DataError("truth/target size mismatch");
  const std::size_t n = target.size();
  const auto n_correct = static_cast<std::size_t>(
      std::llround(fraction_correct * static_cast<double>(n)));

  Rng rng = Rng::stream(seed, "seed-assignments");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  Assignment out;
  out.n_classes = n_classes;
  out.labels.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t t = order[r];
    if (r < n_correct) {
      auto idx = catalog.index_of(truth[t]);
      if (static_cast<int>(idx) >= n_classes)
        throw DataError("true class '" + truth[t] + "' is not an active class");
      out.labels[t] = static_cast<int>(idx);
    } else {
      out.labels[t] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_classes)));
    }
  }
  return out;
}

std::string history_to_csv(const std::vector<IterationRecord>& history) {
  std::string out = "iteration,lambda,n_assigned,n_outliers,objective,stop_metric,assign_acc\n";
  for (const auto& rec : history) {
    out += std::to_string(rec.iteration);
    out += ',';
    out += format_double(rec.lambda);
    out += ',';
    out += std::to_string(rec.n_assigned);
    out += ',';
    out += std::to_string(rec.n_outliers);
    out += ',';
    out += format_double(rec.objective);
    out += ',';
    out += format_double(rec.stop_metric);
    out += ',';
    if (rec.assignment_accuracy) out += format_double(*rec.assignment_accuracy);
    out += '\n';
  }
  return out;
}

}  // namespace osda

#ifndef OSDA_EVAL_HPP
#define OSDA_EVAL_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "osda/dataset.hpp"

namespace osda {

enum class Protocol { CS, OS, OS_STAR };

std::string protocol_name(Protocol p);
Protocol parse_protocol(const std::string& name);

/// Scoring result under one protocol. The confusion matrix is |C| x |C| in
/// catalog order with the unknown class last; rows are true classes, columns
/// predictions.
struct EvalReport {
  Protocol protocol = Protocol::OS;
  std::vector<std::string> classes;  // catalog order, unknown last
  Eigen::MatrixXi confusion;
  double overall_accuracy = 0.0;
  double mean_class_accuracy = 0.0;
  std::size_t n_evaluated = 0;
};

/// Score predictions against catalog-level truth. OS scores every target;
/// OS* only the targets whose true class is shared (an unknown prediction on
/// them counts as an error); CS requires that no unknown labels occur in the
/// truth at all.
EvalReport score(const std::vector<std::string>& predictions,
                 const std::vector<std::string>& truth, const ClassCatalog& catalog,
                 Protocol protocol);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1); 0 for a single run
  double min = 0.0;
  double max = 0.0;
};

struct AggregateReport {
  Protocol protocol = Protocol::OS;
  std::size_t n_runs = 0;
  MetricSummary overall_accuracy;
  MetricSummary mean_class_accuracy;
};

/// Mean and run-to-run standard deviation across repeated evaluations of the
/// same protocol.
AggregateReport aggregate(const std::vector<EvalReport>& reports);

std::string report_to_json(const EvalReport& report);
std::string confusion_to_csv(const EvalReport& report);
/// gnuplot-ready matrix block (counts separated by spaces).
std::string confusion_to_plot_data(const EvalReport& report);

}  // namespace osda

#endif  // OSDA_EVAL_HPP

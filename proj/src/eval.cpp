#include "osda/eval.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "osda/common.hpp"

namespace osda {

using json = nlohmann::json;

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::CS:
      return "cs";
    case Protocol::OS:
      return "os";
    case Protocol::OS_STAR:
      return "os-star";
  }
  return "os";
}

Protocol parse_protocol(const std::string& name) {
  if (name == "cs") return Protocol::CS;
  if (name == "os") return Protocol::OS;
  if (name == "os-star" || name == "os*") return Protocol::OS_STAR;
  throw ConfigError("unknown protocol '" + name + "'");
}

EvalReport score(const std::vector<std::string>& predictions,
                 const std::vector<std::string>& truth, const ClassCatalog& catalog,
                 Protocol protocol) {
  if (predictions.size() != truth.size())
    throw DataError("prediction/truth length mismatch");

  EvalReport report;
  report.protocol = protocol;
  report.classes = catalog.shared_classes;
  report.classes.push_back(catalog.unknown_id);
  const std::size_t n_classes = report.classes.size();
  report.confusion = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n_classes),
                                           static_cast<Eigen::Index>(n_classes));

  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const std::string& t = truth[i];
    const std::string& p = predictions[i];
    if (!catalog.contains(t)) throw LabelError("truth label '" + t + "' not in catalog");
    if (!catalog.contains(p)) throw LabelError("prediction '" + p + "' not in catalog");
    if (protocol == Protocol::CS && t == catalog.unknown_id)
      throw ProtocolError("closed-set scoring with unknown labels present");
    if (protocol == Protocol::OS_STAR && t == catalog.unknown_id) continue;
    report.confusion(static_cast<Eigen::Index>(catalog.index_of(t)),
                     static_cast<Eigen::Index>(catalog.index_of(p))) += 1;
    ++report.n_evaluated;
  }

  const double total = static_cast<double>(report.confusion.sum());
  report.overall_accuracy =
      total > 0 ? static_cast<double>(report.confusion.trace()) / total : 0.0;
  double recall_sum = 0.0;
  std::size_t non_empty_rows = 0;
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    const double row_total = static_cast<double>(report.confusion.row(r).sum());
    if (row_total > 0) {
      recall_sum += static_cast<double>(report.confusion(r, r)) / row_total;
      ++non_empty_rows;
    }
  }
  report.mean_class_accuracy = non_empty_rows > 0 ? recall_sum / static_cast<double>(non_empty_rows) : 0.0;
  return report;
}

namespace {

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.min = kInfinity;
  s.max = -kInfinity;
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace

AggregateReport aggregate(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw DataError("aggregate: no reports");
  AggregateReport agg;
  agg.protocol = reports.front().protocol;
  agg.n_runs = reports.size();
  std::vector<double> overall, mean_class;
  for (const auto& r : reports) {
    if (r.protocol != agg.protocol)
      throw ProtocolError("aggregate: mixed protocols");
    overall.push_back(r.overall_accuracy);
    mean_class.push_back(r.mean_class_accuracy);
  }
  agg.overall_accuracy = summarize(overall);
  agg.mean_class_accuracy = summarize(mean_class);
  return agg;
}

std::string report_to_json(const EvalReport& report) {
  json j;
  j["protocol"] = protocol_name(report.protocol);
  j["classes"] = report.classes;
  json rows = json::array();
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c)
      row.push_back(report.confusion(r, c));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  j["overall_accuracy"] = report.overall_accuracy;
  j["mean_class_accuracy"] = report.mean_class_accuracy;
  j["n_evaluated"] = report.n_evaluated;
  return j.dump(2);
}

std::string confusion_to_csv(const EvalReport& report) {
  std::string out = "true_class";
  for (const auto& c : report.classes) out += "," + c;
  out += '\n';
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    out += report.classes[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c)
      out += "," + std::to_string(report.confusion(r, c));
    out += '\n';
  }
  return out;
}

std::string confusion_to_plot_data(const EvalReport& report) {
  std::string out;
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) {
      if (c) out += ' ';
      out += std::to_string(report.confusion(r, c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace osda

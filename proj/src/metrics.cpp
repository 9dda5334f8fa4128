#include "pmffnn/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "pmffnn/errors.hpp"

namespace pmffnn {

ConfusionMatrix::ConfusionMatrix(int n_classes)
    : n_classes_(n_classes), counts_(static_cast<std::size_t>(n_classes) * n_classes, 0) {
  if (n_classes < 1) throw DomainError("confusion matrix: n_classes must be >= 1");
}

long long ConfusionMatrix::total() const {
  long long t = 0;
  for (long long c : counts_) t += c;
  return t;
}

ConfusionMatrix confusion(const std::vector<int>& true_labels,
                          const std::vector<int>& pred_labels, int n_classes) {
  if (true_labels.size() != pred_labels.size()) {
    throw ShapeError("confusion: label vectors differ in length");
  }
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const int t = true_labels[i];
    const int p = pred_labels[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
      throw DomainError("confusion: label out of range [0, " + std::to_string(n_classes) +
                        ") at index " + std::to_string(i));
    }
    ++cm.at(t, p);
  }
  return cm;
}

std::optional<double> MetricsReport::get(const std::string& name) const {
  for (const auto& [key, value] : values) {
    if (key == name) return value;
  }
  return std::nullopt;
}

MetricsReport classification_metrics(const ConfusionMatrix& cm) {
  const long long total = cm.total();
  if (total < 1) throw DomainError("classification_metrics: empty confusion matrix");
  const int k = cm.n_classes();

  long long trace = 0;
  for (int c = 0; c < k; ++c) trace += cm.at(c, c);

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  for (int c = 0; c < k; ++c) {
    long long col = 0, row = 0;
    for (int j = 0; j < k; ++j) {
      col += cm.at(j, c);
      row += cm.at(c, j);
    }
    // 0/0 for an absent class counts as 0
    if (col > 0) precision_sum += static_cast<double>(cm.at(c, c)) / static_cast<double>(col);
    if (row > 0) recall_sum += static_cast<double>(cm.at(c, c)) / static_cast<double>(row);
  }
  const double precision = precision_sum / k;
  const double recall = recall_sum / k;
  const double f1 =
      (precision + recall > 0.0) ? 2.0 * precision * recall / (precision + recall) : 0.0;

  MetricsReport report;
  report.task = "classification";
  report.values = {{"Accuracy", static_cast<double>(trace) / static_cast<double>(total)},
                   {"Precision", precision},
                   {"Recall", recall},
                   {"F1-Score", f1}};
  return report;
}

MetricsReport regression_metrics(const Matrix2D& pred, const Matrix2D& target) {
  if (!pred.same_shape(target)) {
    throw ShapeError("regression_metrics: shapes disagree, " + pred.shape_str() + " vs " +
                     target.shape_str());
  }
  if (pred.rows() < 2) {
    throw DomainError("regression_metrics: need at least 2 rows for R2");
  }
  const double n = static_cast<double>(pred.size());
  double abs_sum = 0.0, sq_sum = 0.0, target_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred.flat()[i] - target.flat()[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    target_sum += target.flat()[i];
  }
  const double target_mean = target_sum / n;
  double sst = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = target.flat()[i] - target_mean;
    sst += d * d;
  }

  MetricsReport report;
  report.task = "regression";
  report.values = {{"MAE", abs_sum / n}, {"RMSE", std::sqrt(sq_sum / n)}};
  if (sst > 0.0) {
    report.values.emplace_back("R2", 1.0 - sq_sum / sst);
  }
  return report;
}

std::string render_metrics_table(const std::vector<std::string>& model_names,
                                 const std::vector<MetricsReport>& reports) {
  if (model_names.size() != reports.size() || reports.empty()) {
    throw DomainError("render_metrics_table: one name per report required");
  }
  // Row set comes from the first report; missing entries render as "-".
  std::vector<std::string> metric_names;
  for (const auto& [name, value] : reports.front().values) metric_names.push_back(name);

  std::size_t name_width = std::string("Metric").size();
  for (const auto& m : metric_names) name_width = std::max(name_width, m.size());

  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t width) {
    out << s;
    for (std::size_t i = s.size(); i < width + 2; ++i) out << ' ';
  };

  std::vector<std::size_t> col_widths;
  for (const auto& name : model_names) col_widths.push_back(std::max<std::size_t>(name.size(), 8));

  pad("Metric", name_width);
  for (std::size_t i = 0; i < model_names.size(); ++i) pad(model_names[i], col_widths[i]);
  out << '\n';

  char buf[32];
  for (const auto& metric : metric_names) {
    pad(metric, name_width);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto value = reports[i].get(metric);
      if (value) {
        std::snprintf(buf, sizeof(buf), "%.4f", *value);
        pad(buf, col_widths[i]);
      } else {
        pad("-", col_widths[i]);
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string metrics_to_keyvalue(const MetricsReport& report) {
  std::ostringstream out;
  out << "task " << report.task << '\n';
  char buf[40];
  for (const auto& [name, value] : report.values) {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << name << ' ' << buf << '\n';
  }
  return out.str();
}

}  // namespace pmffnn

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmffnn/matrix.hpp"

namespace pmffnn {

/// K x K counts; entry (i, j) counts samples of true class i predicted as j.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int n_classes);

  long long& at(int true_class, int predicted) {
    return counts_[static_cast<std::size_t>(true_class) * n_classes_ + predicted];
  }
  long long at(int true_class, int predicted) const {
    return counts_[static_cast<std::size_t>(true_class) * n_classes_ + predicted];
  }
  int n_classes() const { return n_classes_; }
  long long total() const;

 private:
  int n_classes_;
  std::vector<long long> counts_;
};

ConfusionMatrix confusion(const std::vector<int>& true_labels,
                          const std::vector<int>& pred_labels, int n_classes);

/// Named metric values in report order plus the task tag.
struct MetricsReport {
  std::string task;
  std::vector<std::pair<std::string, double>> values;

  std::optional<double> get(const std::string& name) const;
};

/// Accuracy plus macro-averaged precision/recall; F1 is the harmonic mean
/// of the two macro averages. A class with no samples (or no predictions)
/// contributes 0 to its macro average.
MetricsReport classification_metrics(const ConfusionMatrix& cm);

/// MAE, RMSE and R-squared (about the target mean). A constant target has
/// no defined R-squared and the entry is omitted.
MetricsReport regression_metrics(const Matrix2D& pred, const Matrix2D& target);

/// Aligned metric-by-model text table, one column per report.
std::string render_metrics_table(const std::vector<std::string>& model_names,
                                 const std::vector<MetricsReport>& reports);

/// "name value" lines for machine consumption.
std::string metrics_to_keyvalue(const MetricsReport& report);

}  // namespace pmffnn

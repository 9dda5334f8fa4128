#include "pmffnn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pmffnn/errors.hpp"
#include "pmffnn/rng.hpp"

namespace pmffnn {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return s.substr(a, b - a);
}

double parse_cell(const std::string& raw, std::size_t data_row, const std::string& column) {
  const std::string cell = trim(raw);
  if (cell.empty()) {
    throw ParseError("missing value at row " + std::to_string(data_row) + ", column '" + column +
                     "'");
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError("non-numeric cell '" + cell + "' at row " + std::to_string(data_row) +
                     ", column '" + column + "'");
  }
  return value;
}

DatasetTable take_rows(const DatasetTable& table, const std::vector<std::size_t>& rows) {
  DatasetTable out;
  out.task = table.task;
  out.feature_names = table.feature_names;
  out.class_names = table.class_names;
  out.features = Matrix2D(rows.size(), table.features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < table.features.cols(); ++c) {
      out.features(i, c) = table.features(rows[i], c);
    }
  }
  if (table.task == Task::Classification) {
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(table.labels[r]);
  } else {
    out.targets = Matrix2D(rows.size(), table.targets.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t c = 0; c < table.targets.cols(); ++c) {
        out.targets(i, c) = table.targets(rows[i], c);
      }
    }
  }
  return out;
}

}  // namespace

DatasetTable load_csv(const std::string& path, const std::string& target_column, Task task) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file: " + path);

  std::vector<std::string> header = split_fields(line);
  for (auto& h : header) h = trim(h);
  if (header.empty() || (header.size() == 1 && header[0].empty())) {
    throw ParseError("empty header row in " + path);
  }

  std::size_t target_index = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == target_column) {
      target_index = i;
      break;
    }
  }
  if (target_index == header.size()) {
    throw ParseError("target column '" + target_column + "' not found in " + path);
  }

  DatasetTable table;
  table.task = task;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != target_index) table.feature_names.push_back(header[i]);
  }

  std::vector<double> feature_values;
  std::vector<double> numeric_targets;
  std::map<std::string, int> label_index;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    ++data_row;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(data_row) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == target_index) {
        if (task == Task::Classification) {
          const std::string label = trim(fields[i]);
          if (label.empty()) {
            throw ParseError("missing value at row " + std::to_string(data_row) + ", column '" +
                             header[i] + "'");
          }
          auto [it, inserted] =
              label_index.emplace(label, static_cast<int>(label_index.size()));
          if (inserted) table.class_names.push_back(label);
          table.labels.push_back(it->second);
        } else {
          numeric_targets.push_back(parse_cell(fields[i], data_row, header[i]));
        }
      } else {
        feature_values.push_back(parse_cell(fields[i], data_row, header[i]));
      }
    }
  }
  if (data_row == 0) throw ParseError("no data rows in " + path);

  const std::size_t n_features = table.feature_names.size();
  table.features = Matrix2D(data_row, n_features);
  table.features.flat() = std::move(feature_values);
  if (task == Task::Regression) {
    table.targets = Matrix2D(data_row, 1);
    table.targets.flat() = std::move(numeric_targets);
  }
  return table;
}

void save_csv(const std::string& path, const DatasetTable& table,
              const std::string& target_column) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);

  char buf[40];
  auto write_number = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };

  for (std::size_t i = 0; i < table.feature_names.size(); ++i) {
    if (i) out << ',';
    out << table.feature_names[i];
  }
  out << ',' << target_column << '\n';

  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < table.features.cols(); ++c) {
      if (c) out << ',';
      write_number(table.features(r, c));
    }
    out << ',';
    if (table.task == Task::Classification) {
      const int label = table.labels[r];
      if (!table.class_names.empty()) {
        out << table.class_names[static_cast<std::size_t>(label)];
      } else {
        out << label;
      }
    } else {
      write_number(table.targets(r, 0));
    }
    out << '\n';
  }
  if (!out) throw ParseError("write failed: " + path);
}

StandardizeResult standardize(const DatasetTable& train, const DatasetTable& apply_to) {
  if (train.features.cols() != apply_to.features.cols()) {
    throw ShapeError("standardize: column counts disagree, " + train.features.shape_str() +
                     " vs " + apply_to.features.shape_str());
  }
  const ColumnMoments mom = column_moments(train.features);
  StandardizeStats stats{mom.mean, Matrix2D(1, train.features.cols())};
  for (std::size_t c = 0; c < train.features.cols(); ++c) {
    stats.stddev(0, c) = std::sqrt(mom.variance(0, c));
  }
  return StandardizeResult{apply_standardize(train, stats), apply_standardize(apply_to, stats),
                           std::move(stats)};
}

DatasetTable apply_standardize(const DatasetTable& table, const StandardizeStats& stats) {
  if (table.features.cols() != stats.mean.cols()) {
    throw ShapeError("apply_standardize: column counts disagree");
  }
  DatasetTable out = table;
  for (std::size_t c = 0; c < table.features.cols(); ++c) {
    const double denom = std::max(stats.stddev(0, c), 1e-8);
    for (std::size_t r = 0; r < table.features.rows(); ++r) {
      out.features(r, c) = (table.features(r, c) - stats.mean(0, c)) / denom;
    }
  }
  return out;
}

SplitResult train_test_split(const DatasetTable& table, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DomainError("train_test_split: test_fraction must lie in (0, 1)");
  }
  const std::size_t n = table.n_rows();
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test >= n) {
    throw DomainError("train_test_split: fraction " + std::to_string(test_fraction) + " on " +
                      std::to_string(n) + " rows leaves an empty split");
  }
  Rng rng(seed);
  const std::vector<std::size_t> perm = shuffled_indices(n, rng);
  const std::vector<std::size_t> test_rows(perm.begin(), perm.begin() + n_test);
  const std::vector<std::size_t> train_rows(perm.begin() + n_test, perm.end());
  return SplitResult{take_rows(table, train_rows), take_rows(table, test_rows)};
}

SynthModel synth_blockwise_model(int n_features, int n_groups, int n_classes,
                                 std::uint64_t seed) {
  if (n_features < 1 || n_groups < 1 || n_classes < 2) {
    throw DomainError("synth model: need n_features >= 1, n_groups >= 1, n_classes >= 2");
  }
  if (n_groups > n_features) {
    throw DomainError("synth model: more groups than features");
  }
  SynthModel model;
  const int base = n_features / n_groups;
  int col = 0;
  for (int g = 0; g < n_groups; ++g) {
    const int width = (g == n_groups - 1) ? n_features - col : base;
    std::vector<int> cols(width);
    for (int i = 0; i < width; ++i) cols[i] = col + i;
    col += width;
    model.groups.push_back(std::move(cols));
  }

  Rng w_rng = Rng(seed).derive(11);
  model.class_weights = w_rng.normal_matrix(n_classes, n_groups, 0.0, 1.0);

  // Orthonormalize rows where the group count allows it: orthonormal rows
  // make the class scores i.i.d. standard normal, so argmax labels come
  // out balanced. Surplus rows (n_classes > n_groups) are only normalized.
  Matrix2D& w = model.class_weights;
  for (int c = 0; c < n_classes; ++c) {
    if (c < n_groups) {
      for (int prev = 0; prev < c; ++prev) {
        double dot = 0.0;
        for (int g = 0; g < n_groups; ++g) dot += w(c, g) * w(prev, g);
        for (int g = 0; g < n_groups; ++g) w(c, g) -= dot * w(prev, g);
      }
    }
    double norm = 0.0;
    for (int g = 0; g < n_groups; ++g) norm += w(c, g) * w(c, g);
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw DomainError("synth model: degenerate weight row");
    for (int g = 0; g < n_groups; ++g) w(c, g) /= norm;
  }
  return model;
}

DatasetTable synth_blockwise(int n_rows, int n_features, int n_groups, int n_classes,
                             double noise_std, std::uint64_t seed) {
  if (n_rows < 1) throw DomainError("synth: n_rows must be >= 1");
  if (noise_std < 0.0) throw DomainError("synth: noise_std must be >= 0");
  const SynthModel model = synth_blockwise_model(n_features, n_groups, n_classes, seed);

  Rng feat_rng = Rng(seed).derive(12);
  Rng noise_rng = Rng(seed).derive(13);

  DatasetTable table;
  table.task = Task::Classification;
  table.features = feat_rng.normal_matrix(n_rows, n_features, 0.0, 1.0);
  table.feature_names.reserve(n_features);
  for (int c = 0; c < n_features; ++c) table.feature_names.push_back("f" + std::to_string(c));
  for (int k = 0; k < n_classes; ++k) table.class_names.push_back(std::to_string(k));

  table.labels.reserve(n_rows);
  std::vector<double> aggregates(n_groups);
  for (int r = 0; r < n_rows; ++r) {
    for (int g = 0; g < n_groups; ++g) {
      double sum = 0.0;
      for (int c : model.groups[g]) sum += table.features(r, c);
      // normalized so the aggregate is a unit-variance signal
      aggregates[g] = sum / std::sqrt(static_cast<double>(model.groups[g].size()));
    }
    int best = 0;
    double best_score = -1e300;
    for (int k = 0; k < n_classes; ++k) {
      double score = 0.0;
      for (int g = 0; g < n_groups; ++g) score += model.class_weights(k, g) * aggregates[g];
      score += noise_std == 0.0 ? 0.0 : noise_std * noise_rng.normal();
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    table.labels.push_back(best);
  }
  return table;
}

}  // namespace pmffnn

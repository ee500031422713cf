#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "actseg/types.hpp"

namespace actseg::metrics {

struct ConfusionTable {
  int num_labels = 0;
  std::vector<long long> counts;

  explicit ConfusionTable(int num_labels_)
      : num_labels(num_labels_),
        counts(static_cast<std::size_t>(num_labels_) * num_labels_, 0) {}

  long long& at(int truth, int pred) {
    return counts[static_cast<std::size_t>(truth) * num_labels + pred];
  }
  long long at(int truth, int pred) const {
    return counts[static_cast<std::size_t>(truth) * num_labels + pred];
  }
  long long total() const;
};

struct LabelMetrics {
  int label = 0;
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool undefined_precision = false;
  bool undefined_recall = false;

  long long support() const { return tp + fn; }
};

struct ReportMeta {
  std::string model;
  std::string scenario;
  double rho = 0.0;
  int repetition = 0;
  std::uint64_t seed = 0;
};

struct MetricsReport {
  ReportMeta meta;
  std::vector<LabelMetrics> per_label;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  long long tokens = 0;
  bool any_undefined = false;
};

struct AggregateRow {
  std::string model;
  std::string scenario;
  double rho = 0.0;
  int n = 0;
  double precision_mean = 0.0;
  double precision_std = 0.0;
  double recall_mean = 0.0;
  double recall_std = 0.0;
  double f1_mean = 0.0;
  double f1_std = 0.0;
};

ConfusionTable confusion(const std::vector<std::vector<int>>& truth,
                         const std::vector<std::vector<int>>& predicted,
                         int num_labels);

// Macro averages run over labels that appear in the truth; zero-denominator
// precision or recall is reported as 0 and flagged.
MetricsReport score(const ConfusionTable& table, ReportMeta meta = {});
MetricsReport score(const std::vector<std::vector<int>>& truth,
                    const std::vector<std::vector<int>>& predicted,
                    int num_labels, ReportMeta meta = {});

// Mean and population stddev of the macro metrics per (model, scenario, rho)
// cell, sorted by that key.
std::vector<AggregateRow> aggregate(const std::vector<MetricsReport>& reports);

void write_report_csv(std::ostream& out,
                      const std::vector<MetricsReport>& reports);
void write_aggregate_csv(std::ostream& out,
                         const std::vector<AggregateRow>& rows);
// Plot data: rho against mean macro F1 per (model, scenario).
void write_fscore_by_rho(std::ostream& out,
                         const std::vector<AggregateRow>& rows);

}  // namespace actseg::metrics

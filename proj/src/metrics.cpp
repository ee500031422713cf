#include "actseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <tuple>

namespace actseg::metrics {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_rho(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

long long ConfusionTable::total() const {
  long long t = 0;
  for (long long c : counts) t += c;
  return t;
}

ConfusionTable confusion(const std::vector<std::vector<int>>& truth,
                         const std::vector<std::vector<int>>& predicted,
                         int num_labels) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("truth and prediction counts differ");
  ConfusionTable table(num_labels);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != predicted[i].size())
      throw std::invalid_argument("sequence length mismatch at index " +
                                  std::to_string(i));
    for (std::size_t t = 0; t < truth[i].size(); ++t) {
      const int a = truth[i][t];
      const int b = predicted[i][t];
      if (a < 0 || a >= num_labels || b < 0 || b >= num_labels)
        throw std::invalid_argument("label outside alphabet");
      ++table.at(a, b);
    }
  }
  return table;
}

MetricsReport score(const ConfusionTable& table, ReportMeta meta) {
  const int Y = table.num_labels;
  MetricsReport report;
  report.meta = std::move(meta);
  report.tokens = table.total();
  report.per_label.resize(Y);

  int supported = 0;
  for (int y = 0; y < Y; ++y) {
    LabelMetrics& m = report.per_label[y];
    m.label = y;
    m.tp = table.at(y, y);
    for (int o = 0; o < Y; ++o) {
      if (o == y) continue;
      m.fp += table.at(o, y);
      m.fn += table.at(y, o);
    }
    if (m.tp + m.fp > 0)
      m.precision = static_cast<double>(m.tp) / (m.tp + m.fp);
    else
      m.undefined_precision = true;
    if (m.tp + m.fn > 0)
      m.recall = static_cast<double>(m.tp) / (m.tp + m.fn);
    else
      m.undefined_recall = true;
    if (m.precision + m.recall > 0.0)
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    if (m.support() > 0) {
      ++supported;
      report.macro_precision += m.precision;
      report.macro_recall += m.recall;
      report.macro_f1 += m.f1;
      if (m.undefined_precision) report.any_undefined = true;
    }
  }
  if (supported > 0) {
    report.macro_precision /= supported;
    report.macro_recall /= supported;
    report.macro_f1 /= supported;
  } else {
    report.any_undefined = true;
  }
  return report;
}

MetricsReport score(const std::vector<std::vector<int>>& truth,
                    const std::vector<std::vector<int>>& predicted,
                    int num_labels, ReportMeta meta) {
  return score(confusion(truth, predicted, num_labels), std::move(meta));
}

std::vector<AggregateRow> aggregate(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) return {};
  using Key = std::tuple<std::string, std::string, double>;
  std::map<Key, std::vector<const MetricsReport*>> groups;
  for (const MetricsReport& r : reports)
    groups[{r.meta.model, r.meta.scenario, r.meta.rho}].push_back(&r);

  std::vector<AggregateRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    AggregateRow row;
    row.model = std::get<0>(key);
    row.scenario = std::get<1>(key);
    row.rho = std::get<2>(key);
    row.n = static_cast<int>(members.size());
    const auto stats = [&](auto pick, double& mean, double& stddev) {
      double s = 0.0;
      for (const MetricsReport* r : members) s += pick(*r);
      mean = s / row.n;
      double v = 0.0;
      for (const MetricsReport* r : members) {
        const double d = pick(*r) - mean;
        v += d * d;
      }
      stddev = std::sqrt(v / row.n);
    };
    stats([](const MetricsReport& r) { return r.macro_precision; },
          row.precision_mean, row.precision_std);
    stats([](const MetricsReport& r) { return r.macro_recall; },
          row.recall_mean, row.recall_std);
    stats([](const MetricsReport& r) { return r.macro_f1; }, row.f1_mean,
          row.f1_std);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report_csv(std::ostream& out,
                      const std::vector<MetricsReport>& reports) {
  out << "model,scenario,rho,repetition,label,precision,recall,f1\n";
  for (const MetricsReport& r : reports) {
    const std::string prefix = r.meta.model + "," + r.meta.scenario + "," +
                               fmt_rho(r.meta.rho) + "," +
                               std::to_string(r.meta.repetition) + ",";
    for (const LabelMetrics& m : r.per_label)
      out << prefix << m.label << "," << fmt(m.precision) << ","
          << fmt(m.recall) << "," << fmt(m.f1) << "\n";
    out << prefix << "__macro__," << fmt(r.macro_precision) << ","
        << fmt(r.macro_recall) << "," << fmt(r.macro_f1) << "\n";
  }
}

void write_aggregate_csv(std::ostream& out,
                         const std::vector<AggregateRow>& rows) {
  out << "model,scenario,rho,n,precision_mean,precision_std,recall_mean,"
         "recall_std,f1_mean,f1_std\n";
  for (const AggregateRow& r : rows)
    out << r.model << "," << r.scenario << "," << fmt_rho(r.rho) << "," << r.n
        << "," << fmt(r.precision_mean) << "," << fmt(r.precision_std) << ","
        << fmt(r.recall_mean) << "," << fmt(r.recall_std) << ","
        << fmt(r.f1_mean) << "," << fmt(r.f1_std) << "\n";
}

void write_fscore_by_rho(std::ostream& out,
                         const std::vector<AggregateRow>& rows) {
  out << "model,scenario,rho,f1_mean\n";
  for (const AggregateRow& r : rows)
    out << r.model << "," << r.scenario << "," << fmt_rho(r.rho) << ","
        << fmt(r.f1_mean) << "\n";
}

}  // namespace actseg::metrics

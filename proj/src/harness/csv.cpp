#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "signsgd/harness.hpp"

namespace signsgd {

std::string format_number(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_comment_header(std::ostream& out, const ExperimentConfig& config) {
  out << "# signsgd " << kVersion << "\n";
  std::istringstream lines(to_text(config));
  std::string line;
  while (std::getline(lines, line)) {
    out << "# " << line << "\n";
  }
}

void write_run_csv(std::ostream& out, const ExperimentConfig& config, const RunRecord& record,
                   std::int64_t rep) {
  write_comment_header(out, config);
  out << kRunCsvHeader << "\n";
  for (const auto& row : record.rows) {
    if (!record.is_checkpoint(row.k)) {
      continue;
    }
    out << row.k << ',' << format_number(row.gamma) << ',' << format_number(row.f) << ','
        << format_number(row.g_l1) << ',' << format_number(row.g_l2) << ',' << format_number(row.rho_norm_hat)
        << ',' << row.bits_up << ',' << row.bits_down << ',' << rep << ',' << record.seed << "\n";
  }
}

namespace {

struct Moments {
  double mean;
  double std;
};

template <typename Get>
Moments column_moments(const std::vector<RunRecord>& runs, std::size_t row, Get get) {
  const auto r = static_cast<double>(runs.size());
  double total = 0.0;
  for (const auto& run : runs) {
    total += get(run.rows[row]);
  }
  const double mean = total / r;
  if (runs.size() < 2) {
    return {mean, std::numeric_limits<double>::quiet_NaN()};
  }
  double squares = 0.0;
  for (const auto& run : runs) {
    const double dev = get(run.rows[row]) - mean;
    squares += dev * dev;
  }
  return {mean, std::sqrt(squares / (r - 1.0))};
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& runs) {
  std::vector<AggregateRow> out;
  if (runs.empty()) {
    return out;
  }
  const auto& first = runs.front();
  for (const auto& run : runs) {
    if (run.rows.size() != first.rows.size() || run.checkpoint_stride != first.checkpoint_stride) {
      throw std::invalid_argument("aggregate: runs have different shapes");
    }
  }
  for (std::size_t i = 0; i < first.rows.size(); ++i) {
    const auto& row = first.rows[i];
    if (!first.is_checkpoint(row.k)) {
      continue;
    }
    AggregateRow a;
    a.k = row.k;
    a.gamma = row.gamma;
    a.bits_up = row.bits_up;
    a.bits_down = row.bits_down;
    a.reps = static_cast<std::int64_t>(runs.size());
    auto f = column_moments(runs, i, [](const RunRow& r) { return r.f; });
    auto l1 = column_moments(runs, i, [](const RunRow& r) { return r.g_l1; });
    auto l2 = column_moments(runs, i, [](const RunRow& r) { return r.g_l2; });
    auto rho = column_moments(runs, i, [](const RunRow& r) { return r.rho_norm_hat; });
    a.f_mean = f.mean;
    a.f_std = f.std;
    a.g_l1_mean = l1.mean;
    a.g_l1_std = l1.std;
    a.g_l2_mean = l2.mean;
    a.g_l2_std = l2.std;
    a.rho_mean = rho.mean;
    a.rho_std = rho.std;
    out.push_back(a);
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, const ExperimentConfig& config,
                         const std::vector<AggregateRow>& rows) {
  write_comment_header(out, config);
  out << kAggregateCsvHeader << "\n";
  for (const auto& a : rows) {
    out << a.k << ',' << format_number(a.gamma) << ',' << format_number(a.f_mean) << ','
        << format_number(a.f_std) << ',' << format_number(a.g_l1_mean) << ',' << format_number(a.g_l1_std) << ','
        << format_number(a.g_l2_mean) << ',' << format_number(a.g_l2_std) << ',' << format_number(a.rho_mean)
        << ',' << format_number(a.rho_std) << ',' << a.bits_up << ',' << a.bits_down << ',' << a.reps << "\n";
  }
}

}  // namespace signsgd

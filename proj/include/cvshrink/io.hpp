#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cvshrink/estimators.hpp"
#include "cvshrink/simulation.hpp"

namespace cvshrink {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form of a double (std::to_chars), so every
/// serialized number re-reads to the identical bit pattern.
std::string format_double(double value);

/// Write-temp-then-rename so readers never observe a partial file.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

nlohmann::json report_to_json(const PerformanceReport& report);
PerformanceReport report_from_json(const nlohmann::json& j);

nlohmann::json summary_to_json(const StudySummary& summary);

/// Columnar per-replication table. First line carries the schema version,
/// second the column header, then one tab-separated row per replication.
std::string reps_table_tsv(const StudySummary& summary);

/// Columnar chain dump: iteration, err0, mu0, tau0^2.
std::string chain_tsv(const PosteriorChain& chain);

/// One merged row per grid point, sorted by n2, estimator columns in the
/// fixed order naive, cv, eb, bayes.
struct GridRow {
  int n1 = 0;
  int n2 = 0;
  double true_err_mean = 0.0;
  double mae_naive = 0.0;
  double mae_cv = 0.0;
  double mae_eb = 0.0;
  double mae_bayes = 0.0;
  double coverage = 0.0;
  double baseline_mspe = 0.0;
  bool has_baseline = false;
};

GridRow grid_row_from_summary_json(const nlohmann::json& j);
std::string grid_table_tsv(std::vector<GridRow> rows);
std::string grid_table_pretty(const std::vector<GridRow>& rows);

}  // namespace cvshrink

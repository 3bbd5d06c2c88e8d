#include "cvshrink/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cvshrink {

using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::IoError, "rename to " + path + " failed: " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json report_to_json(const PerformanceReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["loss"] = to_string(report.loss_kind);
  j["n_splits"] = report.n_splits;
  j["estimates"] = {{"naive", report.naive}, {"cv", report.cv}};
  if (report.has_eb) j["estimates"]["eb"] = report.eb;
  if (report.has_bayes) j["estimates"]["bayes"] = report.bayes;
  if (report.has_bayes)
    j["credible_interval"] = {{"alpha", report.alpha}, {"lo", report.ci_lo}, {"hi", report.ci_hi}};
  j["mu_hat"] = report.mu_hat;
  if (report.has_eb) {
    j["tau2_hat"] = report.tau2_hat;
    j["tau2_clipped"] = report.tau2_clipped;
  }
  j["diagnostics"] = {{"nonconverged_fits", report.nonconverged_fits},
                      {"eb_available", report.has_eb},
                      {"bayes_available", report.has_bayes}};
  return j;
}

PerformanceReport report_from_json(const json& j) {
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kSchemaVersion)
    throw Error(ErrorCode::SchemaMismatch, "unsupported report schema");
  PerformanceReport r;
  r.loss_kind = j.at("loss").get<std::string>() == "cindex" ? LossKind::cindex : LossKind::mspe;
  r.n_splits = j.at("n_splits").get<int>();
  r.naive = j.at("estimates").at("naive").get<double>();
  r.cv = j.at("estimates").at("cv").get<double>();
  r.mu_hat = j.at("mu_hat").get<double>();
  r.has_eb = j.at("diagnostics").at("eb_available").get<bool>();
  r.has_bayes = j.at("diagnostics").at("bayes_available").get<bool>();
  r.nonconverged_fits = j.at("diagnostics").at("nonconverged_fits").get<int>();
  if (r.has_eb) {
    r.eb = j.at("estimates").at("eb").get<double>();
    r.tau2_hat = j.at("tau2_hat").get<double>();
    r.tau2_clipped = j.at("tau2_clipped").get<bool>();
  }
  if (r.has_bayes) {
    r.bayes = j.at("estimates").at("bayes").get<double>();
    r.alpha = j.at("credible_interval").at("alpha").get<double>();
    r.ci_lo = j.at("credible_interval").at("lo").get<double>();
    r.ci_hi = j.at("credible_interval").at("hi").get<double>();
  }
  return r;
}

namespace {

json config_to_json(const SimConfig& cfg) {
  json j;
  j["task"] = to_string(cfg.task);
  j["n"] = cfg.n;
  j["p"] = cfg.p;
  j["n1"] = cfg.n1;
  j["n2"] = cfg.n2();
  j["K"] = cfg.K;
  j["lambda"] = cfg.lambda;
  j["noise_sd"] = cfg.noise_sd;
  j["reps"] = cfg.reps;
  j["alpha"] = cfg.alpha;
  j["prior"] = {{"a0", cfg.prior.a0}, {"b0", cfg.prior.b0}, {"kappa0", cfg.prior.kappa0}};
  j["gibbs"] = {{"iterations", cfg.gibbs.iterations}, {"burn_in", cfg.gibbs.burn_in}};
  j["seed"] = cfg.seed.seed;
  j["stream"] = cfg.seed.stream_id;
  j["mc_truth_draws"] = cfg.mc_truth_draws;
  return j;
}

}  // namespace

json summary_to_json(const StudySummary& summary) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config_to_json(summary.config);
  j["n_reps_ok"] = summary.rep_results.size();
  j["n_failures"] = summary.failures.size();
  j["failures"] = summary.failures;
  j["mae"] = {{"naive", summary.mae_naive},
              {"cv", summary.mae_cv},
              {"eb", summary.mae_eb},
              {"bayes", summary.mae_bayes}};
  j["rel_mae"] = {{"naive", summary.rel_mae_naive},
                  {"cv", summary.rel_mae_cv},
                  {"eb", summary.rel_mae_eb},
                  {"bayes", summary.rel_mae_bayes}};
  j["coverage"] = summary.coverage;
  j["true_err_mean"] = summary.true_err_mean;
  j["has_eb_bayes"] = summary.has_eb_bayes;
  if (summary.has_baseline) j["baseline_mspe"] = summary.baseline_mspe;
  return j;
}

std::string reps_table_tsv(const StudySummary& summary) {
  std::ostringstream out;
  out << "# schema_version=" << kSchemaVersion << "\n";
  out << "rep\ttrue_err0\tnaive\tcv\teb\tbayes\tci_lo\tci_hi\tcovers\ttau2_hat\ttau2_clipped"
         "\tnonconverged_fits\n";
  for (const auto& r : summary.rep_results) {
    out << r.rep << '\t' << format_double(r.true_err0) << '\t' << format_double(r.report.naive) << '\t'
        << format_double(r.report.cv) << '\t' << format_double(r.report.eb) << '\t'
        << format_double(r.report.bayes) << '\t' << format_double(r.report.ci_lo) << '\t'
        << format_double(r.report.ci_hi) << '\t' << (r.interval_covers ? 1 : 0) << '\t'
        << format_double(r.report.tau2_hat) << '\t' << (r.report.tau2_clipped ? 1 : 0) << '\t'
        << r.report.nonconverged_fits << '\n';
  }
  return out.str();
}

std::string chain_tsv(const PosteriorChain& chain) {
  std::ostringstream out;
  out << "# schema_version=" << kSchemaVersion << "\n";
  out << "iter\terr0\tmu0\ttau2\n";
  for (Eigen::Index m = 0; m < chain.err_draws.rows(); ++m) {
    out << m << '\t' << format_double(chain.err_draws(m, 0)) << '\t' << format_double(chain.mu_draws[m])
        << '\t' << format_double(chain.tau2_draws[m]) << '\n';
  }
  return out.str();
}

GridRow grid_row_from_summary_json(const json& j) {
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kSchemaVersion)
    throw Error(ErrorCode::SchemaMismatch, "unsupported summary schema");
  GridRow row;
  row.n1 = j.at("config").at("n1").get<int>();
  row.n2 = j.at("config").at("n2").get<int>();
  row.true_err_mean = j.at("true_err_mean").get<double>();
  row.mae_naive = j.at("mae").at("naive").get<double>();
  row.mae_cv = j.at("mae").at("cv").get<double>();
  row.mae_eb = j.at("mae").at("eb").get<double>();
  row.mae_bayes = j.at("mae").at("bayes").get<double>();
  row.coverage = j.at("coverage").get<double>();
  if (j.contains("baseline_mspe")) {
    row.baseline_mspe = j.at("baseline_mspe").get<double>();
    row.has_baseline = true;
  }
  return row;
}

std::string grid_table_tsv(std::vector<GridRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) { return a.n2 < b.n2; });
  const bool baseline = std::any_of(rows.begin(), rows.end(), [](const GridRow& r) { return r.has_baseline; });
  std::ostringstream out;
  out << "# schema_version=" << kSchemaVersion << "\n";
  out << "n1\tn2\ttrue_err_mean\tmae_naive\tmae_cv\tmae_eb\tmae_bayes\tcoverage";
  if (baseline) out << "\tbaseline_mspe";
  out << '\n';
  for (const auto& r : rows) {
    out << r.n1 << '\t' << r.n2 << '\t' << format_double(r.true_err_mean) << '\t'
        << format_double(r.mae_naive) << '\t' << format_double(r.mae_cv) << '\t'
        << format_double(r.mae_eb) << '\t' << format_double(r.mae_bayes) << '\t'
        << format_double(r.coverage);
    if (baseline) out << '\t' << format_double(r.baseline_mspe);
    out << '\n';
  }
  return out.str();
}

std::string grid_table_pretty(const std::vector<GridRow>& rows) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "%6s %6s %14s %12s %12s %12s %12s %10s\n", "n1", "n2", "true_err",
                "mae_naive", "mae_cv", "mae_eb", "mae_bayes", "coverage");
  out += line;
  std::vector<GridRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const GridRow& a, const GridRow& b) { return a.n2 < b.n2; });
  for (const auto& r : sorted) {
    std::snprintf(line, sizeof line, "%6d %6d %14.6g %12.6g %12.6g %12.6g %12.6g %10.3f\n", r.n1, r.n2,
                  r.true_err_mean, r.mae_naive, r.mae_cv, r.mae_eb, r.mae_bayes, r.coverage);
    out += line;
  }
  return out;
}

}  // namespace cvshrink

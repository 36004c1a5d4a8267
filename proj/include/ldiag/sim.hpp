#pragma once

// Two-year simulation harness: fixed covariates, claim indicators drawn from
// a known logistic model with year-2 responses coupled to year 1 with
// probability q, then both tests and two comparator baselines per run.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ldiag/diag_tests.hpp"
#include "ldiag/panel.hpp"
#include "ldiag/rng.hpp"

namespace ldiag {

/// Covariate rows shared by both simulated years.
struct CovariateTable {
  CovariateSchema schema;
  std::vector<std::vector<double>> rows;
};

/// Column names of the synthetic surrogate design.
[[nodiscard]] CovariateSchema surrogate_schema();
/// Synthetic stand-in for the municipal property-insurance design: five
/// entity-type dummies (reference: misc), a replacement-cost flag, log
/// coverage and log deductible. Deterministic in (n, seed).
[[nodiscard]] CovariateTable surrogate_covariates(std::size_t n, std::uint64_t seed);
/// Year 2009-style coefficients used by the shipped scenarios.
[[nodiscard]] std::vector<double> surrogate_gamma();

/// Rows of one calendar year of a dataset.
[[nodiscard]] CovariateTable covariates_from_year(const PanelDataset& ds, int calendar_year);

/// Repeats the table `factor` times (rows in blocks).
[[nodiscard]] CovariateTable replicate_rows(const CovariateTable& table, std::size_t factor);

/// Balanced two-year panel: Z_1 ~ Bernoulli(p(x)); with probability q,
/// Z_2 = Z_1, otherwise Z_2 is a fresh draw from the same marginal.
[[nodiscard]] PanelDataset simulate_panel(const CovariateTable& covariates, const std::vector<double>& gamma_true,
                                          double q, rng::Stream& stream);

struct SimConfig {
  std::string covariate_source = "synthetic";  // "synthetic" or a panel CSV path
  std::optional<std::string> schema_path;
  int covariate_year = 0;                       // file source: calendar year to copy (0: last year)
  std::uint64_t covariate_seed = 1;             // synthetic source
  std::vector<double> gamma_true;
  double q = 0.0;
  std::size_t n_per_year = 1117;                // file source: 0 takes every row of the year
  std::size_t duplicate_factor = 1;
  std::size_t B = 1000;
  std::size_t R = 1000;
  std::uint64_t seed = 1;
  bool naive_lr = true;

  void validate() const;
};

/// `key = value` lines; `#` starts a comment.
[[nodiscard]] SimConfig parse_sim_config(const std::string& text);

struct SimResult {
  std::size_t first_run = 0;
  std::size_t R = 0;
  std::vector<std::uint8_t> failed;  // per run
  std::vector<std::string> failure_reasons;
  std::vector<double> p_serial;
  std::vector<double> p_corr;
  std::vector<double> p_naive;       // NaN when disabled
  std::vector<double> se_boot;       // bootstrap SE of rho_12
  std::vector<double> se_ttest;      // textbook SE of the residual Pearson correlation
  std::vector<double> rho_hat;
  std::vector<std::vector<double>> contrast;     // gamma_2 - gamma_1 per run
  std::vector<std::vector<double>> contrast_se;  // bootstrap SD of each contrast entry per run

  [[nodiscard]] std::size_t num_failed() const noexcept;
  /// Values of `v` over non-failed runs.
  [[nodiscard]] std::vector<double> usable(const std::vector<double>& v) const;
  /// Monte Carlo SD of rho_hat over non-failed runs.
  [[nodiscard]] double mc_sd_rho() const;
};

struct SimRunOptions {
  unsigned workers = 1;
  /// Restrict to runs [first_run, first_run + count); the default is all R.
  std::size_t first_run = 0;
  std::optional<std::size_t> count;
};

struct SimDesign {
  CovariateTable covariates;  // already duplicated
  std::vector<double> gamma_true;
};

/// Covariates and true coefficients of a config. For a file source without
/// gamma_true, the copied year's own fit is used.
[[nodiscard]] SimDesign resolve_design(const SimConfig& cfg);

[[nodiscard]] SimResult run_simulation(const SimConfig& cfg, const SimRunOptions& opts = {});

/// Naive pooled-versus-free likelihood-ratio test on a two-year panel.
[[nodiscard]] TestReport naive_lr_test(const PanelDataset& ds);
[[nodiscard]] TestReport naive_lr_test(const PanelDataset& ds, const std::vector<LogitFit>& fits);

struct CorrelationSe {
  double rho_pearson = 0.0;
  double se_ttest = 0.0;
  double se_bootstrap = 0.0;
};

/// sqrt((1 - rho^2) / (n - 2)).
[[nodiscard]] double ttest_se(double rho, std::size_t n);

/// Textbook t-test SE of the Pearson correlation of the two residual series
/// next to the bootstrap SE sqrt(sum_b (rho_b - rho)^2 / B_used).
[[nodiscard]] CorrelationSe ttest_se_residual_corr(const PanelDataset& ds, const std::vector<LogitFit>& fits,
                                                   const ReplicateDraws* draws = nullptr);

/// Fraction of p-values strictly below each level.
[[nodiscard]] std::vector<double> rejection_rates(const std::vector<double>& pvalues,
                                                  const std::vector<double>& levels);

/// Kolmogorov-Smirnov distance to Uniform[0,1] and its asymptotic p-value.
struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
};
[[nodiscard]] KsResult ks_uniform(std::vector<double> values);

void write_runs_csv(std::ostream& out, const SimResult& result);
void write_hist_csv(std::ostream& out, const SimResult& result, std::size_t bins = 20);
[[nodiscard]] std::string sim_summary_json(const SimConfig& cfg, const SimResult& result,
                                           const std::vector<double>& levels);
/// Human-readable rejection-rate table.
[[nodiscard]] std::string rejection_table(const SimResult& result, const std::vector<double>& levels);

}  // namespace ldiag

#include "ldiag/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ldiag/error.hpp"
#include "ldiag/format.hpp"
#include "ldiag/numkit.hpp"
#include "ldiag/parallel.hpp"

namespace ldiag {

namespace {
constexpr std::uint64_t kDataTag = 0x64617461ULL;
constexpr std::uint64_t kBootTag = 0x626f6f74ULL;
constexpr std::uint64_t kCovariateTag = 0x636f7661ULL;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

// ---------------------------------------------------------------------------
// Covariate sources

CovariateSchema surrogate_schema() {
  CovariateSchema s;
  s.names = {"TypeCity", "TypeCounty", "TypeSchool", "TypeTown", "TypeVillage",
             "IsRC",     "log(1+CoverageBC)", "lnDeductBC"};
  s.types = {CovariateType::Binary, CovariateType::Binary, CovariateType::Binary, CovariateType::Binary,
             CovariateType::Binary, CovariateType::Binary, CovariateType::Continuous, CovariateType::Continuous};
  return s;
}

std::vector<double> surrogate_gamma() {
  return {-0.3607, 0.4529, 1.5322, -0.4703, -0.2017, 0.5539, 0.2112, 0.8766, -0.4638};
}

CovariateTable surrogate_covariates(std::size_t n, std::uint64_t seed) {
  // Entity mix, and per-type mean of log coverage (millions).
  static constexpr double kTypeProb[] = {0.14, 0.06, 0.28, 0.17, 0.18, 0.17};  // city .. village, misc
  static constexpr double kCoverMean[] = {3.3, 4.3, 3.0, 1.4, 1.6, 1.5};
  static constexpr double kDeductLevels[] = {500, 1000, 2500, 5000, 10000, 25000, 50000};
  constexpr std::size_t kLevels = std::size(kDeductLevels);

  CovariateTable table;
  table.schema = surrogate_schema();
  table.rows.reserve(n);
  rng::Stream stream(rng::derive_key({seed, kCovariateTag}), 0);
  auto normal = [&] {
    // Box-Muller; one variate per call keeps the stream layout simple.
    const double u1 = 1.0 - stream.uniform();
    const double u2 = stream.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double u = stream.uniform();
    std::size_t type = 5;
    double acc = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      acc += kTypeProb[k];
      if (u < acc) {
        type = k;
        break;
      }
    }
    std::vector<double> x(8, 0.0);
    if (type < 5) x[type] = 1.0;
    x[5] = stream.bernoulli(0.78) ? 1.0 : 0.0;
    const double cover = std::max(0.0, kCoverMean[type] + 1.1 * normal());
    x[6] = cover;
    // Larger entities carry larger deductibles.
    const double latent = 1.3 + 0.55 * (cover - 2.5) + 1.5 * normal();
    const auto level = static_cast<std::size_t>(std::clamp(std::floor(latent), 0.0, double(kLevels - 1)));
    x[7] = std::log(kDeductLevels[level]);
    table.rows.push_back(std::move(x));
  }
  return table;
}

CovariateTable covariates_from_year(const PanelDataset& ds, int calendar_year) {
  for (std::size_t t = 1; t <= ds.num_years(); ++t) {
    const YearSlice& y = ds.year(t);
    if (y.calendar_year != calendar_year) continue;
    CovariateTable table;
    table.schema = ds.schema();
    const std::size_t p = ds.num_covariates();
    for (std::size_t i = 0; i < y.size(); ++i) {
      std::vector<double> x(p);
      for (std::size_t j = 0; j < p; ++j) x[j] = y.cols[j * y.size() + i];
      table.rows.push_back(std::move(x));
    }
    return table;
  }
  fail(ErrorCode::ConfigError, "covariate year " + std::to_string(calendar_year) + " is not in the data");
}

CovariateTable replicate_rows(const CovariateTable& table, std::size_t factor) {
  if (factor < 1) fail(ErrorCode::ConfigError, "duplicate_factor must be >= 1");
  CovariateTable out;
  out.schema = table.schema;
  out.rows.reserve(table.rows.size() * factor);
  for (std::size_t k = 0; k < factor; ++k) out.rows.insert(out.rows.end(), table.rows.begin(), table.rows.end());
  return out;
}

PanelDataset simulate_panel(const CovariateTable& covariates, const std::vector<double>& gamma_true, double q,
                            rng::Stream& stream) {
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorCode::ConfigError, "coupling probability q must lie in [0, 1]");
  if (gamma_true.size() != covariates.schema.size() + 1)
    fail(ErrorCode::ConfigError, "gamma_true needs " + std::to_string(covariates.schema.size() + 1) + " entries");
  const std::size_t n = covariates.rows.size();
  std::vector<PanelRecord> records(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = predict_prob(gamma_true, covariates.rows[i]);
    const int z1 = stream.bernoulli(p) ? 1 : 0;
    int z2;
    if (stream.bernoulli(q)) {
      z2 = z1;
    } else {
      z2 = stream.bernoulli(p) ? 1 : 0;
    }
    const std::string id = std::to_string(i + 1);
    records[i] = PanelRecord{id, 1, 0, z1, covariates.rows[i]};
    records[n + i] = PanelRecord{id, 2, 0, z2, covariates.rows[i]};
  }
  return PanelDataset::from_records(covariates.schema, records);
}

// ---------------------------------------------------------------------------
// Config

void SimConfig::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorCode::ConfigError, "q must lie in [0, 1]");
  if (R < 1) fail(ErrorCode::ConfigError, "R must be >= 1");
  if (B < 2) fail(ErrorCode::ConfigError, "B must be >= 2");
  if (duplicate_factor < 1) fail(ErrorCode::ConfigError, "duplicate_factor must be >= 1");
  if (covariate_source == "synthetic") {
    if (gamma_true.empty()) fail(ErrorCode::ConfigError, "synthetic covariates require an explicit gamma_true");
    if (n_per_year < 3) fail(ErrorCode::ConfigError, "n_per_year must be >= 3");
  }
}

namespace {

std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    fail(ErrorCode::ConfigError, "config: cannot parse '" + value + "' for key '" + key + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  fail(ErrorCode::ConfigError, "config: '" + key + "' expects true/false");
}

}  // namespace

SimConfig parse_sim_config(const std::string& text) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim_copy(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ConfigError, "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim_copy(std::string_view(line).substr(0, eq));
    const std::string value = trim_copy(std::string_view(line).substr(eq + 1));
    if (key == "covariates") {
      cfg.covariate_source = value;
    } else if (key == "schema") {
      cfg.schema_path = value;
    } else if (key == "covariate_year") {
      cfg.covariate_year = parse_number<int>(key, value);
    } else if (key == "covariate_seed") {
      cfg.covariate_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "gamma_true") {
      cfg.gamma_true.clear();
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        std::string item = trim_copy(rest.substr(0, comma));
        if (!item.empty() && item.front() == '+') item.erase(0, 1);
        cfg.gamma_true.push_back(parse_number<double>(key, item));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
    } else if (key == "q") {
      cfg.q = parse_number<double>(key, value);
    } else if (key == "n_per_year") {
      cfg.n_per_year = parse_number<std::size_t>(key, value);
    } else if (key == "duplicate_factor") {
      cfg.duplicate_factor = parse_number<std::size_t>(key, value);
    } else if (key == "B") {
      cfg.B = parse_number<std::size_t>(key, value);
    } else if (key == "R") {
      cfg.R = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "naive_lr") {
      cfg.naive_lr = parse_bool(key, value);
    } else {
      fail(ErrorCode::ConfigError, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SimDesign resolve_design(const SimConfig& cfg) {
  cfg.validate();
  SimDesign design;
  if (cfg.covariate_source == "synthetic") {
    design.covariates = surrogate_covariates(cfg.n_per_year, cfg.covariate_seed);
    design.gamma_true = cfg.gamma_true;
  } else {
    std::ifstream in(cfg.covariate_source);
    if (!in) fail(ErrorCode::ConfigError, "cannot open covariate file '" + cfg.covariate_source + "'");
    PanelDataset ds = [&] {
      if (!cfg.schema_path) return load_panel(in);
      std::ifstream sf(*cfg.schema_path);
      if (!sf) fail(ErrorCode::ConfigError, "cannot open schema file '" + *cfg.schema_path + "'");
      std::stringstream buf;
      buf << sf.rdbuf();
      return load_panel(in, parse_schema_json(buf.str()));
    }();
    const int year = cfg.covariate_year != 0 ? cfg.covariate_year : ds.calendar_year(ds.num_years());
    design.covariates = covariates_from_year(ds, year);
    if (cfg.n_per_year != 0 && cfg.n_per_year != design.covariates.rows.size())
      fail(ErrorCode::ConfigError, "n_per_year = " + std::to_string(cfg.n_per_year) + " but year " +
                                       std::to_string(year) + " has " +
                                       std::to_string(design.covariates.rows.size()) + " rows");
    if (!cfg.gamma_true.empty()) {
      design.gamma_true = cfg.gamma_true;
    } else {
      std::size_t t = 1;
      while (ds.calendar_year(t) != year) ++t;
      design.gamma_true = fit_weighted_logit(ds, t).gamma;
    }
  }
  if (design.gamma_true.size() != design.covariates.schema.size() + 1)
    fail(ErrorCode::ConfigError, "gamma_true has " + std::to_string(design.gamma_true.size()) +
                                     " entries, the design needs " +
                                     std::to_string(design.covariates.schema.size() + 1));
  design.covariates = replicate_rows(design.covariates, cfg.duplicate_factor);
  return design;
}

// ---------------------------------------------------------------------------
// Comparators

TestReport naive_lr_test(const PanelDataset& ds, const std::vector<LogitFit>& fits) {
  if (ds.num_years() != 2 || fits.size() != 2)
    fail(ErrorCode::InvalidArgument, "naive likelihood-ratio test needs exactly two years");
  const OwnedDesign pooled = stack_years(ds, 1, 2);
  const LogitFit joint = fit_logit(pooled.view());
  const double stat = std::max(0.0, -2.0 * (joint.loglik - (fits[0].loglik + fits[1].loglik)));
  TestReport r;
  r.kind = TestKind::NaiveLr;
  r.statistic = stat;
  r.df = static_cast<int>(ds.num_covariates() + 1);
  r.p_value = numkit::chisq_sf(stat, r.df);
  r.pair = {1, 2};
  return r;
}

TestReport naive_lr_test(const PanelDataset& ds) { return naive_lr_test(ds, fit_all_years(ds)); }

double ttest_se(double rho, std::size_t n) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "t-test SE needs n >= 3");
  return std::sqrt((1.0 - rho * rho) / static_cast<double>(n - 2));
}

CorrelationSe ttest_se_residual_corr(const PanelDataset& ds, const std::vector<LogitFit>& fits,
                                     const ReplicateDraws* draws) {
  if (ds.num_years() != 2) fail(ErrorCode::InvalidArgument, "t-test SE needs exactly two years");
  const PairCohort& c = ds.pair_cohort(1, 2);
  const std::size_t m = c.size();
  if (m < 3) fail(ErrorCode::DegenerateResiduals, "t-test SE needs at least three common subjects");
  const auto r1 = standardized_residuals(ds, 1, fits.at(0).gamma);
  const auto r2 = standardized_residuals(ds, 2, fits.at(1).gamma);
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    ma += r1[c.rows_s[k]];
    mb += r2[c.rows_t[k]];
  }
  ma /= static_cast<double>(m);
  mb /= static_cast<double>(m);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double a = r1[c.rows_s[k]] - ma;
    const double b = r2[c.rows_t[k]] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) fail(ErrorCode::DegenerateResiduals, "a residual series is constant");

  CorrelationSe out;
  out.rho_pearson = sab / std::sqrt(saa * sbb);
  out.se_ttest = ttest_se(out.rho_pearson, m);
  out.se_bootstrap = kNaN;
  if (draws) {
    const double rho = residual_cross_moment(c, r1, r2, nullptr);
    double ss = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < draws->B; ++b) {
      if (draws->failed[b]) continue;
      const double d = draws->rho(b, 0) - rho;
      ss += d * d;
      ++used;
    }
    out.se_bootstrap = std::sqrt(ss / static_cast<double>(used));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Harness

std::size_t SimResult::num_failed() const noexcept {
  return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), std::uint8_t{1}));
}

std::vector<double> SimResult::usable(const std::vector<double>& v) const {
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!failed[i]) out.push_back(v[i]);
  return out;
}

double SimResult::mc_sd_rho() const {
  const auto v = usable(rho_hat);
  if (v.size() < 2) return kNaN;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

SimResult run_simulation(const SimConfig& cfg, const SimRunOptions& opts) {
  const SimDesign design = resolve_design(cfg);
  if (opts.first_run >= cfg.R) fail(ErrorCode::ConfigError, "first_run is beyond R");
  const std::size_t count = std::min(opts.count.value_or(cfg.R), cfg.R - opts.first_run);

  SimResult res;
  res.first_run = opts.first_run;
  res.R = count;
  res.failed.assign(count, 0);
  res.failure_reasons.assign(count, {});
  for (auto* v : {&res.p_serial, &res.p_corr, &res.p_naive, &res.se_boot, &res.se_ttest, &res.rho_hat})
    v->assign(count, kNaN);
  res.contrast.assign(count, {});
  res.contrast_se.assign(count, {});

  parallel_for(count, opts.workers, [&](std::size_t i) {
    const std::uint64_t r = opts.first_run + i;
    rng::Stream data(rng::derive_key({cfg.seed, r, kDataTag}), 0);
    const PanelDataset ds = simulate_panel(design.covariates, design.gamma_true, cfg.q, data);
    try {
      const auto fits = fit_all_years(ds);
      BootstrapPlan plan;
      plan.B = cfg.B;
      plan.seed = rng::derive_key({cfg.seed, r, kBootTag});
      const ReplicateDraws draws = run_replicates(ds, fits, plan);

      res.p_serial[i] = serial_dynamic_aggregate(fits, draws).p_value;
      ResidualCorrelations rc;
      rc.rho = {residual_correlation(ds, fits, 1, 2)};
      res.p_corr[i] = correlation_aggregate(rc, draws).p_value;
      res.rho_hat[i] = rc.rho[0];
      if (cfg.naive_lr) res.p_naive[i] = naive_lr_test(ds, fits).p_value;
      const CorrelationSe se = ttest_se_residual_corr(ds, fits, &draws);
      res.se_boot[i] = se.se_bootstrap;
      res.se_ttest[i] = se.se_ttest;

      res.contrast[i] = contrast_vector(fits);
      std::vector<std::vector<double>> reps;
      for (std::size_t b = 0; b < draws.B; ++b) {
        if (draws.failed[b]) continue;
        std::vector<double> c(draws.dim);
        for (std::size_t k = 0; k < draws.dim; ++k) c[k] = draws.gamma(b, 2)[k] - draws.gamma(b, 1)[k];
        reps.push_back(std::move(c));
      }
      const auto s = scatter_about(reps, res.contrast[i]);
      res.contrast_se[i].resize(draws.dim);
      for (std::size_t k = 0; k < draws.dim; ++k)
        res.contrast_se[i][k] = std::sqrt(s(k, k) / static_cast<double>(reps.size()));
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::Numerical) throw;
      res.failed[i] = 1;
      res.failure_reasons[i] = e.what();
    }
  });
  return res;
}

std::vector<double> rejection_rates(const std::vector<double>& pvalues, const std::vector<double>& levels) {
  if (pvalues.empty()) fail(ErrorCode::InvalidArgument, "rejection rates need at least one p-value");
  std::vector<double> out;
  for (double a : levels) {
    const auto k = std::count_if(pvalues.begin(), pvalues.end(), [a](double p) { return p < a; });
    out.push_back(static_cast<double>(k) / static_cast<double>(pvalues.size()));
  }
  return out;
}

KsResult ks_uniform(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "KS statistic needs at least one value");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  KsResult ks;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = std::clamp(values[i], 0.0, 1.0);
    ks.d = std::max({ks.d, (static_cast<double>(i) + 1.0) / n - x, x - static_cast<double>(i) / n});
  }
  // Asymptotic Kolmogorov tail with the usual finite-n correction.
  const double sq = std::sqrt(n);
  const double lambda = (sq + 0.12 + 0.11 / sq) * ks.d;
  if (lambda < 0.2) {
    ks.p_value = 1.0;
  } else {
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      sum += (k % 2 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
    ks.p_value = std::clamp(sum, 0.0, 1.0);
  }
  return ks;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string cell(double v) { return std::isnan(v) ? std::string() : format_g(v); }

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void write_runs_csv(std::ostream& out, const SimResult& res) {
  out << "r,p_serial,p_corr,p_naive,se_boot,se_ttest,rho_hat,failed\n";
  for (std::size_t i = 0; i < res.R; ++i) {
    out << res.first_run + i + 1 << ',' << cell(res.p_serial[i]) << ',' << cell(res.p_corr[i]) << ','
        << cell(res.p_naive[i]) << ',' << cell(res.se_boot[i]) << ',' << cell(res.se_ttest[i]) << ','
        << cell(res.rho_hat[i]) << ',' << int(res.failed[i]) << '\n';
  }
}

void write_hist_csv(std::ostream& out, const SimResult& res, std::size_t bins) {
  auto counts = [&](const std::vector<double>& v) {
    std::vector<std::size_t> c(bins, 0);
    for (double p : res.usable(v)) {
      if (std::isnan(p)) continue;
      const auto k = std::min(bins - 1, static_cast<std::size_t>(p * static_cast<double>(bins)));
      ++c[k];
    }
    return c;
  };
  const auto cs = counts(res.p_serial);
  const auto cc = counts(res.p_corr);
  const auto cn = counts(res.p_naive);
  out << "bin_lo,bin_hi,serial,corr,naive\n";
  for (std::size_t k = 0; k < bins; ++k)
    out << format_g(double(k) / double(bins), 6) << ',' << format_g(double(k + 1) / double(bins), 6) << ','
        << cs[k] << ',' << cc[k] << ',' << cn[k] << '\n';
}

std::string sim_summary_json(const SimConfig& cfg, const SimResult& res, const std::vector<double>& levels) {
  nlohmann::ordered_json j;
  j["config"] = {{"covariates", cfg.covariate_source}, {"q", cfg.q},       {"n_per_year", cfg.n_per_year},
                 {"duplicate_factor", cfg.duplicate_factor}, {"B", cfg.B}, {"R", cfg.R},
                 {"seed", cfg.seed},                          {"gamma_true", cfg.gamma_true}};
  j["runs"] = res.R;
  j["failed_runs"] = res.num_failed();
  j["levels"] = levels;

  nlohmann::ordered_json rej, ks;
  auto add = [&](const char* name, const std::vector<double>& v) {
    std::vector<double> u;
    for (double p : res.usable(v))
      if (!std::isnan(p)) u.push_back(p);
    if (u.empty()) return;
    rej[name] = rejection_rates(u, levels);
    const KsResult k = ks_uniform(u);
    ks[name] = {{"d", k.d}, {"p_value", k.p_value}};
  };
  add("serial", res.p_serial);
  add("corr", res.p_corr);
  add("naive_lr", res.p_naive);
  j["rejection_rates"] = rej;
  j["ks_uniform"] = ks;

  const auto se_t = res.usable(res.se_ttest);
  j["rho"] = {{"mc_sd", number_or_null(res.mc_sd_rho())},
              {"mean_se_bootstrap", number_or_null(mean_of(res.usable(res.se_boot)))},
              {"mean_se_ttest", number_or_null(mean_of(se_t))},
              {"min_se_ttest", number_or_null(se_t.empty() ? kNaN : *std::min_element(se_t.begin(), se_t.end()))},
              {"max_se_ttest", number_or_null(se_t.empty() ? kNaN : *std::max_element(se_t.begin(), se_t.end()))}};
  return j.dump(2) + "\n";
}

std::string rejection_table(const SimResult& res, const std::vector<double>& levels) {
  std::ostringstream out;
  out << "level     serial    corr      naive_lr\n";
  auto rates = [&](const std::vector<double>& v) {
    std::vector<double> u;
    for (double p : res.usable(v))
      if (!std::isnan(p)) u.push_back(p);
    return u.empty() ? std::vector<double>(levels.size(), kNaN) : rejection_rates(u, levels);
  };
  const auto rs = rates(res.p_serial), rc = rates(res.p_corr), rn = rates(res.p_naive);
  auto pct = [](double v) {
    char buf[32];
    if (std::isnan(v)) return std::string("   -      ");
    std::snprintf(buf, sizeof buf, "%5.1f%%    ", 100.0 * v);
    return std::string(buf);
  };
  for (std::size_t k = 0; k < levels.size(); ++k) {
    char lv[32];
    std::snprintf(lv, sizeof lv, "%-10s", (format_g(100.0 * levels[k], 4) + "%").c_str());
    out << lv << pct(rs[k]) << pct(rc[k]) << pct(rn[k]) << '\n';
  }
  out << "runs: " << res.R << " (failed " << res.num_failed() << ")\n";
  return out.str();
}

}  // namespace ldiag

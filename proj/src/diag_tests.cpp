#include "ldiag/diag_tests.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ldiag/error.hpp"
#include "ldiag/format.hpp"
#include "ldiag/numkit.hpp"

namespace ldiag {

std::string_view test_kind_name(TestKind kind) noexcept {
  switch (kind) {
    case TestKind::SerialAggregate: return "serial_aggregate";
    case TestKind::SerialPairwise: return "serial_pairwise";
    case TestKind::CorrAggregate: return "corr_aggregate";
    case TestKind::CorrPairwise: return "corr_pairwise";
    case TestKind::NaiveLr: return "naive_lr";
  }
  return "unknown";
}

namespace {

void check_year(std::size_t t, std::size_t T) {
  if (t < 1 || t > T) fail(ErrorCode::InvalidArgument, "year index " + std::to_string(t) + " out of range");
}

// B_used * v^T S^{-1} v with S the scatter of the draws about v.
double hotelling(std::span<const double> v, const std::vector<std::vector<double>>& draws, const char* what) {
  bool all_zero = true;
  for (double x : v) all_zero = all_zero && x == 0.0;
  if (all_zero) return 0.0;
  const numkit::SpdMatrix s = scatter_about(draws, v);
  try {
    const numkit::Cholesky chol(s);
    const auto y = chol.solve(v);
    double q = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) q += v[i] * y[i];
    return static_cast<double>(draws.size()) * std::max(q, 0.0);
  } catch (const NotPositiveDefiniteError& e) {
    const double cond = e.pivot() > 0.0 ? e.max_pivot() / e.pivot() : INFINITY;
    fail(ErrorCode::SingularCovariance, std::string(what) + ": bootstrap scatter is singular (pivot " +
                                            std::to_string(e.pivot_index()) + ", condition estimate " +
                                            format_g(cond, 4) + ")");
  }
}

TestReport make_report(TestKind kind, double stat, int df, std::size_t b_used) {
  TestReport r;
  r.kind = kind;
  r.statistic = stat;
  r.df = df;
  r.p_value = numkit::chisq_sf(stat, df);
  r.B_used = b_used;
  return r;
}

std::vector<double> block_difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

}  // namespace

std::vector<double> contrast_vector(const std::vector<LogitFit>& fits) {
  if (fits.size() < 2) fail(ErrorCode::InvalidArgument, "contrast needs at least two years");
  std::vector<double> out;
  const auto& base = fits.front().gamma;
  for (std::size_t t = 1; t < fits.size(); ++t)
    for (std::size_t k = 0; k < base.size(); ++k) out.push_back(fits[t].gamma[k] - base[k]);
  return out;
}

double residual_correlation(const PanelDataset& ds, const std::vector<LogitFit>& fits, std::size_t s,
                            std::size_t t) {
  check_year(s, ds.num_years());
  check_year(t, ds.num_years());
  if (s == t) fail(ErrorCode::InvalidArgument, "residual correlation needs two distinct years");
  if (s > t) std::swap(s, t);
  const PairCohort& c = ds.pair_cohort(s, t);
  if (c.size() < 2)
    fail(ErrorCode::EmptyIntersection, "years " + std::to_string(ds.calendar_year(s)) + " and " +
                                           std::to_string(ds.calendar_year(t)) + " share fewer than two subjects");
  const auto rs = standardized_residuals(ds, s, fits.at(s - 1).gamma);
  const auto rt = standardized_residuals(ds, t, fits.at(t - 1).gamma);
  return residual_cross_moment(c, rs, rt, nullptr);
}

double raw_sample_correlation(const PanelDataset& ds, std::size_t s, std::size_t t) {
  check_year(s, ds.num_years());
  check_year(t, ds.num_years());
  if (s == t) fail(ErrorCode::InvalidArgument, "sample correlation needs two distinct years");
  if (s > t) std::swap(s, t);
  const PairCohort& c = ds.pair_cohort(s, t);
  const std::size_t m = c.size();
  if (m < 2) fail(ErrorCode::EmptyIntersection, "fewer than two common subjects");
  const auto& zs = ds.year(s).z;
  const auto& zt = ds.year(t).z;
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    ma += zs[c.rows_s[k]];
    mb += zt[c.rows_t[k]];
  }
  ma /= static_cast<double>(m);
  mb /= static_cast<double>(m);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double a = zs[c.rows_s[k]] - ma;
    const double b = zt[c.rows_t[k]] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  if (saa == 0.0 || sbb == 0.0)
    fail(ErrorCode::DegenerateMarginal, "claim indicator is constant on the common subjects of years " +
                                            std::to_string(ds.calendar_year(s)) + " and " +
                                            std::to_string(ds.calendar_year(t)));
  return sab / std::sqrt(saa * sbb);
}

ResidualCorrelations residual_correlations(const PanelDataset& ds, const std::vector<LogitFit>& fits) {
  const std::size_t T = ds.num_years();
  std::vector<std::vector<double>> resid(T);
  for (std::size_t t = 1; t <= T; ++t) resid[t - 1] = standardized_residuals(ds, t, fits.at(t - 1).gamma);
  ResidualCorrelations out;
  for (const auto& [s, t] : pair_order(T)) {
    const PairCohort& c = ds.pair_cohort(s, t);
    if (c.size() < 2) fail(ErrorCode::EmptyIntersection, "years share fewer than two subjects");
    out.rho.push_back(residual_cross_moment(c, resid[s - 1], resid[t - 1], nullptr));
    out.raw.push_back(raw_sample_correlation(ds, s, t));
  }
  return out;
}

TestReport serial_dynamic_aggregate(const std::vector<LogitFit>& fits, const ReplicateDraws& draws) {
  if (fits.size() != draws.T) fail(ErrorCode::InvalidArgument, "fits and draws disagree on T");
  const auto v = contrast_vector(fits);
  std::vector<std::vector<double>> reps;
  reps.reserve(draws.usable());
  for (std::size_t b = 0; b < draws.B; ++b) {
    if (draws.failed[b]) continue;
    std::vector<double> c;
    c.reserve(v.size());
    const auto g1 = draws.gamma(b, 1);
    for (std::size_t t = 2; t <= draws.T; ++t) {
      const auto gt = draws.gamma(b, t);
      for (std::size_t k = 0; k < draws.dim; ++k) c.push_back(gt[k] - g1[k]);
    }
    reps.push_back(std::move(c));
  }
  const double stat = hotelling(v, reps, "serial aggregate");
  return make_report(TestKind::SerialAggregate, stat, static_cast<int>((draws.T - 1) * draws.dim), reps.size());
}

TestReport serial_dynamic_pairwise(const std::vector<LogitFit>& fits, const ReplicateDraws& draws, std::size_t s,
                                   std::size_t t) {
  check_year(s, draws.T);
  check_year(t, draws.T);
  if (s == t) fail(ErrorCode::InvalidArgument, "pairwise serial test needs two distinct years");
  if (s > t) std::swap(s, t);
  const auto v = block_difference(fits.at(s - 1).gamma, fits.at(t - 1).gamma);
  std::vector<std::vector<double>> reps;
  reps.reserve(draws.usable());
  for (std::size_t b = 0; b < draws.B; ++b)
    if (!draws.failed[b]) reps.push_back(block_difference(draws.gamma(b, s), draws.gamma(b, t)));
  const double stat = hotelling(v, reps, "serial pairwise");
  TestReport r = make_report(TestKind::SerialPairwise, stat, static_cast<int>(draws.dim), reps.size());
  r.pair = {s, t};
  return r;
}

TestReport correlation_pairwise(double rho, const ReplicateDraws& draws, std::size_t s, std::size_t t) {
  check_year(s, draws.T);
  check_year(t, draws.T);
  if (s == t) fail(ErrorCode::InvalidArgument, "pairwise correlation test needs two distinct years");
  if (s > t) std::swap(s, t);
  const std::size_t k = pair_index(s, t, draws.T);
  double ss = 0.0;
  std::size_t used = 0;
  for (std::size_t b = 0; b < draws.B; ++b) {
    if (draws.failed[b]) continue;
    const double d = draws.rho(b, k) - rho;
    ss += d * d;
    ++used;
  }
  double stat = 0.0;
  if (rho != 0.0) {
    if (!(ss > 0.0)) fail(ErrorCode::ZeroVariance, "bootstrap residual correlations have zero spread");
    stat = static_cast<double>(used) * rho * rho / ss;
  }
  TestReport r = make_report(TestKind::CorrPairwise, stat, 1, used);
  r.pair = {s, t};
  return r;
}

TestReport correlation_aggregate(const ResidualCorrelations& rhos, const ReplicateDraws& draws) {
  const std::size_t m = draws.num_pairs();
  if (rhos.rho.size() != m) fail(ErrorCode::InvalidArgument, "correlation vector length does not match T");
  std::vector<std::vector<double>> reps;
  reps.reserve(draws.usable());
  for (std::size_t b = 0; b < draws.B; ++b) {
    if (draws.failed[b]) continue;
    reps.emplace_back(draws.rhos.begin() + static_cast<std::ptrdiff_t>(b * m),
                      draws.rhos.begin() + static_cast<std::ptrdiff_t>((b + 1) * m));
  }
  const double stat = hotelling(rhos.rho, reps, "correlation aggregate");
  return make_report(TestKind::CorrAggregate, stat, static_cast<int>(m), reps.size());
}

DiagnosticReport run_diagnostics(const PanelDataset& ds, const std::vector<LogitFit>& fits,
                                 const ReplicateDraws& draws) {
  DiagnosticReport rep;
  const std::size_t T = ds.num_years();
  for (std::size_t t = 1; t <= T; ++t) rep.calendar_years.push_back(ds.calendar_year(t));
  rep.correlations = residual_correlations(ds, fits);
  rep.serial_aggregate = serial_dynamic_aggregate(fits, draws);
  rep.corr_aggregate = correlation_aggregate(rep.correlations, draws);
  const auto pairs = pair_order(T);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [s, t] = pairs[k];
    rep.serial_pairwise.push_back(serial_dynamic_pairwise(fits, draws, s, t));
    rep.corr_pairwise.push_back(correlation_pairwise(rep.correlations.rho[k], draws, s, t));
  }
  rep.B = draws.B;
  rep.failed_replicates = draws.num_failed();
  return rep;
}

}  // namespace ldiag

#include "ldiag/bootstrap.hpp"

#include <algorithm>
#include <string>

#include "ldiag/error.hpp"
#include "ldiag/format.hpp"
#include "ldiag/parallel.hpp"
#include "ldiag/rng.hpp"

namespace ldiag {

namespace {
constexpr std::uint64_t kWeightStreamTag = 0x7765696768747321ULL;
}

void BootstrapPlan::validate() const {
  if (B < 2) fail(ErrorCode::InvalidArgument, "bootstrap needs B >= 2, got " + std::to_string(B));
}

WeightVector draw_weights(std::size_t n, std::size_t b, const BootstrapPlan& plan) {
  WeightVector w(n, 1.0);
  if (plan.weight_law == WeightLaw::ConstantOne) return w;
  rng::Stream stream(rng::derive_key({plan.seed, kWeightStreamTag, b}), 0);
  for (auto& x : w) x = stream.exponential();
  return w;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_order(std::size_t T) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t s = 1; s <= T; ++s)
    for (std::size_t t = s + 1; t <= T; ++t) out.emplace_back(s, t);
  return out;
}

std::size_t pair_index(std::size_t s, std::size_t t, std::size_t T) {
  if (s > t) std::swap(s, t);
  if (s < 1 || s == t || t > T) fail(ErrorCode::InvalidArgument, "invalid year pair");
  // pairs before row s: sum_{k=1}^{s-1} (T - k)
  return (s - 1) * T - (s - 1) * s / 2 + (t - s - 1);
}

double residual_cross_moment(const PairCohort& cohort, std::span<const double> r_s, std::span<const double> r_t,
                             const WeightVector* w) {
  const std::size_t m = cohort.size();
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double term = r_s[cohort.rows_s[k]] * r_t[cohort.rows_t[k]];
    acc += w ? (*w)[cohort.subjects[k]] * term : term;
  }
  return acc / static_cast<double>(m);
}

std::size_t ReplicateDraws::num_failed() const noexcept {
  return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), std::uint8_t{1}));
}

ReplicateDraws run_replicates(const PanelDataset& ds, const std::vector<LogitFit>& base_fits,
                              const BootstrapPlan& plan, const ReplicateOptions& opts) {
  plan.validate();
  const std::size_t T = ds.num_years();
  const std::size_t dim = ds.num_covariates() + 1;
  if (base_fits.size() != T) fail(ErrorCode::InvalidArgument, "need one base fit per year");
  for (const auto& f : base_fits)
    if (!f.converged || f.gamma.size() != dim)
      fail(ErrorCode::InvalidArgument, "base fits must be converged and match the design");

  ReplicateDraws draws;
  draws.B = plan.B;
  draws.T = T;
  draws.dim = dim;
  draws.gammas.assign(plan.B * T * dim, 0.0);
  draws.rhos.assign(plan.B * draws.num_pairs(), 0.0);
  draws.failed.assign(plan.B, 0);

  const auto pairs = pair_order(T);
  std::vector<const PairCohort*> cohorts;
  for (const auto& [s, t] : pairs) cohorts.push_back(&ds.pair_cohort(s, t));

  parallel_for(plan.B, opts.workers, [&](std::size_t b) {
    const WeightVector w = draw_weights(ds.num_subjects(), b + 1, plan);
    if (opts.on_weights) opts.on_weights(b, w);
    std::vector<std::vector<double>> resid(T);
    try {
      for (std::size_t t = 1; t <= T; ++t) {
        const LogitFit f = fit_weighted_logit(ds, t, &w, base_fits[t - 1].gamma, opts.fit);
        std::copy(f.gamma.begin(), f.gamma.end(), draws.gammas.begin() + (b * T + (t - 1)) * dim);
        resid[t - 1] = standardized_residuals(ds, t, f.gamma);
      }
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::Numerical) throw;
      draws.failed[b] = 1;
      return;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [s, t] = pairs[k];
      draws.rhos[b * pairs.size() + k] = residual_cross_moment(*cohorts[k], resid[s - 1], resid[t - 1], &w);
    }
  });

  const std::size_t nfail = draws.num_failed();
  if (static_cast<double>(nfail) > opts.max_failure_rate * static_cast<double>(plan.B))
    fail(ErrorCode::TooManyFailures, std::to_string(nfail) + " of " + std::to_string(plan.B) +
                                         " bootstrap replicates failed to fit");
  if (draws.usable() < 2) fail(ErrorCode::TooManyFailures, "fewer than two usable bootstrap replicates");
  return draws;
}

numkit::SpdMatrix scatter_about(const std::vector<std::vector<double>>& draws, std::span<const double> center) {
  const std::size_t d = center.size();
  numkit::SpdMatrix s(d);
  std::vector<double> dev(d);
  for (const auto& v : draws) {
    if (v.size() != d) fail(ErrorCode::InvalidArgument, "scatter_about: vector length mismatch");
    for (std::size_t i = 0; i < d; ++i) dev[i] = v[i] - center[i];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) s.add(i, j, dev[i] * dev[j]);
  }
  return s;
}

void write_replicate_gammas_csv(std::ostream& out, const PanelDataset& ds, const ReplicateDraws& draws) {
  out << "b,year,coef,value\n";
  for (std::size_t b = 0; b < draws.B; ++b) {
    if (draws.failed[b]) continue;
    for (std::size_t t = 1; t <= draws.T; ++t) {
      const auto g = draws.gamma(b, t);
      for (std::size_t k = 0; k < draws.dim; ++k)
        out << b + 1 << ',' << ds.calendar_year(t) << ',' << k << ',' << format_g(g[k]) << '\n';
    }
  }
}

void write_replicate_rhos_csv(std::ostream& out, const PanelDataset& ds, const ReplicateDraws& draws) {
  out << "b,s,t,rho_b\n";
  const auto pairs = pair_order(draws.T);
  for (std::size_t b = 0; b < draws.B; ++b) {
    if (draws.failed[b]) continue;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      out << b + 1 << ',' << ds.calendar_year(pairs[k].first) << ',' << ds.calendar_year(pairs[k].second) << ','
          << format_g(draws.rho(b, k)) << '\n';
  }
}

}  // namespace ldiag

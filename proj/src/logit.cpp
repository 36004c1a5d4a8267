#include "ldiag/logit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ldiag/error.hpp"
#include "ldiag/numkit.hpp"
#include "ldiag/simd/kernels.hpp"

namespace ldiag {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

numkit::SpdMatrix to_spd(const std::vector<double>& gram, std::size_t d) {
  numkit::SpdMatrix m(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) m.set(i, j, gram[i * d + j]);
  return m;
}

// Scratch buffers and the objective evaluated at one gamma.
struct Evaluation {
  std::vector<double> eta, score, curv;
  double loglik = 0.0;

  explicit Evaluation(std::size_t n) : eta(n), score(n), curv(n) {}

  void at(const simd::KernelSet& k, const DesignView& d, const double* w, const double* gamma) {
    k.linear_predictor(d.cols, d.n, d.p, gamma, eta.data());
    loglik = k.logit_terms(eta.data(), d.z, w, d.n, score.data(), curv.data());
  }
};

// A correctly classified row whose fitted probability has saturated.
bool has_saturated_fit(const DesignView& d, const double* w, const std::vector<double>& eta, double eps) {
  for (std::size_t i = 0; i < d.n; ++i) {
    if (w && w[i] <= 0.0) continue;
    const double e = std::exp(-std::abs(eta[i]));
    const double tail = e / (1.0 + e);  // distance of p from the nearer of 0 and 1
    const bool correct = (eta[i] >= 0.0) == (d.z[i] == 1.0);
    if (correct && tail < eps) return true;
  }
  return false;
}

// Every row classified correctly with a residual below `tail`. The gradient
// test can pass on separated data once the fitted probabilities are close
// enough to 0/1, so a converged fit needs this check too.
bool perfectly_fitted(const DesignView& d, const double* w, const std::vector<double>& eta, double tail) {
  for (std::size_t i = 0; i < d.n; ++i) {
    if (w && w[i] <= 0.0) continue;
    const double e = std::exp(-std::abs(eta[i]));
    const bool correct = (eta[i] >= 0.0) == (d.z[i] == 1.0);
    if (!correct || e / (1.0 + e) >= tail) return false;
  }
  return true;
}

[[noreturn]] void separation(const std::string& why) {
  fail(ErrorCode::Separation, "logistic fit diverges (" + why + ")");
}

}  // namespace

DesignView design_of(const YearSlice& year, std::size_t p) noexcept {
  return {year.cols.data(), year.z.data(), year.size(), p};
}

OwnedDesign stack_years(const PanelDataset& ds, std::size_t s, std::size_t t) {
  const YearSlice& a = ds.year(s);
  const YearSlice& b = ds.year(t);
  const std::size_t p = ds.num_covariates();
  OwnedDesign out;
  out.n = a.size() + b.size();
  out.p = p;
  out.z.reserve(out.n);
  out.z.insert(out.z.end(), a.z.begin(), a.z.end());
  out.z.insert(out.z.end(), b.z.begin(), b.z.end());
  out.cols.reserve(out.n * p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto ca = a.column(j);
    const auto cb = b.column(j);
    out.cols.insert(out.cols.end(), ca.begin(), ca.end());
    out.cols.insert(out.cols.end(), cb.begin(), cb.end());
  }
  return out;
}

LogitFit fit_logit(const DesignView& d, std::span<const double> row_weights, std::span<const double> start,
                   const FitOptions& opts) {
  const std::size_t dim = d.p + 1;
  if (d.n == 0) fail(ErrorCode::InvalidArgument, "logistic fit on an empty design");
  if (!row_weights.empty() && row_weights.size() != d.n)
    fail(ErrorCode::InvalidArgument, "weight vector length does not match the design");
  if (!start.empty() && start.size() != dim)
    fail(ErrorCode::InvalidArgument, "start vector length does not match the design");
  const double* w = row_weights.empty() ? nullptr : row_weights.data();

  {
    double w_pos = 0.0, w_claims = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) {
      const double wi = w ? w[i] : 1.0;
      if (wi < 0.0 || !std::isfinite(wi)) fail(ErrorCode::InvalidArgument, "weights must be finite and >= 0");
      if (wi > 0.0) {
        w_pos += 1.0;
        w_claims += d.z[i];
      }
    }
    if (w_pos == 0.0) fail(ErrorCode::InvalidArgument, "all weights are zero");
    if (w_claims == 0.0 || w_claims == w_pos) separation("response is constant");
  }

  const simd::KernelSet& k = simd::active_kernels();
  std::vector<double> gamma(dim, 0.0);
  if (!start.empty()) std::copy(start.begin(), start.end(), gamma.begin());
  std::vector<double> cand(dim), grad(dim), gram(dim * dim);
  Evaluation cur(d.n), trial(d.n);
  cur.at(k, d, w, gamma.data());

  LogitFit fit;
  bool tiny_step = false;
  for (int iter = 0;; ++iter) {
    k.normal_equations(d.cols, d.n, d.p, cur.score.data(), cur.curv.data(), grad.data(), gram.data());
    fit.grad_norm = max_abs(grad);
    if (!std::isfinite(fit.grad_norm)) fail(ErrorCode::NoConvergence, "non-finite gradient");
    if (fit.grad_norm <= opts.grad_tol || tiny_step) {
      fit.converged = true;
      break;
    }
    if (iter == opts.max_iter) break;

    std::vector<double> delta;
    try {
      delta = numkit::Cholesky(to_spd(gram, dim), opts.pivot_tol).solve(grad);
    } catch (const NotPositiveDefiniteError&) {
      if (has_saturated_fit(d, w, cur.eta, opts.saturation_eps)) separation("fitted probabilities saturate");
      fail(ErrorCode::SingularHessian, "negative Hessian is singular at iteration " + std::to_string(iter));
    }

    // Step-halving until the objective does not decrease (up to rounding).
    const double slack = 1e-13 * std::max(1.0, std::abs(cur.loglik));
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, step *= 0.5) {
      for (std::size_t j = 0; j < dim; ++j) cand[j] = gamma[j] + step * delta[j];
      trial.at(k, d, w, cand.data());
      if (std::isfinite(trial.loglik) && trial.loglik >= cur.loglik - slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    fit.iterations = iter + 1;
    tiny_step = step * max_abs(delta) <= opts.step_tol;
    gamma.swap(cand);
    std::swap(cur, trial);
    if (max_abs(gamma) > opts.separation_bound) separation("|gamma| exceeds the divergence bound");
  }

  if (!fit.converged) {
    if (has_saturated_fit(d, w, cur.eta, opts.saturation_eps)) separation("fitted probabilities saturate");
    fail(ErrorCode::NoConvergence, "Newton iteration stopped with max |gradient| = " +
                                       std::to_string(fit.grad_norm) + " after " +
                                       std::to_string(fit.iterations) + " iterations");
  }

  if (perfectly_fitted(d, w, cur.eta, opts.separated_tail)) separation("every response is fitted exactly");

  try {
    const auto var = numkit::Cholesky(to_spd(gram, dim), opts.pivot_tol).inverse_diagonal();
    fit.se.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) fit.se[j] = std::sqrt(var[j]);
  } catch (const NotPositiveDefiniteError&) {
    if (has_saturated_fit(d, w, cur.eta, opts.saturation_eps)) separation("fitted probabilities saturate");
    fail(ErrorCode::SingularHessian, "negative Hessian is singular at the optimum");
  }
  fit.gamma = std::move(gamma);
  fit.loglik = cur.loglik;
  return fit;
}

std::vector<double> gather_weights(const PanelDataset& ds, std::size_t t, const WeightVector& w) {
  if (w.size() != ds.num_subjects())
    fail(ErrorCode::InvalidArgument, "weight vector has " + std::to_string(w.size()) + " entries for " +
                                         std::to_string(ds.num_subjects()) + " subjects");
  const YearSlice& y = ds.year(t);
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = w[y.subjects[i]];
  return out;
}

LogitFit fit_weighted_logit(const PanelDataset& ds, std::size_t t, const WeightVector* w,
                            std::span<const double> start, const FitOptions& opts) {
  const DesignView d = design_of(ds.year(t), ds.num_covariates());
  if (!w) return fit_logit(d, {}, start, opts);
  const auto rw = gather_weights(ds, t, *w);
  return fit_logit(d, rw, start, opts);
}

std::vector<LogitFit> fit_all_years(const PanelDataset& ds, const FitOptions& opts) {
  std::vector<LogitFit> out;
  out.reserve(ds.num_years());
  for (std::size_t t = 1; t <= ds.num_years(); ++t) {
    try {
      out.push_back(fit_weighted_logit(ds, t, nullptr, {}, opts));
    } catch (const Error& e) {
      throw Error(e.code(), "year " + std::to_string(ds.calendar_year(t)) + ": " + e.what());
    }
  }
  return out;
}

double predict_prob(std::span<const double> gamma, std::span<const double> x) {
  if (gamma.size() != x.size() + 1)
    fail(ErrorCode::InvalidArgument, "gamma must have one more entry than x");
  double eta = gamma[0];
  for (std::size_t j = 0; j < x.size(); ++j) eta += gamma[j + 1] * x[j];
  const double e = std::exp(-std::abs(eta));
  return eta >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

LogLikDerivatives loglik_grad_hess(const DesignView& d, std::span<const double> row_weights,
                                   std::span<const double> gamma) {
  const std::size_t dim = d.p + 1;
  if (gamma.size() != dim) fail(ErrorCode::InvalidArgument, "gamma length does not match the design");
  const double* w = row_weights.empty() ? nullptr : row_weights.data();
  const simd::KernelSet& k = simd::active_kernels();
  Evaluation ev(d.n);
  ev.at(k, d, w, gamma.data());
  LogLikDerivatives out;
  out.loglik = ev.loglik;
  out.grad.resize(dim);
  std::vector<double> gram(dim * dim);
  k.normal_equations(d.cols, d.n, d.p, ev.score.data(), ev.curv.data(), out.grad.data(), gram.data());
  out.hess.resize(dim * dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) out.hess[i * dim + j] = out.hess[j * dim + i] = -gram[i * dim + j];
  return out;
}

LogLikDerivatives loglik_grad_hess(const PanelDataset& ds, std::size_t t, const WeightVector* w,
                                   std::span<const double> gamma) {
  const DesignView d = design_of(ds.year(t), ds.num_covariates());
  if (!w) return loglik_grad_hess(d, {}, gamma);
  const auto rw = gather_weights(ds, t, *w);
  return loglik_grad_hess(d, rw, gamma);
}

std::vector<double> standardized_residuals(const PanelDataset& ds, std::size_t t,
                                           std::span<const double> gamma) {
  const YearSlice& y = ds.year(t);
  const std::size_t p = ds.num_covariates();
  if (gamma.size() != p + 1) fail(ErrorCode::InvalidArgument, "gamma length does not match the design");
  const simd::KernelSet& k = simd::active_kernels();
  std::vector<double> eta(y.size()), r(y.size());
  k.linear_predictor(y.cols.data(), y.size(), p, gamma.data(), eta.data());
  k.standardized_residuals(eta.data(), y.z.data(), y.size(), kResidualClip, r.data());
  return r;
}

}  // namespace ldiag

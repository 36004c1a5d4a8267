#pragma once

// Per-year Bernoulli-logit maximum likelihood, optionally with observation
// weights, by Newton-Raphson with step-halving.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ldiag/panel.hpp"

namespace ldiag {

struct LogitFit {
  std::vector<double> gamma;  // intercept first
  std::vector<double> se;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;  // max-abs gradient at exit
};

/// Per-subject multiplier weights, indexed by subject universe position.
using WeightVector = std::vector<double>;

struct FitOptions {
  double grad_tol = 1e-8;
  double step_tol = 1e-10;
  int max_iter = 100;
  double separation_bound = 30.0;   // on max |gamma_k|
  double saturation_eps = 1e-12;    // fitted p this close to 0/1 counts as saturated
  double separated_tail = 1e-6;     // converged with every row fitted this closely: complete separation
  double pivot_tol = 1e-12;
};

/// Non-owning column-major design (see simd/kernels.hpp).
struct DesignView {
  const double* cols = nullptr;
  const double* z = nullptr;
  std::size_t n = 0;
  std::size_t p = 0;
};

[[nodiscard]] DesignView design_of(const YearSlice& year, std::size_t p) noexcept;

/// Owning design, e.g. two years stacked for a pooled fit.
struct OwnedDesign {
  std::vector<double> cols;
  std::vector<double> z;
  std::size_t n = 0;
  std::size_t p = 0;

  [[nodiscard]] DesignView view() const noexcept { return {cols.data(), z.data(), n, p}; }
};

[[nodiscard]] OwnedDesign stack_years(const PanelDataset& ds, std::size_t s, std::size_t t);

/// Core fitter. `row_weights` is per row (empty means unit weights); `start`
/// is the initial gamma (empty means zero).
[[nodiscard]] LogitFit fit_logit(const DesignView& design, std::span<const double> row_weights = {},
                                 std::span<const double> start = {}, const FitOptions& opts = {});

/// Subject weights restricted to the rows of year t.
[[nodiscard]] std::vector<double> gather_weights(const PanelDataset& ds, std::size_t t,
                                                 const WeightVector& w);

/// Fit year t (1-based). `w == nullptr` means unit weights.
[[nodiscard]] LogitFit fit_weighted_logit(const PanelDataset& ds, std::size_t t,
                                          const WeightVector* w = nullptr,
                                          std::span<const double> start = {},
                                          const FitOptions& opts = {});

/// Unweighted fits for years 1..T.
[[nodiscard]] std::vector<LogitFit> fit_all_years(const PanelDataset& ds, const FitOptions& opts = {});

/// Logistic probability at gamma for one covariate vector, overflow-free.
[[nodiscard]] double predict_prob(std::span<const double> gamma, std::span<const double> x);

struct LogLikDerivatives {
  double loglik = 0.0;
  std::vector<double> grad;
  std::vector<double> hess;  // full row-major (p+1)^2, negative semidefinite
};

[[nodiscard]] LogLikDerivatives loglik_grad_hess(const DesignView& design,
                                                 std::span<const double> row_weights,
                                                 std::span<const double> gamma);
[[nodiscard]] LogLikDerivatives loglik_grad_hess(const PanelDataset& ds, std::size_t t,
                                                 const WeightVector* w, std::span<const double> gamma);

/// r_i = (z_i - p_i) / sqrt(p_i (1 - p_i)) for every row of year t, with p clipped.
[[nodiscard]] std::vector<double> standardized_residuals(const PanelDataset& ds, std::size_t t,
                                                         std::span<const double> gamma);

inline constexpr double kResidualClip = 1e-10;

}  // namespace ldiag

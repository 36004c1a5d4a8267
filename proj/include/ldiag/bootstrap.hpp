#pragma once

// Randomly weighted bootstrap. Replicate b draws one multiplier weight per
// subject; the same weights enter every year's refit and every pair's
// residual cross-moment, so one set of draws serves both test families.

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "ldiag/logit.hpp"
#include "ldiag/numkit.hpp"
#include "ldiag/panel.hpp"

namespace ldiag {

enum class WeightLaw {
  StandardExponential,
  ConstantOne,  // every weight 1; reduces each refit to the base fit
};

struct BootstrapPlan {
  std::size_t B = 1000;
  std::uint64_t seed = 0;
  WeightLaw weight_law = WeightLaw::StandardExponential;

  /// Throws InvalidArgument when B < 2.
  void validate() const;
};

/// Weights for replicate b (1-based). Depends only on (n, b, seed, law).
[[nodiscard]] WeightVector draw_weights(std::size_t n, std::size_t b, const BootstrapPlan& plan);

/// Pairs (s, t), s < t, in the fixed order (1,2), (1,3), ..., (T-1,T).
[[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> pair_order(std::size_t T);
[[nodiscard]] std::size_t pair_index(std::size_t s, std::size_t t, std::size_t T);

/// (1/n_st) sum over A_s ∩ A_t of w_i r_is r_it. `r_s`/`r_t` are per-row
/// residuals of years s and t; `w` is per subject (null: unit weights).
[[nodiscard]] double residual_cross_moment(const PairCohort& cohort, std::span<const double> r_s,
                                           std::span<const double> r_t, const WeightVector* w);

struct ReplicateDraws {
  std::size_t B = 0;
  std::size_t T = 0;
  std::size_t dim = 0;  // P + 1
  std::vector<double> gammas;        // [(b * T + (t-1)) * dim + k]
  std::vector<double> rhos;          // [b * npairs + pair]
  std::vector<std::uint8_t> failed;  // per replicate

  [[nodiscard]] std::size_t num_pairs() const noexcept { return T * (T - 1) / 2; }
  [[nodiscard]] std::size_t num_failed() const noexcept;
  [[nodiscard]] std::size_t usable() const noexcept { return B - num_failed(); }
  /// b is 0-based, t is 1-based.
  [[nodiscard]] std::span<const double> gamma(std::size_t b, std::size_t t) const noexcept {
    return {gammas.data() + (b * T + (t - 1)) * dim, dim};
  }
  [[nodiscard]] double rho(std::size_t b, std::size_t pair) const noexcept {
    return rhos[b * num_pairs() + pair];
  }
};

struct ReplicateOptions {
  unsigned workers = 1;
  FitOptions fit;
  double max_failure_rate = 0.05;
  /// Instrumentation: called once per replicate with its weights (from worker threads).
  std::function<void(std::size_t b, const WeightVector&)> on_weights;
};

/// Runs all B replicates. Output is identical for any worker count.
/// Throws TooManyFailures when more than max_failure_rate of replicates fail.
[[nodiscard]] ReplicateDraws run_replicates(const PanelDataset& ds, const std::vector<LogitFit>& base_fits,
                                            const BootstrapPlan& plan, const ReplicateOptions& opts = {});

/// S = sum_b (v_b - center)(v_b - center)^T.
[[nodiscard]] numkit::SpdMatrix scatter_about(const std::vector<std::vector<double>>& draws,
                                              std::span<const double> center);

/// Audit dumps: (b, year, coef, value) and (b, s, t, rho_b), calendar-year labels.
void write_replicate_gammas_csv(std::ostream& out, const PanelDataset& ds, const ReplicateDraws& draws);
void write_replicate_rhos_csv(std::ostream& out, const PanelDataset& ds, const ReplicateDraws& draws);

}  // namespace ldiag

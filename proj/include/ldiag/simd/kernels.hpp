#pragma once

// Inner-loop kernels shared by the logistic fitter, the bootstrap engine and
// the residual-correlation statistics. Every kernel has a scalar reference
// implementation; an AVX2/FMA variant is compiled separately and picked at
// runtime when the CPU supports it. Variants agree to rounding (sums are
// reassociated), and each variant is deterministic on its own.
//
// Design matrices are column-major with the intercept column implicit:
// `cols[j * n + i]` is covariate j of row i, for j < p.

#include <cstddef>
#include <string_view>

namespace ldiag::simd {

struct KernelSet {
  std::string_view name;

  /// eta[i] = gamma[0] + sum_j gamma[j+1] * cols[j*n + i]
  void (*linear_predictor)(const double* cols, std::size_t n, std::size_t p, const double* gamma,
                           double* eta);

  /// Bernoulli-logit terms at eta. Returns sum_i w_i (z_i eta_i - log(1 + e^eta_i)).
  /// score[i] = w_i (z_i - p_i), curv[i] = w_i p_i (1 - p_i). `w` may be null (unit weights).
  double (*logit_terms)(const double* eta, const double* z, const double* w, std::size_t n,
                        double* score, double* curv);

  /// grad[k] = sum_i score_i xbar_ik and the upper triangle of
  /// sum_i curv_i xbar_i xbar_i^T into `gram` (row-major, (p+1)^2).
  void (*normal_equations)(const double* cols, std::size_t n, std::size_t p, const double* score,
                           const double* curv, double* grad, double* gram);

  /// r[i] = (z_i - p_i) / sqrt(p_i (1 - p_i)) with p_i clipped to [clip, 1 - clip].
  void (*standardized_residuals)(const double* eta, const double* z, std::size_t n, double clip,
                                 double* r);

  /// sum_i a_i b_i w_i; `w` may be null.
  double (*weighted_dot)(const double* a, const double* b, const double* w, std::size_t n);

  /// Elementwise e^x for x <= 0 and log(1 + x) for x in [0, 1]; the
  /// transcendental cores used by the kernels above.
  void (*exp_nonpositive)(const double* x, std::size_t n, double* out);
  void (*log1p_unit)(const double* x, std::size_t n, double* out);
};

enum class KernelChoice { Auto, Scalar, Avx2 };

[[nodiscard]] const KernelSet& scalar_kernels() noexcept;
/// Null when the AVX2 variant was not built or the CPU lacks AVX2/FMA.
[[nodiscard]] const KernelSet* avx2_kernels() noexcept;

/// Process-wide kernel table. Defaults to the best supported variant.
[[nodiscard]] const KernelSet& active_kernels() noexcept;
/// Returns false (and leaves the selection unchanged) if the choice is unavailable.
bool select_kernels(KernelChoice choice) noexcept;

}  // namespace ldiag::simd

#include <algorithm>
#include <cmath>

#include "ldiag/simd/kernels.hpp"

namespace ldiag::simd {

namespace {

void linear_predictor(const double* cols, std::size_t n, std::size_t p, const double* gamma,
                      double* eta) {
  for (std::size_t i = 0; i < n; ++i) eta[i] = gamma[0];
  for (std::size_t j = 0; j < p; ++j) {
    const double g = gamma[j + 1];
    const double* x = cols + j * n;
    for (std::size_t i = 0; i < n; ++i) eta[i] += g * x[i];
  }
}

double logit_terms(const double* eta, const double* z, const double* w, std::size_t n, double* score,
                   double* curv) {
  double ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(-std::abs(eta[i]));
    const double softplus = std::max(eta[i], 0.0) + std::log1p(e);
    const double inv = 1.0 / (1.0 + e);
    const double prob = eta[i] >= 0.0 ? inv : e * inv;
    const double wi = w ? w[i] : 1.0;
    ll += wi * (z[i] * eta[i] - softplus);
    score[i] = wi * (z[i] - prob);
    curv[i] = wi * (e * inv * inv);
  }
  return ll;
}

void normal_equations(const double* cols, std::size_t n, std::size_t p, const double* score,
                      const double* curv, double* grad, double* gram) {
  const std::size_t d = p + 1;
  auto col = [&](std::size_t k) { return cols + (k - 1) * n; };

  double g0 = 0.0, h00 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g0 += score[i];
    h00 += curv[i];
  }
  grad[0] = g0;
  gram[0] = h00;
  for (std::size_t k = 1; k < d; ++k) {
    const double* xk = col(k);
    double g = 0.0, h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g += score[i] * xk[i];
      h += curv[i] * xk[i];
    }
    grad[k] = g;
    gram[k] = h;
  }
  for (std::size_t j = 1; j < d; ++j) {
    const double* xj = col(j);
    for (std::size_t k = j; k < d; ++k) {
      const double* xk = col(k);
      double h = 0.0;
      for (std::size_t i = 0; i < n; ++i) h += curv[i] * xj[i] * xk[i];
      gram[j * d + k] = h;
    }
  }
}

void standardized_residuals(const double* eta, const double* z, std::size_t n, double clip,
                            double* r) {
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(-std::abs(eta[i]));
    const double inv = 1.0 / (1.0 + e);
    double prob = eta[i] >= 0.0 ? inv : e * inv;
    prob = std::min(std::max(prob, clip), 1.0 - clip);
    r[i] = (z[i] - prob) / std::sqrt(prob * (1.0 - prob));
  }
}

double weighted_dot(const double* a, const double* b, const double* w, std::size_t n) {
  double s = 0.0;
  if (w) {
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * w[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  }
  return s;
}

void exp_nonpositive(const double* x, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void log1p_unit(const double* x, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::log1p(x[i]);
}

}  // namespace

const KernelSet& scalar_kernels() noexcept {
  static const KernelSet set{"scalar", &linear_predictor, &logit_terms, &normal_equations,
                             &standardized_residuals, &weighted_dot, &exp_nonpositive,
                             &log1p_unit};
  return set;
}

}  // namespace ldiag::simd

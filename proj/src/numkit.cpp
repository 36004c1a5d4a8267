#include "ldiag/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ldiag/error.hpp"

namespace ldiag::numkit {

SpdMatrix SpdMatrix::identity(std::size_t dim) {
  SpdMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

Cholesky::Cholesky(const SpdMatrix& a, double rel_tol) : dim_(a.dim()), l_(a.dim() * a.dim(), 0.0) {
  const std::size_t n = dim_;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
  const double floor = rel_tol * scale;

  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l_[j * n + k] * l_[j * n + k];
    if (!(d > floor) || scale == 0.0) throw NotPositiveDefiniteError(j, d, scale);
    const double ljj = std::sqrt(d);
    l_[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(j, i);
      for (std::size_t k = 0; k < j; ++k) s -= l_[i * n + k] * l_[j * n + k];
      l_[i * n + j] = s / ljj;
    }
  }
}

std::vector<double> Cholesky::solve(std::span<const double> b) const {
  const std::size_t n = dim_;
  if (b.size() != n) fail(ErrorCode::InvalidArgument, "spd_solve: dimension mismatch");
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_[i * n + k] * y[k];
    y[i] = s / l_[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l_[k * n + ii] * y[k];
    y[ii] = s / l_[ii * n + ii];
  }
  return y;
}

std::vector<double> Cholesky::inverse_diagonal() const {
  // (A^{-1})_jj = ||L^{-1} e_j||^2
  const std::size_t n = dim_;
  std::vector<double> out(n, 0.0);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0 / l_[j * n + j];
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= l_[i * n + k] * col[k];
      col[i] = s / l_[i * n + i];
    }
    double acc = 0.0;
    for (std::size_t i = j; i < n; ++i) acc += col[i] * col[i];
    out[j] = acc;
  }
  return out;
}

double Cholesky::pivot_ratio() const noexcept {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double p = l_[i * dim_ + i] * l_[i * dim_ + i];
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return dim_ == 0 ? 1.0 : hi / lo;
}

namespace {

constexpr int kMaxIter = 100000;
constexpr double kEps = 1e-17;
constexpr double kTiny = 1e-300;

// log of e^{-x} x^a / Gamma(a)
double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

// Lower regularized P(a, x) by its power series; valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

// Upper regularized Q(a, x) by modified Lentz continued fraction; x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps * 4) break;
  }
  return std::exp(log_prefactor(a, x)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a))
    fail(ErrorCode::DomainError, "gamma_q: requires a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_fraction(a, x), 0.0, 1.0);
}

double chisq_sf(double x, int df) {
  if (df < 1) fail(ErrorCode::DomainError, "chisq_sf: df must be >= 1, got " + std::to_string(df));
  if (!(x >= 0.0)) fail(ErrorCode::DomainError, "chisq_sf: statistic must be >= 0");
  return gamma_q(0.5 * df, 0.5 * x);
}

std::vector<double> spd_solve(const SpdMatrix& a, std::span<const double> b) {
  if (b.size() != a.dim()) fail(ErrorCode::InvalidArgument, "spd_solve: dimension mismatch");
  return Cholesky(a).solve(b);
}

double quad_form_inv(const SpdMatrix& a, std::span<const double> v) {
  const auto x = spd_solve(a, v);
  double q = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) q += v[i] * x[i];
  return std::max(q, 0.0);
}

}  // namespace ldiag::numkit

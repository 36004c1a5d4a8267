#pragma once

// Small dense numerical kernel: chi-squared tail probabilities and
// symmetric positive-definite solves. Matrices here are at most a few
// hundred rows, so everything is dense and row-major.

#include <cstddef>
#include <span>
#include <vector>

namespace ldiag::numkit {

/// Dense symmetric matrix. Only the upper triangle is read by the
/// factorization; `set` writes both halves so full-storage consumers work.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  static SpdMatrix identity(std::size_t dim);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept {
    return i <= j ? data_[i * dim_ + j] : data_[j * dim_ + i];
  }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    data_[i * dim_ + j] = v;
    data_[j * dim_ + i] = v;
  }
  void add(std::size_t i, std::size_t j, double v) noexcept {
    data_[i * dim_ + j] += v;
    if (i != j) data_[j * dim_ + i] += v;
  }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Lower Cholesky factor A = L L^T.
class Cholesky {
 public:
  /// Throws NotPositiveDefiniteError when a pivot falls below
  /// `rel_tol` times the largest diagonal entry of A.
  explicit Cholesky(const SpdMatrix& a, double rel_tol = 1e-12);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::vector<double> solve(std::span<const double> b) const;
  /// Diagonal of A^{-1}.
  [[nodiscard]] std::vector<double> inverse_diagonal() const;
  /// Ratio of largest to smallest pivot (squared diagonal of L).
  [[nodiscard]] double pivot_ratio() const noexcept;

 private:
  std::size_t dim_;
  std::vector<double> l_;  // row-major lower triangle
};

/// Upper-tail chi-squared probability Q(df/2, x/2).
[[nodiscard]] double chisq_sf(double x, int df);

/// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
[[nodiscard]] double gamma_q(double a, double x);

[[nodiscard]] std::vector<double> spd_solve(const SpdMatrix& a, std::span<const double> b);

/// v^T A^{-1} v through a Cholesky solve; never forms the inverse.
[[nodiscard]] double quad_form_inv(const SpdMatrix& a, std::span<const double> v);

}  // namespace ldiag::numkit

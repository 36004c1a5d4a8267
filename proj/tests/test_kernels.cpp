#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ldiag/rng.hpp"
#include "ldiag/simd/kernels.hpp"

using namespace ldiag;
using simd::KernelSet;

namespace {

struct Problem {
  std::size_t n, p;
  std::vector<double> cols, z, w, gamma;
};

Problem make_problem(std::size_t n, std::size_t p, std::uint64_t seed, double spread = 1.0) {
  rng::Stream st(seed, 0);
  Problem pr{n, p, std::vector<double>(n * p), std::vector<double>(n), std::vector<double>(n),
             std::vector<double>(p + 1)};
  for (auto& v : pr.cols) v = spread * (4.0 * st.uniform() - 2.0);
  for (auto& v : pr.z) v = st.uniform() < 0.4 ? 1.0 : 0.0;
  for (auto& v : pr.w) v = st.exponential();
  for (auto& v : pr.gamma) v = 2.0 * st.uniform() - 1.0;
  return pr;
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const KernelSet* v = simd::avx2_kernels();
  if (!v) SKIP("AVX2 variant unavailable on this machine");
  const KernelSet& s = simd::scalar_kernels();

  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 31u, 64u, 257u, 1117u}) {
    for (std::size_t p : {0u, 1u, 3u, 4u, 5u, 8u, 11u}) {
      const Problem pr = make_problem(n, p, 1000 * n + p, 3.0);
      std::vector<double> eta_s(n), eta_v(n);
      s.linear_predictor(pr.cols.data(), n, p, pr.gamma.data(), eta_s.data());
      v->linear_predictor(pr.cols.data(), n, p, pr.gamma.data(), eta_v.data());
      for (std::size_t i = 0; i < n; ++i) REQUIRE(close(eta_v[i], eta_s[i], 1e-14));

      for (const double* w : {static_cast<const double*>(nullptr), pr.w.data()}) {
        std::vector<double> sc_s(n), cu_s(n), sc_v(n), cu_v(n);
        const double ll_s = s.logit_terms(eta_s.data(), pr.z.data(), w, n, sc_s.data(), cu_s.data());
        const double ll_v = v->logit_terms(eta_s.data(), pr.z.data(), w, n, sc_v.data(), cu_v.data());
        INFO("n = " << n << ", p = " << p);
        REQUIRE(close(ll_v, ll_s, 1e-12));
        for (std::size_t i = 0; i < n; ++i) {
          REQUIRE(close(sc_v[i], sc_s[i], 1e-14));
          REQUIRE(close(cu_v[i], cu_s[i], 1e-14));
        }

        const std::size_t d = p + 1;
        std::vector<double> g_s(d), g_v(d), h_s(d * d, 0.0), h_v(d * d, 0.0);
        s.normal_equations(pr.cols.data(), n, p, sc_s.data(), cu_s.data(), g_s.data(), h_s.data());
        v->normal_equations(pr.cols.data(), n, p, sc_s.data(), cu_s.data(), g_v.data(), h_v.data());
        double gscale = 0.0;
        for (double g : g_s) gscale = std::max(gscale, std::abs(g));
        for (std::size_t k = 0; k < d; ++k) REQUIRE(std::abs(g_v[k] - g_s[k]) <= 1e-12 * std::max(1.0, gscale) * n);
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = a; b < d; ++b) REQUIRE(close(h_v[a * d + b], h_s[a * d + b], 1e-12));
      }

      std::vector<double> r_s(n), r_v(n);
      s.standardized_residuals(eta_s.data(), pr.z.data(), n, 1e-10, r_s.data());
      v->standardized_residuals(eta_s.data(), pr.z.data(), n, 1e-10, r_v.data());
      for (std::size_t i = 0; i < n; ++i) REQUIRE(close(r_v[i], r_s[i], 1e-13));

      const double d_s = s.weighted_dot(eta_s.data(), pr.z.data(), pr.w.data(), n);
      const double d_v = v->weighted_dot(eta_s.data(), pr.z.data(), pr.w.data(), n);
      REQUIRE(std::abs(d_v - d_s) <= 1e-13 * n * 18.0);
    }
  }
}

TEST_CASE("vector exp and log1p are accurate to a few ulp") {
  const KernelSet* v = simd::avx2_kernels();
  if (!v) SKIP("AVX2 variant unavailable on this machine");
  std::vector<double> x;
  for (int i = 0; i <= 20000; ++i) x.push_back(-745.0 * i / 20000.0);
  for (int i = 0; i <= 2000; ++i) x.push_back(-1.0 * i / 2000.0);
  x.push_back(-0.0);
  x.push_back(-1e-300);
  std::vector<double> out(x.size());
  v->exp_nonpositive(x.data(), x.size(), out.data());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ref = std::exp(x[i]);
    if (x[i] < -708.0) {
      CHECK(out[i] == 0.0);
    } else {
      INFO("x = " << x[i]);
      REQUIRE(std::abs(out[i] - ref) <= 4e-16 * ref);
    }
  }

  std::vector<double> u;
  for (int i = 0; i <= 20000; ++i) u.push_back(i / 20000.0);
  u.push_back(1e-300);
  u.push_back(0.41421356237309503);
  u.push_back(0.41421356237309506);
  out.resize(u.size());
  v->log1p_unit(u.data(), u.size(), out.data());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ref = std::log1p(u[i]);
    INFO("x = " << u[i]);
    REQUIRE(std::abs(out[i] - ref) <= 4e-16 * std::max(ref, 1e-300));
  }
}

TEST_CASE("logit terms stay finite at extreme linear predictors") {
  const std::vector<double> eta{-800.0, -40.0, 0.0, 40.0, 800.0};
  const std::vector<double> z{0.0, 1.0, 1.0, 0.0, 1.0};
  std::vector<const KernelSet*> sets{&simd::scalar_kernels()};
  if (simd::avx2_kernels()) sets.push_back(simd::avx2_kernels());
  for (const KernelSet* k : sets) {
    std::vector<double> score(5), curv(5), r(5);
    const double ll = k->logit_terms(eta.data(), z.data(), nullptr, 5, score.data(), curv.data());
    CHECK(std::isfinite(ll));
    CHECK(ll == Catch::Approx(-40.0 - std::log1p(std::exp(-40.0)) - std::log(2.0) - 40.0 -
                              std::log1p(std::exp(-40.0)))
                    .epsilon(1e-12));
    for (double c : curv) CHECK(c >= 0.0);
    k->standardized_residuals(eta.data(), z.data(), 5, 1e-10, r.data());
    for (double v : r) CHECK(std::isfinite(v));
  }
}

TEST_CASE("kernel selection") {
  CHECK(simd::select_kernels(simd::KernelChoice::Scalar));
  CHECK(simd::active_kernels().name == "scalar");
  if (simd::avx2_kernels()) {
    CHECK(simd::select_kernels(simd::KernelChoice::Avx2));
    CHECK(simd::active_kernels().name == simd::avx2_kernels()->name);
  } else {
    CHECK_FALSE(simd::select_kernels(simd::KernelChoice::Avx2));
  }
  CHECK(simd::select_kernels(simd::KernelChoice::Auto));
}

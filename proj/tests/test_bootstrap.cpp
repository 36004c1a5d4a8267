#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "ldiag/bootstrap.hpp"
#include "ldiag/error.hpp"
#include "support.hpp"

using namespace ldiag;
using Catch::Approx;

TEST_CASE("weights depend only on seed and replicate index") {
  const BootstrapPlan plan{100, 42};
  CHECK(draw_weights(50, 3, plan) == draw_weights(50, 3, plan));
  CHECK(draw_weights(50, 3, plan) != draw_weights(50, 4, plan));
  CHECK(draw_weights(50, 3, plan) != draw_weights(50, 3, BootstrapPlan{100, 43}));
  // A longer vector extends the shorter one.
  const auto a = draw_weights(10, 7, plan);
  const auto b = draw_weights(20, 7, plan);
  CHECK(std::equal(a.begin(), a.end(), b.begin()));

  BootstrapPlan ones = plan;
  ones.weight_law = WeightLaw::ConstantOne;
  for (double w : draw_weights(30, 1, ones)) CHECK(w == 1.0);
}

TEST_CASE("exponential weights have unit mean and variance") {
  const BootstrapPlan plan{2, 7};
  std::vector<double> all;
  for (std::size_t b = 1; b <= 100; ++b) {
    const auto w = draw_weights(1000, b, plan);
    all.insert(all.end(), w.begin(), w.end());
  }
  double m = 0.0;
  for (double x : all) m += x;
  m /= static_cast<double>(all.size());
  double v = 0.0;
  for (double x : all) v += (x - m) * (x - m);
  v /= static_cast<double>(all.size() - 1);
  CHECK(m == Approx(1.0).margin(0.01));
  CHECK(v == Approx(1.0).margin(0.03));

  // Kolmogorov distance to the Exp(1) CDF.
  std::sort(all.begin(), all.end());
  double d = 0.0;
  const double n = static_cast<double>(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double f = 1.0 - std::exp(-all[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  CHECK(d < 0.006);
}

TEST_CASE("pair indexing") {
  const auto pairs = pair_order(4);
  REQUIRE(pairs.size() == 6);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    CHECK(pair_index(pairs[k].first, pairs[k].second, 4) == k);
    CHECK(pair_index(pairs[k].second, pairs[k].first, 4) == k);
  }
  CHECK_THROWS_AS(pair_index(2, 2, 4), Error);
  CHECK_THROWS_AS(pair_index(0, 2, 4), Error);
  CHECK_THROWS_AS(pair_index(1, 5, 4), Error);
}

TEST_CASE("B below two is rejected") {
  const PanelDataset ds = testing::random_panel({});
  const auto fits = fit_all_years(ds);
  try {
    (void)run_replicates(ds, fits, BootstrapPlan{1, 1});
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("unit weights reproduce the base fits in every replicate") {
  const PanelDataset ds = testing::random_panel({3, 200, 2, 0.1, 0.8, 3});
  const auto fits = fit_all_years(ds);
  BootstrapPlan plan{5, 1, WeightLaw::ConstantOne};
  const ReplicateDraws d = run_replicates(ds, fits, plan);
  CHECK(d.num_failed() == 0);
  for (std::size_t b = 0; b < d.B; ++b) {
    for (std::size_t t = 1; t <= 3; ++t)
      for (std::size_t k = 0; k < d.dim; ++k) CHECK(d.gamma(b, t)[k] == Approx(fits[t - 1].gamma[k]).margin(1e-12));
    for (std::size_t k = 0; k < d.num_pairs(); ++k) {
      const auto [s, t] = pair_order(3)[k];
      const auto rs = standardized_residuals(ds, s, fits[s - 1].gamma);
      const auto rt = standardized_residuals(ds, t, fits[t - 1].gamma);
      CHECK(d.rho(b, k) == Approx(residual_cross_moment(ds.pair_cohort(s, t), rs, rt, nullptr)).margin(1e-12));
    }
  }
}

TEST_CASE("scatter_about") {
  const std::vector<double> c{1.0, 2.0};
  const auto s = scatter_about({{2.0, 2.0}, {0.0, 4.0}}, c);
  CHECK(s(0, 0) == 2.0);
  CHECK(s(1, 1) == 4.0);
  CHECK(s(0, 1) == -2.0);
  CHECK(s(1, 0) == -2.0);
  CHECK_THROWS_AS(scatter_about({{1.0}}, c), Error);

  // Scatter about the sample mean over B - 1 is the sample covariance.
  rng::Stream st(5, 0);
  std::vector<std::vector<double>> v(400, std::vector<double>(3));
  std::vector<double> mean(3, 0.0);
  for (auto& r : v)
    for (std::size_t i = 0; i < 3; ++i) {
      r[i] = st.exponential() + (i ? r[0] : 0.0);
      mean[i] += r[i] / 400.0;
    }
  const auto sm = scatter_about(v, mean);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double cov = 0.0;
      for (const auto& r : v) cov += (r[i] - mean[i]) * (r[j] - mean[j]);
      CHECK(sm(i, j) == Approx(cov).epsilon(1e-12));
    }
}

TEST_CASE("replicates do not depend on the worker count") {
  const PanelDataset ds = testing::random_panel({3, 250, 3, 0.15, 0.7, 21});
  const auto fits = fit_all_years(ds);
  const BootstrapPlan plan{40, 99};
  ReplicateOptions one, four;
  four.workers = 4;
  const ReplicateDraws a = run_replicates(ds, fits, plan, one);
  const ReplicateDraws b = run_replicates(ds, fits, plan, four);
  CHECK(a.gammas == b.gammas);
  CHECK(a.rhos == b.rhos);
  CHECK(a.failed == b.failed);
}

TEST_CASE("one weight vector per replicate is shared by every year and pair") {
  const PanelDataset ds = testing::random_panel({3, 150, 2, 0.2, 0.7, 8});
  const auto fits = fit_all_years(ds);
  const BootstrapPlan plan{6, 17};
  std::mutex mu;
  std::vector<WeightVector> seen(plan.B);
  ReplicateOptions opts;
  opts.workers = 2;
  opts.on_weights = [&](std::size_t b, const WeightVector& w) {
    const std::lock_guard lock(mu);
    seen[b] = w;
  };
  const ReplicateDraws d = run_replicates(ds, fits, plan, opts);
  for (std::size_t b = 0; b < plan.B; ++b) {
    REQUIRE(seen[b] == draw_weights(ds.num_subjects(), b + 1, plan));
    // Refitting each year with those weights reproduces the stored draws.
    std::vector<std::vector<double>> resid;
    for (std::size_t t = 1; t <= 3; ++t) {
      const LogitFit f = fit_weighted_logit(ds, t, &seen[b]);
      for (std::size_t k = 0; k < d.dim; ++k) CHECK(d.gamma(b, t)[k] == Approx(f.gamma[k]).margin(1e-8));
      resid.push_back(standardized_residuals(ds, t, d.gamma(b, t)));
    }
    for (std::size_t k = 0; k < d.num_pairs(); ++k) {
      const auto [s, t] = pair_order(3)[k];
      const PairCohort& c = ds.pair_cohort(s, t);
      double acc = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i)
        acc += seen[b][c.subjects[i]] * resid[s - 1][c.rows_s[i]] * resid[t - 1][c.rows_t[i]];
      CHECK(d.rho(b, k) == Approx(acc / c.size()).epsilon(1e-12));
    }
  }
}

TEST_CASE("replicate dumps list every usable draw") {
  const PanelDataset ds = testing::random_panel({2, 120, 1, 0.0, 0.5, 2});
  const auto fits = fit_all_years(ds);
  const ReplicateDraws d = run_replicates(ds, fits, BootstrapPlan{3, 1});
  std::ostringstream g, r;
  write_replicate_gammas_csv(g, ds, d);
  write_replicate_rhos_csv(r, ds, d);
  const std::string gs = g.str();
  CHECK(std::count(gs.begin(), gs.end(), '\n') == 1 + 3 * 2 * 2);
  CHECK(r.str().rfind("b,s,t,rho_b\n1,2001,2002,", 0) == 0);
}

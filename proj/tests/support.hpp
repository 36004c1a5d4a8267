#pragma once

// Small random panels for the unit tests.

#include <cmath>
#include <string>
#include <vector>

#include "ldiag/logit.hpp"
#include "ldiag/panel.hpp"
#include "ldiag/rng.hpp"

namespace ldiag::testing {

struct PanelSpec {
  std::size_t T = 3;
  std::size_t n = 300;
  std::size_t P = 2;
  double drop = 0.1;     // chance a subject is missing in a given year
  double scale = 0.8;    // coefficient magnitude
  std::uint64_t seed = 1;
};

// Continuous covariates ~ N(0,1) except column 0, which is binary.
inline PanelDataset random_panel(const PanelSpec& s) {
  rng::Stream st(rng::derive_key({s.seed, 0x7e57ULL}), 0);
  auto normal = [&] {
    const double u1 = 1.0 - st.uniform();
    const double u2 = st.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  std::vector<double> gamma(s.P + 1);
  for (auto& g : gamma) g = s.scale * (2.0 * st.uniform() - 1.0);

  CovariateSchema schema;
  for (std::size_t j = 0; j < s.P; ++j) {
    schema.names.push_back("x" + std::to_string(j + 1));
    schema.types.push_back(j == 0 ? CovariateType::Binary : CovariateType::Continuous);
  }
  std::vector<PanelRecord> recs;
  for (std::size_t t = 1; t <= s.T; ++t) {
    for (std::size_t i = 0; i < s.n; ++i) {
      if (st.uniform() < s.drop) continue;
      PanelRecord r;
      r.subject_id = "id" + std::to_string(i);
      r.calendar_year = 2000 + static_cast<int>(t);
      r.x.resize(s.P);
      for (std::size_t j = 0; j < s.P; ++j) r.x[j] = j == 0 ? (st.uniform() < 0.4 ? 1.0 : 0.0) : normal();
      r.z = st.bernoulli(predict_prob(gamma, r.x)) ? 1 : 0;
      recs.push_back(std::move(r));
    }
  }
  return PanelDataset::from_records(schema, recs);
}

}  // namespace ldiag::testing

#include "ldiag/report.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ldiag/bootstrap.hpp"
#include "ldiag/format.hpp"

namespace ldiag {

using ojson = nlohmann::ordered_json;

bool is_significant(double estimate, double se) noexcept {
  return se > 0.0 && std::abs(estimate / se) > kSignificanceZ;
}

std::string format_p4(double p) { return p == 0.0 ? std::string("<1e-300") : format_g(p, 4); }

namespace {

std::vector<std::string> coefficient_names(const PanelDataset& ds) {
  std::vector<std::string> names{"Intercept"};
  names.insert(names.end(), ds.schema().names.begin(), ds.schema().names.end());
  return names;
}

ojson report_json(const TestReport& r, const std::vector<int>& years) {
  ojson j;
  j["kind"] = std::string(test_kind_name(r.kind));
  if (r.pair) j["pair"] = {years.at(r.pair->first - 1), years.at(r.pair->second - 1)};
  j["statistic"] = r.statistic;
  j["df"] = r.df;
  j["p_value"] = r.p_value;
  j["B_used"] = r.B_used;
  return j;
}

}  // namespace

std::string fits_to_json(const PanelDataset& ds, const std::vector<LogitFit>& fits) {
  const auto names = coefficient_names(ds);
  ojson arr = ojson::array();
  for (std::size_t t = 0; t < fits.size(); ++t) {
    const LogitFit& f = fits[t];
    ojson j;
    j["year"] = ds.calendar_year(t + 1);
    ojson coefs = ojson::array();
    for (std::size_t k = 0; k < f.gamma.size(); ++k)
      coefs.push_back({{"name", names[k]}, {"estimate", f.gamma[k]}, {"se", f.se[k]},
                       {"significant", is_significant(f.gamma[k], f.se[k])}});
    j["coefficients"] = coefs;
    j["loglik"] = f.loglik;
    j["iterations"] = f.iterations;
    j["converged"] = f.converged;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void write_fits_csv(std::ostream& out, const PanelDataset& ds, const std::vector<LogitFit>& fits) {
  const auto names = coefficient_names(ds);
  out << "year,variable,estimate,se,z,significant\n";
  for (std::size_t t = 0; t < fits.size(); ++t) {
    const LogitFit& f = fits[t];
    for (std::size_t k = 0; k < f.gamma.size(); ++k)
      out << ds.calendar_year(t + 1) << ',' << names[k] << ',' << format_g(f.gamma[k]) << ','
          << format_g(f.se[k]) << ',' << format_g(f.gamma[k] / f.se[k]) << ','
          << (is_significant(f.gamma[k], f.se[k]) ? 1 : 0) << '\n';
  }
}

std::string diagnostics_to_json(const DiagnosticReport& rep) {
  const auto& years = rep.calendar_years;
  ojson j;
  j["years"] = years;
  j["B"] = rep.B;
  j["failed_replicates"] = rep.failed_replicates;
  j["serial_aggregate"] = report_json(rep.serial_aggregate, years);
  j["corr_aggregate"] = report_json(rep.corr_aggregate, years);
  ojson sp = ojson::array(), cp = ojson::array();
  for (const auto& r : rep.serial_pairwise) sp.push_back(report_json(r, years));
  for (const auto& r : rep.corr_pairwise) cp.push_back(report_json(r, years));
  j["serial_pairwise"] = sp;
  j["corr_pairwise"] = cp;
  ojson corr = ojson::array();
  const auto pairs = pair_order(years.size());
  for (std::size_t k = 0; k < pairs.size(); ++k)
    corr.push_back({{"pair", {years[pairs[k].first - 1], years[pairs[k].second - 1]}},
                    {"residual", rep.correlations.rho[k]},
                    {"raw", rep.correlations.raw[k]}});
  j["correlations"] = corr;
  return j.dump(2) + "\n";
}

void write_pairwise_matrix_csv(std::ostream& out, const std::vector<int>& years,
                               const std::vector<TestReport>& pairwise) {
  const std::size_t T = years.size();
  std::vector<std::vector<std::string>> cells(T, std::vector<std::string>(T));
  for (const auto& r : pairwise) {
    const auto [s, t] = *r.pair;
    cells[s - 1][t - 1] = format_g(r.statistic, 4);
    cells[t - 1][s - 1] = format_p4(r.p_value);
  }
  out << "year";
  for (int y : years) out << ',' << y;
  out << '\n';
  for (std::size_t i = 0; i < T; ++i) {
    out << years[i];
    for (std::size_t k = 0; k < T; ++k) out << ',' << cells[i][k];
    out << '\n';
  }
}

void write_correlations_csv(std::ostream& out, const DiagnosticReport& rep) {
  const auto& years = rep.calendar_years;
  const std::size_t T = years.size();
  std::vector<std::vector<std::string>> cells(T, std::vector<std::string>(T));
  const auto pairs = pair_order(T);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [s, t] = pairs[k];
    cells[s - 1][t - 1] = format_g(rep.correlations.raw[k], 4);
    cells[t - 1][s - 1] = format_g(rep.correlations.rho[k], 4);
  }
  out << "year";
  for (int y : years) out << ',' << y;
  out << '\n';
  for (std::size_t i = 0; i < T; ++i) {
    out << years[i];
    for (std::size_t k = 0; k < T; ++k) out << ',' << cells[i][k];
    out << '\n';
  }
}

std::string diagnostics_text(const DiagnosticReport& rep) {
  std::ostringstream out;
  auto line = [&](const char* label, const TestReport& r) {
    out << label << ": statistic " << format_f(r.statistic, 4) << ", df " << r.df << ", p " << format_p4(r.p_value)
        << '\n';
  };
  line("serial dynamic (aggregate)", rep.serial_aggregate);
  line("correlation (aggregate)   ", rep.corr_aggregate);
  out << "bootstrap replicates: " << rep.B << " (failed " << rep.failed_replicates << ")\n";
  return out.str();
}

}  // namespace ldiag

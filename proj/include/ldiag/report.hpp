#pragma once

// Serialization of fits and diagnostic reports. Pairwise matrices put
// statistics in the upper triangle and p-values in the lower triangle.

#include <ostream>
#include <string>
#include <vector>

#include "ldiag/diag_tests.hpp"
#include "ldiag/logit.hpp"
#include "ldiag/panel.hpp"

namespace ldiag {

inline constexpr double kSignificanceZ = 1.959964;

/// Strict |estimate / se| > 1.959964.
[[nodiscard]] bool is_significant(double estimate, double se) noexcept;

/// Four significant figures; "<1e-300" for an underflowed zero p-value.
[[nodiscard]] std::string format_p4(double p);

[[nodiscard]] std::string fits_to_json(const PanelDataset& ds, const std::vector<LogitFit>& fits);
/// One row per (year, coefficient): year,variable,estimate,se,z,significant.
void write_fits_csv(std::ostream& out, const PanelDataset& ds, const std::vector<LogitFit>& fits);

[[nodiscard]] std::string diagnostics_to_json(const DiagnosticReport& report);
/// T x T matrix keyed by calendar year.
void write_pairwise_matrix_csv(std::ostream& out, const std::vector<int>& years,
                               const std::vector<TestReport>& pairwise);
/// Residual correlations below the diagonal, raw indicator correlations above.
void write_correlations_csv(std::ostream& out, const DiagnosticReport& report);
/// Short plain-text digest for stdout.
[[nodiscard]] std::string diagnostics_text(const DiagnosticReport& report);

}  // namespace ldiag

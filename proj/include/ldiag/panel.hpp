#pragma once

// Imbalanced longitudinal binary-claim panels.
//
// Years are re-indexed to 1..T in ascending calendar order; the calendar
// label is kept for reporting. Each year is stored as a slice with its
// covariates column-major (see simd/kernels.hpp); the intercept column of the
// augmented design is implicit and never materialized.

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ldiag {

enum class CovariateType { Binary, Continuous };

struct CovariateSchema {
  std::vector<std::string> names;
  std::vector<CovariateType> types;

  [[nodiscard]] std::size_t size() const noexcept { return names.size(); }
  /// Throws InvalidPanel on empty, duplicate or blank names, or a types/names length mismatch.
  void validate() const;

  /// All columns continuous.
  static CovariateSchema continuous(std::vector<std::string> names);
};

/// Schema file: JSON `{"covariates": [{"name": "...", "type": "binary"|"continuous"}, ...]}`.
[[nodiscard]] CovariateSchema parse_schema_json(const std::string& text);

struct PanelRecord {
  std::string subject_id;
  int calendar_year = 0;
  int year_index = 0;  // 1..T; filled by the dataset, ignored on input
  int z = 0;
  std::vector<double> x;
};

/// Observations for one year, in input row order.
struct YearSlice {
  int calendar_year = 0;
  std::vector<std::uint32_t> subjects;  // positions in the subject universe
  std::vector<double> z;                // 0.0 / 1.0
  std::vector<double> cols;             // column-major, p * n

  [[nodiscard]] std::size_t size() const noexcept { return subjects.size(); }
  [[nodiscard]] std::span<const double> column(std::size_t j) const noexcept {
    return {cols.data() + j * size(), size()};
  }
};

/// Rows of A_s ∩ A_t, sorted by subject position: (row in year s, row in year t).
struct PairCohort {
  std::vector<std::uint32_t> rows_s;
  std::vector<std::uint32_t> rows_t;
  std::vector<std::uint32_t> subjects;

  [[nodiscard]] std::size_t size() const noexcept { return subjects.size(); }
};

struct CohortSizes {
  std::size_t n = 0;
  std::vector<std::size_t> n_t;                 // T entries
  std::vector<std::vector<std::size_t>> n_st;   // T x T, symmetric
};

struct PanelSummary {
  std::vector<int> calendar_years;
  std::vector<std::size_t> n_t;
  std::vector<double> claim_proportion;
  std::vector<std::vector<std::size_t>> n_st;
};

enum class DesignIssue { ConstantColumn, RankDeficient, DegenerateResponse };

struct DesignDiagnostic {
  DesignIssue issue;
  std::optional<std::size_t> column;  // covariate index, for ConstantColumn
  std::string message;
};

class PanelDataset {
 public:
  /// Builds a dataset from records keyed by calendar year; enforces every
  /// load-time invariant.
  static PanelDataset from_records(CovariateSchema schema, std::span<const PanelRecord> records);

  [[nodiscard]] const CovariateSchema& schema() const noexcept { return schema_; }
  [[nodiscard]] std::size_t num_years() const noexcept { return years_.size(); }
  [[nodiscard]] std::size_t num_subjects() const noexcept { return subjects_.size(); }
  [[nodiscard]] std::size_t num_covariates() const noexcept { return schema_.size(); }
  [[nodiscard]] std::size_t num_records() const noexcept { return row_order_.size(); }

  /// Year t in 1..T.
  [[nodiscard]] const YearSlice& year(std::size_t t) const;
  [[nodiscard]] const std::vector<std::string>& subject_ids() const noexcept { return subjects_; }
  [[nodiscard]] int calendar_year(std::size_t t) const { return year(t).calendar_year; }

  /// A_s ∩ A_t, computed by sorted merge on first use and cached. Thread-safe.
  [[nodiscard]] const PairCohort& pair_cohort(std::size_t s, std::size_t t) const;

  /// Records in original input order (year_index is 1..T).
  [[nodiscard]] std::vector<PanelRecord> records() const;

 private:
  struct PairCache;

  CovariateSchema schema_;
  std::vector<std::string> subjects_;
  std::vector<YearSlice> years_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> row_order_;  // (year 0-based, row)
  std::shared_ptr<PairCache> pairs_;
};

/// Parses `subject_id,year,z,<covariates...>` CSV. The header must match the
/// schema's names in order.
[[nodiscard]] PanelDataset load_panel(std::istream& source, const CovariateSchema& schema);
/// Infers a schema from the header: columns whose values are all 0/1 are binary.
[[nodiscard]] PanelDataset load_panel(std::istream& source);

/// Writes the dataset in load_panel's format, preserving input row order.
void write_panel_csv(std::ostream& out, const PanelDataset& ds);

[[nodiscard]] CohortSizes cohort_sizes(const PanelDataset& ds);
[[nodiscard]] PanelSummary summarize(const PanelDataset& ds);
[[nodiscard]] std::vector<DesignDiagnostic> validate_design(const PanelDataset& ds, std::size_t t);

void write_summary_csv(std::ostream& out, const PanelSummary& summary);
[[nodiscard]] std::string summary_to_json(const PanelSummary& summary);

}  // namespace ldiag

#include "ldiag/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "ldiag/error.hpp"
#include "ldiag/format.hpp"

namespace ldiag {

// ---------------------------------------------------------------------------
// Schema

void CovariateSchema::validate() const {
  if (names.empty()) fail(ErrorCode::InvalidPanel, "schema needs at least one covariate");
  if (types.size() != names.size())
    fail(ErrorCode::InvalidPanel, "schema has " + std::to_string(names.size()) + " names but " +
                                      std::to_string(types.size()) + " types");
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) fail(ErrorCode::InvalidPanel, "schema has a blank covariate name");
    if (!seen.insert(n).second) fail(ErrorCode::InvalidPanel, "duplicate covariate name '" + n + "'");
  }
}

CovariateSchema CovariateSchema::continuous(std::vector<std::string> names) {
  CovariateSchema s;
  s.types.assign(names.size(), CovariateType::Continuous);
  s.names = std::move(names);
  return s;
}

CovariateSchema parse_schema_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("schema: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("covariates") || !j["covariates"].is_array())
    fail(ErrorCode::ConfigError, "schema: expected an object with a 'covariates' array");
  CovariateSchema s;
  for (const auto& c : j["covariates"]) {
    if (!c.is_object() || !c.contains("name") || !c["name"].is_string())
      fail(ErrorCode::ConfigError, "schema: every covariate needs a string 'name'");
    s.names.push_back(c["name"].get<std::string>());
    const std::string type = c.value("type", std::string("continuous"));
    if (type == "binary") {
      s.types.push_back(CovariateType::Binary);
    } else if (type == "continuous") {
      s.types.push_back(CovariateType::Continuous);
    } else {
      fail(ErrorCode::ConfigError, "schema: unknown covariate type '" + type + "'");
    }
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Dataset

struct PanelDataset::PairCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<PairCohort>> cohorts;
};

const YearSlice& PanelDataset::year(std::size_t t) const {
  if (t < 1 || t > years_.size())
    fail(ErrorCode::InvalidArgument, "year index " + std::to_string(t) + " outside 1.." +
                                         std::to_string(years_.size()));
  return years_[t - 1];
}

PanelDataset PanelDataset::from_records(CovariateSchema schema, std::span<const PanelRecord> records) {
  schema.validate();
  const std::size_t p = schema.size();

  PanelDataset ds;
  ds.schema_ = std::move(schema);

  std::set<int> calendar;
  for (const auto& r : records) calendar.insert(r.calendar_year);
  if (calendar.size() < 2) fail(ErrorCode::InvalidPanel, "panel needs at least two distinct years");
  for (int y = *calendar.begin(); y <= *calendar.rbegin(); ++y)
    if (!calendar.count(y)) fail(ErrorCode::EmptyYear, "year " + std::to_string(y) + " has no rows");

  std::map<int, std::uint32_t> year_slot;
  for (int y : calendar) {
    year_slot.emplace(y, static_cast<std::uint32_t>(ds.years_.size()));
    ds.years_.push_back(YearSlice{y, {}, {}, {}});
  }

  std::unordered_map<std::string, std::uint32_t> subject_pos;
  std::set<std::pair<std::uint32_t, std::uint32_t>> cells;
  std::vector<std::vector<const PanelRecord*>> by_year(ds.years_.size());
  ds.row_order_.reserve(records.size());

  for (const auto& r : records) {
    if (r.z != 0 && r.z != 1)
      fail(ErrorCode::MalformedRow, "claim indicator must be 0 or 1 for subject '" + r.subject_id + "'");
    if (r.x.size() != p)
      fail(ErrorCode::MalformedRow, "subject '" + r.subject_id + "' has " + std::to_string(r.x.size()) +
                                        " covariates, expected " + std::to_string(p));
    for (std::size_t j = 0; j < p; ++j) {
      if (!std::isfinite(r.x[j]))
        fail(ErrorCode::MalformedRow, "non-finite covariate '" + ds.schema_.names[j] + "'");
      if (ds.schema_.types[j] == CovariateType::Binary && r.x[j] != 0.0 && r.x[j] != 1.0)
        fail(ErrorCode::MalformedRow, "binary covariate '" + ds.schema_.names[j] + "' must be 0 or 1");
    }
    auto [it, fresh] = subject_pos.emplace(r.subject_id, static_cast<std::uint32_t>(ds.subjects_.size()));
    if (fresh) ds.subjects_.push_back(r.subject_id);
    const std::uint32_t slot = year_slot.at(r.calendar_year);
    if (!cells.emplace(it->second, slot).second)
      fail(ErrorCode::DuplicateCell, "subject '" + r.subject_id + "' appears twice in year " +
                                         std::to_string(r.calendar_year));
    ds.row_order_.emplace_back(slot, static_cast<std::uint32_t>(by_year[slot].size()));
    by_year[slot].push_back(&r);
    ds.years_[slot].subjects.push_back(it->second);
  }

  for (std::size_t y = 0; y < ds.years_.size(); ++y) {
    auto& slice = ds.years_[y];
    const std::size_t n = by_year[y].size();
    slice.z.resize(n);
    slice.cols.resize(n * p);
    for (std::size_t i = 0; i < n; ++i) {
      const PanelRecord& r = *by_year[y][i];
      slice.z[i] = static_cast<double>(r.z);
      for (std::size_t j = 0; j < p; ++j) slice.cols[j * n + i] = r.x[j];
    }
  }
  ds.pairs_ = std::make_shared<PairCache>();
  return ds;
}

const PairCohort& PanelDataset::pair_cohort(std::size_t s, std::size_t t) const {
  const YearSlice& ys = year(s);
  const YearSlice& yt = year(t);
  std::lock_guard lock(pairs_->mutex);
  auto& slot = pairs_->cohorts[{s, t}];
  if (slot) return *slot;

  auto sorted_rows = [](const YearSlice& y) {
    std::vector<std::uint32_t> rows(y.size());
    std::iota(rows.begin(), rows.end(), 0u);
    std::sort(rows.begin(), rows.end(),
              [&](std::uint32_t a, std::uint32_t b) { return y.subjects[a] < y.subjects[b]; });
    return rows;
  };
  const auto rs = sorted_rows(ys);
  const auto rt = sorted_rows(yt);

  auto cohort = std::make_unique<PairCohort>();
  std::size_t a = 0, b = 0;
  while (a < rs.size() && b < rt.size()) {
    const auto sa = ys.subjects[rs[a]];
    const auto sb = yt.subjects[rt[b]];
    if (sa < sb) {
      ++a;
    } else if (sb < sa) {
      ++b;
    } else {
      cohort->rows_s.push_back(rs[a]);
      cohort->rows_t.push_back(rt[b]);
      cohort->subjects.push_back(sa);
      ++a;
      ++b;
    }
  }
  slot = std::move(cohort);
  return *slot;
}

std::vector<PanelRecord> PanelDataset::records() const {
  std::vector<PanelRecord> out;
  out.reserve(row_order_.size());
  const std::size_t p = schema_.size();
  for (const auto& [slot, row] : row_order_) {
    const YearSlice& y = years_[slot];
    PanelRecord r;
    r.subject_id = subjects_[y.subjects[row]];
    r.calendar_year = y.calendar_year;
    r.year_index = static_cast<int>(slot) + 1;
    r.z = static_cast<int>(y.z[row]);
    r.x.resize(p);
    for (std::size_t j = 0; j < p; ++j) r.x[j] = y.cols[j * y.size() + row];
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view cell, std::size_t line_no, std::string_view column) {
  if (cell.empty()) malformed(line_no, "missing value for '" + std::string(column) + "'");
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    malformed(line_no, "cannot parse '" + std::string(cell) + "' as a number for '" + std::string(column) + "'");
  return v;
}

int parse_int(std::string_view cell, std::size_t line_no, std::string_view column) {
  if (cell.empty()) malformed(line_no, "missing value for '" + std::string(column) + "'");
  int v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    malformed(line_no, "cannot parse '" + std::string(cell) + "' as an integer for '" + std::string(column) + "'");
  return v;
}

struct ParsedCsv {
  std::vector<std::string> names;
  std::vector<PanelRecord> records;
};

ParsedCsv parse_csv(std::istream& in) {
  ParsedCsv out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t arity = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (!have_header) {
      if (cells.size() < 4 || cells[0] != "subject_id" || cells[1] != "year" || cells[2] != "z")
        malformed(line_no, "header must be 'subject_id,year,z,<covariates...>'");
      for (std::size_t j = 3; j < cells.size(); ++j) out.names.emplace_back(cells[j]);
      arity = cells.size();
      have_header = true;
      continue;
    }
    if (cells.size() != arity)
      malformed(line_no, "expected " + std::to_string(arity) + " fields, got " + std::to_string(cells.size()));
    PanelRecord r;
    if (cells[0].empty()) malformed(line_no, "empty subject_id");
    r.subject_id = std::string(cells[0]);
    r.calendar_year = parse_int(cells[1], line_no, "year");
    const double z = parse_double(cells[2], line_no, "z");
    if (z != 0.0 && z != 1.0) malformed(line_no, "z must be 0 or 1");
    r.z = static_cast<int>(z);
    r.x.reserve(arity - 3);
    for (std::size_t j = 3; j < arity; ++j) {
      const double v = parse_double(cells[j], line_no, out.names[j - 3]);
      if (!std::isfinite(v)) malformed(line_no, "non-finite value for '" + out.names[j - 3] + "'");
      r.x.push_back(v);
    }
    out.records.push_back(std::move(r));
  }
  if (!have_header) fail(ErrorCode::MalformedRow, "empty input: no header row");
  return out;
}

}  // namespace

PanelDataset load_panel(std::istream& source, const CovariateSchema& schema) {
  ParsedCsv parsed = parse_csv(source);
  if (parsed.names != schema.names)
    fail(ErrorCode::MalformedRow, "header covariates do not match the schema");
  return PanelDataset::from_records(schema, parsed.records);
}

PanelDataset load_panel(std::istream& source) {
  ParsedCsv parsed = parse_csv(source);
  CovariateSchema schema;
  schema.names = parsed.names;
  schema.types.assign(parsed.names.size(), CovariateType::Binary);
  for (const auto& r : parsed.records)
    for (std::size_t j = 0; j < r.x.size() && j < schema.types.size(); ++j)
      if (r.x[j] != 0.0 && r.x[j] != 1.0) schema.types[j] = CovariateType::Continuous;
  return PanelDataset::from_records(std::move(schema), parsed.records);
}

void write_panel_csv(std::ostream& out, const PanelDataset& ds) {
  out << "subject_id,year,z";
  for (const auto& n : ds.schema().names) out << ',' << n;
  out << '\n';
  for (const auto& r : ds.records()) {
    out << r.subject_id << ',' << r.calendar_year << ',' << r.z;
    for (double v : r.x) out << ',' << format_g(v);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Summaries

CohortSizes cohort_sizes(const PanelDataset& ds) {
  const std::size_t T = ds.num_years();
  CohortSizes c;
  c.n = ds.num_subjects();
  c.n_t.resize(T);
  c.n_st.assign(T, std::vector<std::size_t>(T, 0));
  for (std::size_t s = 1; s <= T; ++s) {
    c.n_t[s - 1] = ds.year(s).size();
    c.n_st[s - 1][s - 1] = c.n_t[s - 1];
    for (std::size_t t = s + 1; t <= T; ++t) {
      const std::size_t k = ds.pair_cohort(s, t).size();
      c.n_st[s - 1][t - 1] = k;
      c.n_st[t - 1][s - 1] = k;
    }
  }
  return c;
}

PanelSummary summarize(const PanelDataset& ds) {
  const CohortSizes c = cohort_sizes(ds);
  PanelSummary s;
  s.n_t = c.n_t;
  s.n_st = c.n_st;
  for (std::size_t t = 1; t <= ds.num_years(); ++t) {
    const YearSlice& y = ds.year(t);
    s.calendar_years.push_back(y.calendar_year);
    double claims = 0.0;
    for (double z : y.z) claims += z;
    s.claim_proportion.push_back(claims / static_cast<double>(y.size()));
  }
  return s;
}

namespace {

// Rank of the augmented design from its column-equilibrated Gram matrix,
// by Gaussian elimination with complete pivoting.
std::size_t design_rank(const YearSlice& y, std::size_t p) {
  const std::size_t d = p + 1;
  const std::size_t n = y.size();
  auto col = [&](std::size_t k, std::size_t i) { return k == 0 ? 1.0 : y.cols[(k - 1) * n + i]; };
  std::vector<long double> g(d * d, 0.0L);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      long double s = 0.0L;
      for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(col(a, i)) * col(b, i);
      g[a * d + b] = g[b * d + a] = s;
    }
  std::vector<long double> scale(d);
  for (std::size_t a = 0; a < d; ++a) scale[a] = g[a * d + a] > 0 ? 1.0L / std::sqrt(g[a * d + a]) : 0.0L;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) g[a * d + b] *= scale[a] * scale[b];

  std::vector<std::size_t> live(d);
  std::iota(live.begin(), live.end(), 0);
  std::size_t rank = 0;
  for (std::size_t step = 0; step < d; ++step) {
    long double best = 0.0L;
    std::size_t pr = 0, pc = 0;
    for (std::size_t r = step; r < d; ++r)
      for (std::size_t c = step; c < d; ++c)
        if (std::abs(g[live[r] * d + c]) > best) {
          best = std::abs(g[live[r] * d + c]);
          pr = r;
          pc = c;
        }
    if (best <= 1e-10L) break;
    std::swap(live[step], live[pr]);
    for (std::size_t r = 0; r < d; ++r) std::swap(g[r * d + step], g[r * d + pc]);
    const std::size_t prow = live[step];
    for (std::size_t r = step + 1; r < d; ++r) {
      const std::size_t row = live[r];
      const long double f = g[row * d + step] / g[prow * d + step];
      for (std::size_t c = step; c < d; ++c) g[row * d + c] -= f * g[prow * d + c];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

std::vector<DesignDiagnostic> validate_design(const PanelDataset& ds, std::size_t t) {
  const YearSlice& y = ds.year(t);
  const std::size_t p = ds.num_covariates();
  const std::size_t n = y.size();
  std::vector<DesignDiagnostic> out;

  for (std::size_t j = 0; j < p; ++j) {
    const auto c = y.column(j);
    if (std::all_of(c.begin(), c.end(), [&](double v) { return v == c[0]; }))
      out.push_back({DesignIssue::ConstantColumn, j,
                     "covariate '" + ds.schema().names[j] + "' is constant in year " +
                         std::to_string(y.calendar_year)});
  }
  const std::size_t rank = design_rank(y, p);
  if (rank < p + 1)
    out.push_back({DesignIssue::RankDeficient, std::nullopt,
                   "augmented design has rank " + std::to_string(rank) + " < " + std::to_string(p + 1) +
                       " in year " + std::to_string(y.calendar_year)});
  const double claims = std::accumulate(y.z.begin(), y.z.end(), 0.0);
  if (claims == 0.0 || claims == static_cast<double>(n))
    out.push_back({DesignIssue::DegenerateResponse, std::nullopt,
                   "claim indicator is constant in year " + std::to_string(y.calendar_year)});
  return out;
}

void write_summary_csv(std::ostream& out, const PanelSummary& summary) {
  out << "year,n_t,claim_proportion\n";
  for (std::size_t t = 0; t < summary.n_t.size(); ++t)
    out << summary.calendar_years[t] << ',' << summary.n_t[t] << ',' << format_g(summary.claim_proportion[t])
        << '\n';
}

std::string summary_to_json(const PanelSummary& summary) {
  nlohmann::ordered_json j;
  j["years"] = summary.calendar_years;
  j["n_t"] = summary.n_t;
  j["claim_proportion"] = summary.claim_proportion;
  j["n_st"] = summary.n_st;
  return j.dump(2);
}

}  // namespace ldiag

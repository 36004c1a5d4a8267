#include "ldiag/cli_commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ldiag/bootstrap.hpp"
#include "ldiag/diag_tests.hpp"
#include "ldiag/logit.hpp"
#include "ldiag/panel.hpp"
#include "ldiag/report.hpp"
#include "ldiag/sim.hpp"

namespace ldiag {

namespace fs = std::filesystem;

int exit_code_for(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Input: return 2;
    case ErrorCategory::Numerical: return 3;
    case ErrorCategory::Config: return 4;
  }
  return 1;
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || !(v > 0.0 && v < 1.0))
      fail(ErrorCode::ConfigError, "--levels: '" + std::string(item) + "' is not a probability in (0, 1)");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) fail(ErrorCode::ConfigError, "--levels is empty");
  return out;
}

void parse_formats(const std::string& text, RunConfig& cfg) {
  cfg.json = cfg.csv = false;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    if (item == "json") {
      cfg.json = true;
    } else if (item == "csv") {
      cfg.csv = true;
    } else {
      fail(ErrorCode::ConfigError, "--format: unknown format '" + std::string(item) + "'");
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (!cfg.json && !cfg.csv) fail(ErrorCode::ConfigError, "--format selects no output");
}

namespace {

std::string read_file(const std::string& path, ErrorCode code, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(code, std::string("cannot open ") + what + " '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

PanelDataset load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) fail(ErrorCode::ConfigError, "--input is required");
  std::ifstream in(cfg.input);
  if (!in) fail(ErrorCode::ConfigError, "cannot open input '" + cfg.input + "'");
  if (!cfg.schema) return load_panel(in);
  return load_panel(in, parse_schema_json(read_file(*cfg.schema, ErrorCode::ConfigError, "schema")));
}

fs::path output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::ConfigError, "cannot create output directory '" + cfg.out + "': " + ec.message());
  return dir;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  writer(out);
  if (!out) fail(ErrorCode::ConfigError, "write failed for '" + path.string() + "'");
}

void refuse_degenerate_designs(const PanelDataset& ds) {
  for (std::size_t t = 1; t <= ds.num_years(); ++t)
    for (const auto& d : validate_design(ds, t))
      if (d.issue != DesignIssue::ConstantColumn)
        fail(d.issue == DesignIssue::DegenerateResponse ? ErrorCode::Separation : ErrorCode::InvalidPanel,
             d.message);
}

}  // namespace

void cmd_fit(const RunConfig& cfg, std::ostream& log) {
  const PanelDataset ds = load_input(cfg);
  refuse_degenerate_designs(ds);
  const auto fits = fit_all_years(ds);
  const fs::path dir = output_dir(cfg);
  const PanelSummary summary = summarize(ds);
  if (cfg.json) {
    write_file(dir / "fits.json", [&](std::ostream& o) { o << fits_to_json(ds, fits); });
    write_file(dir / "summary.json", [&](std::ostream& o) { o << summary_to_json(summary) << '\n'; });
  }
  if (cfg.csv) {
    write_file(dir / "fits.csv", [&](std::ostream& o) { write_fits_csv(o, ds, fits); });
    write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, summary); });
  }
  log << "fitted " << fits.size() << " years, " << ds.num_subjects() << " subjects\n";
}

void cmd_test(const RunConfig& cfg, std::ostream& log) {
  const PanelDataset ds = load_input(cfg);
  refuse_degenerate_designs(ds);
  const auto fits = fit_all_years(ds);

  BootstrapPlan plan;
  plan.B = cfg.B.value_or(1000);
  plan.seed = cfg.seed.value_or(1);
  plan.validate();
  ReplicateOptions ropts;
  ropts.workers = cfg.workers;
  const ReplicateDraws draws = run_replicates(ds, fits, plan, ropts);
  const DiagnosticReport rep = run_diagnostics(ds, fits, draws);

  const fs::path dir = output_dir(cfg);
  if (cfg.json) {
    write_file(dir / "report.json", [&](std::ostream& o) { o << diagnostics_to_json(rep); });
    write_file(dir / "fits.json", [&](std::ostream& o) { o << fits_to_json(ds, fits); });
  }
  if (cfg.csv) {
    write_file(dir / "serial_pairwise.csv",
               [&](std::ostream& o) { write_pairwise_matrix_csv(o, rep.calendar_years, rep.serial_pairwise); });
    write_file(dir / "corr_pairwise.csv",
               [&](std::ostream& o) { write_pairwise_matrix_csv(o, rep.calendar_years, rep.corr_pairwise); });
    write_file(dir / "correlations.csv", [&](std::ostream& o) { write_correlations_csv(o, rep); });
    write_file(dir / "fits.csv", [&](std::ostream& o) { write_fits_csv(o, ds, fits); });
  }
  if (cfg.dump_replicates) {
    write_file(dir / "replicates_gamma.csv", [&](std::ostream& o) { write_replicate_gammas_csv(o, ds, draws); });
    write_file(dir / "replicates_rho.csv", [&](std::ostream& o) { write_replicate_rhos_csv(o, ds, draws); });
  }
  log << diagnostics_text(rep);
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.config.empty()) fail(ErrorCode::ConfigError, "--config is required for simulate");
  SimConfig sc = parse_sim_config(read_file(cfg.config, ErrorCode::ConfigError, "config"));
  if (cfg.B) sc.B = *cfg.B;
  if (cfg.seed) sc.seed = *cfg.seed;
  sc.validate();

  SimRunOptions opts;
  opts.workers = cfg.workers;
  const SimResult res = run_simulation(sc, opts);

  const fs::path dir = output_dir(cfg);
  if (cfg.csv) {
    write_file(dir / "runs.csv", [&](std::ostream& o) { write_runs_csv(o, res); });
    write_file(dir / "hist.csv", [&](std::ostream& o) { write_hist_csv(o, res); });
  }
  if (cfg.json) write_file(dir / "summary.json", [&](std::ostream& o) { o << sim_summary_json(sc, res, cfg.levels); });
  log << rejection_table(res, cfg.levels);
}

int run_command(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    if (cfg.command == "fit") {
      cmd_fit(cfg, log);
    } else if (cfg.command == "test") {
      cmd_test(cfg, log);
    } else if (cfg.command == "simulate") {
      cmd_simulate(cfg, log);
    } else {
      fail(ErrorCode::ConfigError, "unknown command '" + cfg.command + "'");
    }
  } catch (const Error& e) {
    err << "error[" << error_code_name(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.category());
  }
  return 0;
}

}  // namespace ldiag

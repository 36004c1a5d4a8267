// ldiag: logistic panel diagnostics from the command line.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ldiag/cli_commands.hpp"
#include "ldiag/simd/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serial-dynamic and residual-correlation diagnostics for longitudinal claim indicators"};
  app.require_subcommand(1);

  ldiag::RunConfig cfg;
  std::string formats = "json,csv";
  std::string levels = "0.01,0.05,0.10";
  std::string kernels = "auto";
  std::size_t b = 0;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
    sub->add_option("--format", formats, "Comma-separated output formats: json,csv")->capture_default_str();
    sub->add_option("--workers", cfg.workers, "Worker threads (0: all cores)")->capture_default_str();
    sub->add_option("--levels", levels, "Significance levels")->capture_default_str();
    sub->add_option("--kernels", kernels, "Inner-loop kernels: auto, scalar, avx2")->capture_default_str();
  };
  auto data_flags = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "Panel CSV: subject_id,year,z,<covariates>")->required();
    sub->add_option("--schema", cfg.schema, "Schema JSON (default: infer binary/continuous)");
  };
  auto boot_flags = [&](CLI::App* sub) {
    sub->add_option("--b", b, "Bootstrap replicates (default 1000)");
    sub->add_option("--seed", seed, "Master seed (default 1)");
  };

  CLI::App* fit = app.add_subcommand("fit", "Per-year logistic fits");
  data_flags(fit);
  common(fit);

  CLI::App* test = app.add_subcommand("test", "Serial-dynamic and correlation tests");
  data_flags(test);
  boot_flags(test);
  common(test);
  test->add_flag("--dump-replicates", cfg.dump_replicates, "Also write per-replicate CSVs");

  CLI::App* sim = app.add_subcommand("simulate", "Two-year simulation study");
  sim->add_option("--config", cfg.config, "Simulation config (key = value)")->required();
  boot_flags(sim);
  common(sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;
  }

  for (CLI::App* sub : {fit, test, sim})
    if (sub->parsed()) cfg.command = sub->get_name();
  for (CLI::App* sub : {test, sim}) {
    if (!sub->parsed()) continue;
    if (sub->count("--b")) cfg.B = b;
    if (sub->count("--seed")) cfg.seed = seed;
  }

  try {
    ldiag::parse_formats(formats, cfg);
    cfg.levels = ldiag::parse_levels(levels);
    ldiag::simd::KernelChoice choice;
    if (kernels == "auto") {
      choice = ldiag::simd::KernelChoice::Auto;
    } else if (kernels == "scalar") {
      choice = ldiag::simd::KernelChoice::Scalar;
    } else if (kernels == "avx2") {
      choice = ldiag::simd::KernelChoice::Avx2;
    } else {
      ldiag::fail(ldiag::ErrorCode::ConfigError, "--kernels: unknown choice '" + kernels + "'");
    }
    if (!ldiag::simd::select_kernels(choice))
      ldiag::fail(ldiag::ErrorCode::ConfigError, "--kernels " + kernels + " is not available on this machine");
  } catch (const ldiag::Error& e) {
    std::cerr << "error[" << ldiag::error_code_name(e.code()) << "]: " << e.what() << '\n';
    return ldiag::exit_code_for(e.category());
  }

  return ldiag::run_command(cfg, std::cout, std::cerr);
}

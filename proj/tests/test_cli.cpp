#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "ldiag/cli_commands.hpp"
#include "ldiag/panel.hpp"
#include "ldiag/report.hpp"
#include "support.hpp"

using namespace ldiag;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ldiag_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& args) {
  const std::string cmd = std::string(LDIAG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Every (year, x) cell holds one claim and one non-claim.
const char* kBalanced =
    "subject_id,year,z,x\n"
    "a,2020,0,0\nb,2020,1,0\nc,2020,0,1\nd,2020,1,1\n"
    "a,2021,1,0\nb,2021,0,0\nc,2021,1,1\nd,2021,0,1\n";

}  // namespace

TEST_CASE("fit on a balanced fixture gives zero coefficients and no flags") {
  const fs::path dir = scratch("balanced");
  write_text(dir / "panel.csv", kBalanced);
  REQUIRE(run("fit --input " + (dir / "panel.csv").string() + " --out " + (dir / "out").string()) == 0);
  const auto fits = nlohmann::json::parse(read_text(dir / "out" / "fits.json"));
  REQUIRE(fits.size() == 2);
  CHECK(fits[0]["year"] == 2020);
  for (const auto& year : fits)
    for (const auto& c : year["coefficients"]) {
      CHECK(std::abs(c["estimate"].get<double>()) < 1e-10);
      CHECK(c["significant"] == false);
    }
  CHECK(fits[0]["coefficients"][0]["name"] == "Intercept");
  CHECK(read_text(dir / "out" / "summary.csv").rfind("year,n_t,claim_proportion\n", 0) == 0);
}

TEST_CASE("exit codes by error category") {
  const fs::path dir = scratch("codes");
  write_text(dir / "bad.csv", "subject_id,year,z,x\na,2020,3,0\nb,2021,0,1\n");
  CHECK(run("fit --input " + (dir / "bad.csv").string() + " --out " + dir.string()) == 2);

  write_text(dir / "sep.csv",
             "subject_id,year,z,x\n"
             "a,2020,0,-2\nb,2020,0,-1\nc,2020,1,1\nd,2020,1,2\n"
             "a,2021,0,-2\nb,2021,1,-1\nc,2021,0,1\nd,2021,1,2\n");
  CHECK(run("fit --input " + (dir / "sep.csv").string() + " --out " + dir.string()) == 3);

  CHECK(run("fit --input " + (dir / "missing.csv").string()) == 4);
  CHECK(run("fit --input " + (dir / "sep.csv").string() + " --levels 0,2") == 4);
  CHECK(run("fit --no-such-flag") == 4);
  CHECK(run("--help") == 0);
  CHECK(exit_code_for(ErrorCategory::Input) == 2);
  CHECK(exit_code_for(ErrorCategory::Numerical) == 3);
  CHECK(exit_code_for(ErrorCategory::Config) == 4);
}

TEST_CASE("significance uses a strict threshold") {
  CHECK_FALSE(is_significant(1.959964, 1.0));
  CHECK(is_significant(1.9599641, 1.0));
  CHECK(is_significant(-3.0, 1.0));
  CHECK_FALSE(is_significant(0.0, 0.5));
}

TEST_CASE("p-value formatting") {
  CHECK(format_p4(0.0083) == "0.0083");
  CHECK(format_p4(1.368003e-5) == "1.368e-05");
  CHECK(format_p4(0.0) == "<1e-300");
}

TEST_CASE("level and format parsing") {
  CHECK(parse_levels("0.01,0.05,0.10") == std::vector<double>{0.01, 0.05, 0.10});
  CHECK_THROWS_AS(parse_levels("0.5,1"), Error);
  CHECK_THROWS_AS(parse_levels(""), Error);
  RunConfig cfg;
  parse_formats("csv", cfg);
  CHECK(cfg.csv);
  CHECK_FALSE(cfg.json);
  CHECK_THROWS_AS(parse_formats("xml", cfg), Error);
}

TEST_CASE("test output is identical across worker counts") {
  const fs::path dir = scratch("workers");
  const PanelDataset ds = testing::random_panel({3, 150, 2, 0.1, 0.6, 77});
  {
    std::ofstream out(dir / "panel.csv", std::ios::binary);
    write_panel_csv(out, ds);
  }
  const std::string base = "test --input " + (dir / "panel.csv").string() + " --b 40 --seed 3 --dump-replicates";
  REQUIRE(run(base + " --workers 1 --out " + (dir / "w1").string()) == 0);
  REQUIRE(run(base + " --workers 4 --out " + (dir / "w4").string()) == 0);
  REQUIRE(run(base + " --workers 1 --kernels scalar --out " + (dir / "scalar").string()) == 0);
  for (const char* f : {"report.json", "fits.json", "serial_pairwise.csv", "corr_pairwise.csv", "correlations.csv",
                        "fits.csv", "replicates_gamma.csv", "replicates_rho.csv"}) {
    INFO(f);
    const std::string a = read_text(dir / "w1" / f);
    CHECK(!a.empty());
    CHECK(a == read_text(dir / "w4" / f));
  }
  // Kernel variants agree to rounding, not bit for bit.
  const auto ja = nlohmann::json::parse(read_text(dir / "w1" / "report.json"));
  const auto js = nlohmann::json::parse(read_text(dir / "scalar" / "report.json"));
  CHECK(ja["serial_aggregate"]["p_value"].get<double>() ==
        Catch::Approx(js["serial_aggregate"]["p_value"].get<double>()).epsilon(1e-6));
}

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "aesprice/cli.hpp"
#include "aesprice/experiments.hpp"

using namespace aesprice;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aesprice");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

double price_in(const std::string& text) {
  std::smatch m;
  const std::regex re("price=([0-9.eE+-]+)");
  if (!std::regex_search(text, m, re)) return -1.0;
  return std::stod(m[1]);
}

std::string strip_timing(const std::string& text) {
  return std::regex_replace(text, std::regex("time=[^ \n]+"), "time=*");
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream in(file);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST(CliPrice, BermudanDeskRun) {
  const CliRun r = cli({"price", "--model", "heston", "--preset", "feller-violating", "--scheme", "aes", "--steps", "20",
                     "--dates", "20", "--paths", "100000", "--spot", "90", "--runs", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(price_in(r.out), 9.97, 0.05) << r.out;
  EXPECT_NE(r.out.find("std_error="), std::string::npos);
  EXPECT_NE(r.out.find("time="), std::string::npos);
}

TEST(CliPrice, MissingStrikeIsUsageError) {
  const CliRun r = cli({"price", "--steps", "4", "--spot", "9", "--v0", "0.1"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--strike"), std::string::npos) << r.err;
}

TEST(CliPrice, MissingStepsIsUsageError) {
  const CliRun r = cli({"price", "--preset", "feller-holding"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--steps"), std::string::npos);
}

TEST(CliPrice, InlineHestonFlags) {
  const CliRun r = cli({"price", "--spot", "10", "--strike", "10", "--maturity", "0.25", "--rate", "0.1", "--v0",
                     "0.0625", "--kappa", "5", "--nu-bar", "0.16", "--gamma", "0.9", "--rho", "0.1", "--steps", "12",
                     "--paths", "20000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(price_in(r.out), 0.519, 0.03);
}

TEST(CliPrice, SameSeedSameOutput) {
  const std::vector<std::string> args = {"price", "--preset", "feller-holding", "--steps", "6", "--paths", "5000",
                                         "--runs", "2", "--seed", "42"};
  const CliRun a = cli(args), b = cli(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(strip_timing(a.out), strip_timing(b.out));
  auto other = args;
  other.back() = "43";
  EXPECT_NE(price_in(cli(other).out), price_in(a.out));
}

TEST(CliPrice, JsonOutputAndOutDirectory) {
  const fs::path dir = fresh_dir("aesprice_cli_price");
  const CliRun r = cli({"price", "--preset", "double-heston-zhang", "--steps", "4", "--paths", "2000", "--json",
                     "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const ExperimentReport report = report_from_json(r.out);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_EQ(report.rows[0].n_steps, 4u);
  EXPECT_TRUE(fs::exists(dir / "price.csv"));
  EXPECT_TRUE(fs::exists(dir / "price.json"));
  fs::remove_all(dir);
}

TEST(CliPrice, ScaleDividesPaths) {
  const CliRun r = cli({"price", "--preset", "feller-holding", "--steps", "3", "--paths", "10000", "--scale", "10"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("N=1000 "), std::string::npos) << r.out;
}

TEST(CliPrice, ConfigFileWithFlagOverride) {
  const fs::path dir = fresh_dir("aesprice_cli_config");
  fs::create_directories(dir);
  const fs::path config = dir / "exp.json";
  std::ofstream(config) << R"({"name": "cfg", "preset": "feller-violating", "n_paths": 3000, "n_steps": 10,
                               "schedule": {"kind": "bermudan", "dates": 5}, "runs": 1, "cases": [90, 100]})";
  const CliRun base = cli({"price", "--config", config.string()});
  ASSERT_EQ(base.code, 0) << base.err;
  EXPECT_NE(base.out.find("cfg  S0=90"), std::string::npos) << base.out;
  EXPECT_NE(base.out.find("cfg  S0=100"), std::string::npos);
  const CliRun over = cli({"price", "--config", config.string(), "--spot", "110", "--paths", "1000"});
  ASSERT_EQ(over.code, 0);
  EXPECT_NE(over.out.find("S0=110  aes  M=10  N=1000"), std::string::npos) << over.out;
  EXPECT_EQ(over.out.find("S0=90"), std::string::npos);
  fs::remove_all(dir);
}

TEST(CliPrice, BadFlagsAreRejected) {
  EXPECT_EQ(cli({"price", "--preset", "nope", "--steps", "3"}).code, kExitUsage);
  EXPECT_EQ(cli({"price", "--preset", "feller-holding", "--steps", "3", "--dates", "3", "--american"}).code, kExitUsage);
  EXPECT_EQ(cli({"price", "--preset", "double-heston-zhang", "--steps", "3", "--v0", "0.1"}).code, kExitUsage);
  EXPECT_EQ(cli({"price", "--model", "double-heston", "--preset", "feller-holding", "--steps", "3"}).code,
            kExitUsage);
  EXPECT_NE(cli({"price", "--preset", "feller-holding", "--steps", "5", "--dates", "3"}).code, kExitOk);
  EXPECT_NE(cli({"price", "--unknown-flag"}).code, kExitOk);
  EXPECT_NE(cli({}).code, kExitOk);
  EXPECT_NE(cli({"price", "bench"}).code, kExitOk);
}

TEST(CliHelp, EverySubcommandDocumentsFlags) {
  const std::map<std::string, std::vector<std::string>> flags = {
      {"price", {"--config", "--model", "--preset", "--scheme", "--steps", "--dates", "--paths", "--spot", "--strike",
                 "--runs", "--seed", "--scale", "--out", "--json"}},
      {"bench", {"--steps", "--paths", "--seed", "--scale", "--out"}},
      {"tables", {"--id", "--seed", "--scale", "--out", "--format", "--catalog"}},
      {"paths", {"--steps", "--paths", "--seed", "--scale", "--out"}},
  };
  for (const auto& [cmd, names] : flags) {
    const CliRun r = cli({cmd, "--help"});
    EXPECT_EQ(r.code, 0);
    for (const auto& name : names) EXPECT_NE(r.out.find(name), std::string::npos) << cmd << " " << name;
    EXPECT_NE(r.out.find("[1]"), std::string::npos) << cmd << ": seed default shown";
  }
  EXPECT_NE(cli({"tables", "--help"}).out.find("--scale FLOAT:POSITIVE [10]"), std::string::npos);
}

TEST(CliTables, TableOneDeskScale) {
  const fs::path dir = fresh_dir("aesprice_cli_table1");
  const CliRun r = cli({"tables", "--id", "1", "--scale", "10", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = read_lines(dir / "table1_aes.csv");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], kCsvHeader);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields;
    std::stringstream ss(lines[i]);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    ASSERT_EQ(fields.size(), 12u);
    EXPECT_FALSE(fields[9].empty()) << lines[i];
    EXPECT_EQ(fields[4], "100000");
    EXPECT_EQ(fields[5], "10");
  }
  EXPECT_EQ(read_lines(dir / "table1_euler.csv").size(), 4u);
  EXPECT_TRUE(fs::exists(dir / "table1.json"));
  fs::remove_all(dir);
}

TEST(CliTables, BiweeklyLayoutOneFilePerSpot) {
  const fs::path dir = fresh_dir("aesprice_cli_fig2");
  const CliRun r = cli({"tables", "--id", "fig2", "--scale", "1000", "--runs", "1", "--format", "csv", "--out",
                     dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* spot : {"S90", "S100", "S110"}) {
    const auto lines = read_lines(dir / (std::string("fig2_") + spot + ".csv"));
    ASSERT_GT(lines.size(), 1u) << spot;
    std::set<std::string> maturities;
    std::set<std::string> experiments;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      std::stringstream ss(lines[i]);
      std::string exp, label;
      std::getline(ss, exp, ',');
      std::getline(ss, label, ',');
      experiments.insert(exp);
      maturities.insert(label);
    }
    EXPECT_EQ(maturities.size(), 13u) << spot;
    EXPECT_EQ(experiments.size(), 3u) << spot;  // reference, aes, euler
  }
  EXPECT_FALSE(fs::exists(dir / "fig2.json"));
  fs::remove_all(dir);
}

TEST(CliTables, UnknownIdListsValidIds) {
  const CliRun r = cli({"tables", "--id", "7"});
  EXPECT_EQ(r.code, kExitUsage);
  for (const char* id : {"1", "6", "fig1", "fig3"}) EXPECT_NE(r.err.find(id), std::string::npos);
}

TEST(CliBench, ReportsRatios) {
  const CliRun r = cli({"bench", "--preset", "feller-violating", "--steps", "10", "--paths", "5000", "--spot", "90"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("euler(20)/aes(10)"), std::string::npos) << r.out;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex("memory_ratio=([0-9.]+)")));
  EXPECT_NEAR(std::stod(m[1]), 21.0 / 11.0, 1e-4);
}

TEST(CliPaths, StdoutAndDirectory) {
  const CliRun r = cli({"paths", "--preset", "double-heston-zhang", "--steps", "3", "--paths", "2", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("path,step,asset,var1,var2\n0,0,61.9,0.2,0.49\n", 0), 0u) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1 + 2 * 4);
  EXPECT_EQ(cli({"paths", "--preset", "double-heston-zhang", "--steps", "3", "--paths", "2", "--seed", "5"}).out, r.out);

  const fs::path dir = fresh_dir("aesprice_cli_paths");
  const CliRun f = cli({"paths", "--preset", "feller-holding", "--steps", "2", "--paths", "100", "--scale", "10", "--out",
                     dir.string()});
  ASSERT_EQ(f.code, 0);
  EXPECT_EQ(read_lines(dir / "paths.csv").size(), 1u + 10 * 3);
  fs::remove_all(dir);
}

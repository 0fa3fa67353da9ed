#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "aesprice/lsm.hpp"
#include "aesprice/models.hpp"
#include "aesprice/simulation.hpp"

namespace aesprice {

/// Configuration problem in an experiment or suite; the message names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// What varies across the cases of one experiment.
enum class CaseAxis {
  Spot,    // S0 per case
  Strike,  // K per case
  Dates,   // number of exercise dates per case; maturity = dates / dates_per_year
};

struct ScheduleSpec {
  enum class Kind { American, Bermudan, European };
  Kind kind = Kind::American;
  /// Bermudan date count; 0 means "take it from the case value" (Dates axis).
  std::size_t dates = 0;
  /// Map dates to the nearest grid index instead of requiring divisibility.
  bool nearest = false;
};

struct ReferenceSet {
  std::string name;
  std::string source;  // "paper" or "generated"
  std::vector<double> prices;
};

struct ExperimentSpec {
  std::string name;
  std::string group;  // optional output grouping (one CSV per group)
  ModelParams model;
  double strike = 0.0;
  double maturity = 0.0;
  Scheme scheme = Scheme::Aes;
  std::size_t n_paths = 0;
  /// Fixed step count; ignored when steps_per_date > 0.
  std::size_t n_steps = 0;
  /// Dates axis only: steps = dates * steps_per_date.
  std::size_t steps_per_date = 0;
  /// Dates axis only: maturity = dates / dates_per_year.
  double dates_per_year = 0.0;
  ScheduleSpec schedule;
  CaseAxis axis = CaseAxis::Spot;
  std::vector<double> cases;
  std::size_t runs = 20;
  std::uint64_t base_seed = 1;
  bool variance_cross_term = true;
  /// Keep only t = 0 and the exercise dates in memory (long reference grids).
  bool store_exercise_dates_only = false;
  /// Name of a suite-level reference set (resolved by run_suite).
  std::string reference_name;
  std::optional<ReferenceSet> reference;
  /// Values published for this scheme/configuration, for side-by-side reporting.
  std::vector<double> paper_values;
};

/// Violations of ExperimentSpec invariants, each prefixed with the experiment name.
std::vector<std::string> check(const ExperimentSpec& spec);

/// Fully resolved inputs of one case.
struct CaseSetup {
  std::string label;
  ModelParams model;
  PutPayoff payoff;
  TimeGrid grid;
  ExerciseSchedule schedule;
};
CaseSetup resolve_case(const ExperimentSpec& spec, std::size_t case_index);

struct CaseResult {
  std::string experiment;
  std::string group;
  std::string case_label;
  double case_value = 0.0;
  Scheme scheme = Scheme::Aes;
  std::size_t n_steps = 0;
  std::size_t n_paths = 0;
  std::size_t runs = 0;
  double mean_price = 0.0;
  double run_std = 0.0;
  double mean_std_error = 0.0;  // average within-run LSM standard error
  std::optional<double> ref_price;
  std::optional<double> rel_error;
  std::string ref_source;
  std::optional<double> paper_value;
  double elapsed_s = 0.0;  // mean per run, simulation + pricing
  std::size_t memory_bytes = 0;
  std::vector<std::size_t> exercise_indices;
  std::vector<double> run_prices;

  friend bool operator==(const CaseResult&, const CaseResult&) = default;
};

struct ExperimentReport {
  std::string id;
  std::vector<CaseResult> rows;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Runs shipped at scale > 1 use at most this many runs.
inline constexpr std::size_t kDeskRuns = 10;

struct RunOptions {
  /// Divides n_paths; values > 1 also cap runs at kDeskRuns.
  double scale = 1.0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::size_t workers = 0;
  std::ostream* log = nullptr;
};

/// Applies scale, seed and runs overrides.
ExperimentSpec scaled(ExperimentSpec spec, const RunOptions& options);

/// Simulates and prices every case `runs` times with seeds base_seed + run.
ExperimentReport run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

struct GeneratedReference {
  ReferenceSet reference;
  std::vector<CaseResult> rows;
};

/// High-resolution Euler run whose mean prices become a reference set.
/// Throws ConfigError unless the spec uses the Euler scheme.
GeneratedReference generate_reference_prices(const ExperimentSpec& spec, const RunOptions& options = {});

using ReferenceDefinition = std::variant<ReferenceSet, ExperimentSpec>;

/// A catalog entry: named reference sets plus the experiments that use them.
struct ExperimentSuite {
  std::string id;
  std::string description;
  std::map<std::string, ReferenceDefinition> references;
  std::vector<ExperimentSpec> experiments;
};

/// Resolves references (generating them once each) and runs every experiment.
/// Generated reference rows come first, then experiments in file order.
ExperimentReport run_suite(const ExperimentSuite& suite, const RunOptions& options = {});

// ---- configuration (JSON) ----

ExperimentSpec parse_experiment(const std::string& json_text);
ExperimentSuite parse_suite(const std::string& json_text);
ExperimentSuite load_suite(const std::string& path);

/// Table ids accepted by catalog_path: 1..6, fig1, fig2, fig3.
std::vector<std::string> catalog_ids();
/// Path of the shipped config for `id` under `catalog_dir`; throws ConfigError for unknown ids.
std::string catalog_path(const std::string& id, const std::string& catalog_dir = AESPRICE_CATALOG_DIR);

// ---- reports ----

enum class ReportFormat { Csv, Json };

inline constexpr const char* kCsvHeader =
    "experiment,case,scheme,n_steps,n_paths,runs,mean_price,run_std,ref_price,rel_error,elapsed_s,memory_bytes";

void write_csv(const ExperimentReport& report, std::ostream& out);
std::string to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& json_text);

/// Writes the report to `path`; throws std::runtime_error naming the path on I/O failure.
void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path);

/// Rows with the given group (all rows when group is empty).
ExperimentReport filter_group(const ExperimentReport& report, const std::string& group);
std::vector<std::string> groups_of(const ExperimentReport& report);

}  // namespace aesprice

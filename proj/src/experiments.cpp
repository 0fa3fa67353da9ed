#include "aesprice/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace aesprice {

namespace {

std::string format_case(const char* prefix, double value) {
  std::ostringstream os;
  os << prefix << value;
  return os.str();
}

bool is_positive_integer(double x) { return x >= 1.0 && std::floor(x) == x; }

std::vector<std::string> prefixed(const std::string& prefix, const std::vector<std::string>& errors) {
  std::vector<std::string> out;
  out.reserve(errors.size());
  for (const auto& e : errors) out.push_back(prefix + e);
  return out;
}

std::string join_lines(const std::vector<std::string>& errors) {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += '\n';
    out += e;
  }
  return out;
}

}  // namespace

std::vector<std::string> check(const ExperimentSpec& spec) {
  const std::string where = "experiment '" + spec.name + "': ";
  std::vector<std::string> errors;
  if (spec.name.empty()) errors.push_back(where + "name must not be empty");
  if (spec.runs < 1) errors.push_back(where + "runs must be at least 1");
  if (spec.n_paths < 1) errors.push_back(where + "n_paths must be at least 1");
  if (spec.cases.empty()) errors.push_back(where + "cases must not be empty");

  const auto model_errors = std::visit([](const auto& p) { return check(p); }, spec.model);
  for (const auto& e : prefixed(where, model_errors)) errors.push_back(e);

  if (spec.axis != CaseAxis::Strike && !(spec.strike > 0.0)) errors.push_back(where + "strike must be positive");
  for (double c : spec.cases) {
    if (!(c > 0.0) || !std::isfinite(c)) errors.push_back(where + "case values must be positive");
  }

  if (spec.axis == CaseAxis::Dates) {
    if (!(spec.dates_per_year > 0.0)) errors.push_back(where + "dates_per_year must be positive on the dates axis");
    for (double c : spec.cases) {
      if (!is_positive_integer(c)) errors.push_back(where + "date counts must be positive integers");
    }
    if (spec.steps_per_date == 0 && spec.n_steps == 0) {
      errors.push_back(where + "either steps_per_date or n_steps must be set");
    }
  } else {
    if (!(spec.maturity > 0.0)) errors.push_back(where + "maturity must be positive");
    if (spec.n_steps == 0 && spec.steps_per_date == 0) errors.push_back(where + "n_steps must be at least 1");
    if (spec.steps_per_date > 0 && spec.schedule.kind != ScheduleSpec::Kind::Bermudan) {
      errors.push_back(where + "steps_per_date needs a bermudan schedule");
    }
    if (spec.schedule.kind == ScheduleSpec::Kind::Bermudan && spec.schedule.dates == 0) {
      errors.push_back(where + "bermudan schedule needs a date count");
    }
  }

  if (spec.reference && spec.reference->prices.size() != spec.cases.size()) {
    errors.push_back(where + "reference '" + spec.reference->name + "' has " +
                     std::to_string(spec.reference->prices.size()) + " prices for " +
                     std::to_string(spec.cases.size()) + " cases");
  }
  if (!spec.paper_values.empty() && spec.paper_values.size() != spec.cases.size()) {
    errors.push_back(where + "paper_values length does not match cases");
  }
  return errors;
}

CaseSetup resolve_case(const ExperimentSpec& spec, std::size_t case_index) {
  const double value = spec.cases.at(case_index);
  ModelParams model = spec.model;
  double strike = spec.strike;
  double maturity = spec.maturity;
  std::size_t steps = spec.n_steps;
  std::size_t dates = spec.schedule.dates;
  std::string label;

  switch (spec.axis) {
    case CaseAxis::Spot:
      model = with_spot(model, value);
      label = format_case("S0=", value);
      break;
    case CaseAxis::Strike:
      strike = value;
      label = format_case("K=", value);
      break;
    case CaseAxis::Dates: {
      const auto n = static_cast<std::size_t>(value);
      maturity = static_cast<double>(n) / spec.dates_per_year;
      if (dates == 0) dates = n;
      label = format_case("dates=", value);
      break;
    }
  }
  if (spec.steps_per_date > 0) steps = dates * spec.steps_per_date;

  TimeGrid grid(maturity, steps);
  auto schedule = [&] {
    switch (spec.schedule.kind) {
      case ScheduleSpec::Kind::American:
        return ExerciseSchedule::every_step(grid);
      case ScheduleSpec::Kind::European:
        return ExerciseSchedule::maturity_only(grid);
      case ScheduleSpec::Kind::Bermudan:
        break;
    }
    return spec.schedule.nearest ? ExerciseSchedule::nearest(grid, dates)
                                 : ExerciseSchedule::equally_spaced(grid, dates);
  }();
  return CaseSetup{label, model, PutPayoff{strike}, grid, std::move(schedule)};
}

ExperimentSpec scaled(ExperimentSpec spec, const RunOptions& options) {
  if (!(options.scale >= 1.0)) throw ConfigError("scale must be at least 1");
  if (options.scale > 1.0) {
    spec.n_paths = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.n_paths / options.scale)));
    spec.runs = std::min(spec.runs, kDeskRuns);
  }
  if (options.seed) spec.base_seed = *options.seed;
  if (options.runs) spec.runs = *options.runs;
  return spec;
}

ExperimentReport run_experiment(const ExperimentSpec& original, const RunOptions& options) {
  const ExperimentSpec spec = scaled(original, options);
  if (auto errors = check(spec); !errors.empty()) throw ConfigError(join_lines(errors));

  ExperimentReport report;
  report.id = spec.name;
  for (std::size_t c = 0; c < spec.cases.size(); ++c) {
    CaseResult row;
    std::optional<CaseSetup> setup;
    try {
      setup = resolve_case(spec, c);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("experiment '" + spec.name + "' case " + std::to_string(c) + ": " + e.what());
    }
    const double r = risk_free_rate(setup->model);

    std::vector<double> prices;
    double std_error_sum = 0.0;
    double elapsed_sum = 0.0;
    std::size_t memory = 0;
    std::vector<std::size_t> stored;
    if (spec.store_exercise_dates_only) {
      stored.push_back(0);
      for (std::size_t k : setup->schedule.indices()) stored.push_back(k);
    }
    for (std::size_t run = 0; run < spec.runs; ++run) {
      const auto start = std::chrono::steady_clock::now();
      const PathSet paths = simulate(setup->model, spec.scheme, setup->grid, spec.n_paths, spec.base_seed + run,
                                     options.workers, stored);
      LsmOptions lsm_options;
      lsm_options.basis = BasisSpec{.kind = kind_of(setup->model), .variance_cross_term = spec.variance_cross_term};
      const LsmResult result = lsm_price(paths, setup->payoff, setup->schedule, r, lsm_options);
      elapsed_sum += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      prices.push_back(result.price);
      std_error_sum += result.std_error;
      memory = result.memory_bytes;
    }

    const double n_runs = static_cast<double>(spec.runs);
    const double mean = std::accumulate(prices.begin(), prices.end(), 0.0) / n_runs;
    double sq = 0.0;
    for (double p : prices) sq += (p - mean) * (p - mean);

    row.experiment = spec.name;
    row.group = spec.group;
    row.case_label = setup->label;
    row.case_value = spec.cases[c];
    row.scheme = spec.scheme;
    row.n_steps = setup->grid.steps();
    row.n_paths = spec.n_paths;
    row.runs = spec.runs;
    row.mean_price = mean;
    row.run_std = spec.runs > 1 ? std::sqrt(sq / (n_runs - 1.0)) : 0.0;
    row.mean_std_error = std_error_sum / n_runs;
    row.elapsed_s = elapsed_sum / n_runs;
    row.memory_bytes = memory;
    row.exercise_indices = setup->schedule.indices();
    row.run_prices = std::move(prices);
    if (spec.reference) {
      const double ref = spec.reference->prices[c];
      row.ref_price = ref;
      row.rel_error = std::abs(mean - ref) / ref;
      row.ref_source = spec.reference->source + ":" + spec.reference->name;
    }
    if (!spec.paper_values.empty()) row.paper_value = spec.paper_values[c];

    if (options.log != nullptr) {
      *options.log << "[" << spec.name << "] " << row.case_label << " " << to_string(spec.scheme)
                   << " M=" << row.n_steps << " N=" << row.n_paths << " runs=" << row.runs << " mean=" << row.mean_price
                   << " run_std=" << row.run_std << " time=" << row.elapsed_s << "s\n";
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

GeneratedReference generate_reference_prices(const ExperimentSpec& spec, const RunOptions& options) {
  if (spec.scheme != Scheme::Euler) {
    throw ConfigError("reference '" + spec.name + "': generated references must use the euler scheme");
  }
  ExperimentReport report = run_experiment(spec, options);
  GeneratedReference out;
  out.reference.name = spec.name;
  out.reference.source = "generated";
  for (const auto& row : report.rows) out.reference.prices.push_back(row.mean_price);
  out.rows = std::move(report.rows);
  return out;
}

ExperimentReport run_suite(const ExperimentSuite& suite, const RunOptions& options) {
  ExperimentReport report;
  report.id = suite.id;

  std::map<std::string, ReferenceSet> resolved;
  for (const auto& [name, definition] : suite.references) {
    if (const auto* fixed = std::get_if<ReferenceSet>(&definition)) {
      ReferenceSet set = *fixed;
      set.name = name;
      resolved.emplace(name, std::move(set));
      continue;
    }
    ExperimentSpec ref_spec = std::get<ExperimentSpec>(definition);
    ref_spec.name = name;
    GeneratedReference generated = generate_reference_prices(ref_spec, options);
    for (auto& row : generated.rows) report.rows.push_back(std::move(row));
    resolved.emplace(name, std::move(generated.reference));
  }

  for (ExperimentSpec spec : suite.experiments) {
    if (!spec.reference_name.empty()) {
      const auto it = resolved.find(spec.reference_name);
      if (it == resolved.end()) {
        throw ConfigError("experiment '" + spec.name + "': unknown reference '" + spec.reference_name + "'");
      }
      spec.reference = it->second;
    }
    ExperimentReport part = run_experiment(spec, options);
    for (auto& row : part.rows) report.rows.push_back(std::move(row));
  }
  return report;
}

ExperimentReport filter_group(const ExperimentReport& report, const std::string& group) {
  ExperimentReport out;
  out.id = group.empty() ? report.id : report.id + "_" + group;
  for (const auto& row : report.rows) {
    if (group.empty() || row.group == group) out.rows.push_back(row);
  }
  return out;
}

std::vector<std::string> groups_of(const ExperimentReport& report) {
  std::vector<std::string> out;
  for (const auto& row : report.rows) {
    if (std::find(out.begin(), out.end(), row.group) == out.end()) out.push_back(row.group);
  }
  return out;
}

}  // namespace aesprice

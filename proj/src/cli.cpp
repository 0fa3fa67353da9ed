#include "aesprice/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aesprice/experiments.hpp"

namespace aesprice {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags shared by price, bench and paths.
struct ModelFlags {
  std::string config;
  std::string model = "heston";
  std::string preset;
  std::string scheme = "aes";
  std::size_t steps = 0;
  std::size_t dates = 0;
  bool american = false;
  bool european = false;
  std::size_t paths = 0;
  std::vector<double> spots;
  double strike = 0, maturity = 0, rate = 0;
  double v0 = 0, kappa = 0, nu_bar = 0, gamma = 0, rho = 0;
  std::size_t runs = 1;

  // Options whose presence matters.
  std::map<std::string, CLI::Option*> opts;
  bool given(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

struct CommonFlags {
  std::uint64_t seed = 1;
  double scale = 1.0;
  std::string out;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App& cmd, CommonFlags& f, double default_scale, const std::string& out_help) {
  f.scale = default_scale;
  f.seed_opt = cmd.add_option("--seed", f.seed, "Base seed; run i uses seed + i")->capture_default_str();
  cmd.add_option("--scale", f.scale, "Divide path counts by this factor (>1 also caps runs at 10)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--out", f.out, out_help);
}

void add_model_flags(CLI::App& cmd, ModelFlags& f, std::size_t default_paths, bool with_schedule) {
  f.paths = default_paths;
  auto& o = f.opts;
  o["config"] = cmd.add_option("--config", f.config, "Experiment config file (JSON); other flags override it")
                    ->check(CLI::ExistingFile);
  o["model"] = cmd.add_option("--model", f.model, "Model: heston | double-heston")
                   ->capture_default_str()
                   ->check(CLI::IsMember({"heston", "double-heston"}));
  o["preset"] = cmd.add_option("--preset", f.preset, "Built-in parameter set: " + [] {
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    return names;
  }());
  o["scheme"] = cmd.add_option("--scheme", f.scheme, "Discretization: aes | euler")->capture_default_str();
  o["steps"] = cmd.add_option("--steps", f.steps, "Time steps M (required without --config)");
  o["paths"] = cmd.add_option("--paths", f.paths, "Monte Carlo paths N")->capture_default_str();
  o["spot"] = cmd.add_option("--spot", f.spots, "Initial asset price; repeat for several cases (default: preset)");
  o["strike"] = cmd.add_option("--strike", f.strike, "Put strike K (default: preset)");
  o["maturity"] = cmd.add_option("--maturity", f.maturity, "Maturity T in years (default: preset)");
  o["rate"] = cmd.add_option("--rate", f.rate, "Risk-free rate r (default: preset)");
  o["v0"] = cmd.add_option("--v0", f.v0, "Initial variance, heston only (default: preset)");
  o["kappa"] = cmd.add_option("--kappa", f.kappa, "Mean reversion speed, heston only (default: preset)");
  o["nu-bar"] = cmd.add_option("--nu-bar", f.nu_bar, "Long-run variance, heston only (default: preset)");
  o["gamma"] = cmd.add_option("--gamma", f.gamma, "Vol of vol, heston only (default: preset)");
  o["rho"] = cmd.add_option("--rho", f.rho, "Asset/variance correlation, heston only (default: preset)");
  if (with_schedule) {
    o["dates"] = cmd.add_option("--dates", f.dates, "Bermudan exercise dates (must divide --steps)");
    o["american"] = cmd.add_flag("--american", f.american, "Exercise at every step (default without --dates)");
    o["european"] = cmd.add_flag("--european", f.european, "Exercise at maturity only");
    o["runs"] = cmd.add_option("--runs", f.runs, "Independent runs (default: 1, or the config value)");
    o["no-cross-term"] = cmd.add_flag("--no-cross-term", "Drop the v1*v2 regressor (double-heston)");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ExperimentSpec spec_from_flags(const ModelFlags& f) {
  ExperimentSpec spec;
  bool have_model = false;
  if (f.given("config")) {
    try {
      spec = parse_experiment(read_file(f.config));
    } catch (const ConfigError& e) {
      throw ConfigError(f.config + ": " + e.what());
    }
    have_model = true;
  } else {
    spec.schedule.kind = ScheduleSpec::Kind::American;
    spec.runs = 1;
  }
  if (spec.name.empty()) spec.name = "price";

  if (f.given("preset")) {
    const auto preset = find_preset(f.preset);
    if (!preset) throw UsageError("unknown --preset '" + f.preset + "'");
    spec.model = preset->model;
    spec.strike = preset->strike;
    spec.maturity = preset->maturity;
    have_model = true;
  }
  if (f.given("model") && have_model && std::string(to_string(kind_of(spec.model))) != f.model) {
    throw UsageError("--model " + f.model + " does not match the " + std::string(to_string(kind_of(spec.model))) +
                     " parameters of the preset/config");
  }

  const char* heston_only[] = {"v0", "kappa", "nu-bar", "gamma", "rho"};
  if (!have_model) {
    if (f.model != "heston") throw UsageError("--model double-heston needs --preset or --config");
    for (const char* name : {"strike", "spot", "maturity", "rate", "v0", "kappa", "nu-bar", "gamma", "rho"}) {
      if (!f.given(name)) throw UsageError(std::string("missing --") + name + " (or give --preset/--config)");
    }
    spec.model = HestonParams{.s0 = f.spots.front()};
  }
  if (auto* h = std::get_if<HestonParams>(&spec.model)) {
    if (f.given("v0")) h->v0 = f.v0;
    if (f.given("kappa")) h->kappa = f.kappa;
    if (f.given("nu-bar")) h->nu_bar = f.nu_bar;
    if (f.given("gamma")) h->gamma = f.gamma;
    if (f.given("rho")) h->rho = f.rho;
    if (f.given("rate")) h->r = f.rate;
  } else {
    for (const char* name : heston_only) {
      if (f.given(name)) throw UsageError(std::string("--") + name + " applies to the heston model only");
    }
    if (f.given("rate")) std::get<DoubleHestonParams>(spec.model).r = f.rate;
  }

  if (f.given("strike")) spec.strike = f.strike;
  if (f.given("maturity")) spec.maturity = f.maturity;
  if (f.given("spot")) {
    spec.axis = CaseAxis::Spot;
    spec.cases = f.spots;
    spec.reference.reset();
    spec.paper_values.clear();
  } else if (spec.cases.empty() || !f.given("config")) {
    spec.axis = CaseAxis::Spot;
    spec.cases = {initial_spot(spec.model)};
  }
  if (spec.axis == CaseAxis::Strike && f.given("strike")) {
    spec.cases = {f.strike};
    spec.reference.reset();
    spec.paper_values.clear();
  }

  if (f.given("scheme")) spec.scheme = parse_scheme(f.scheme);
  if (f.given("steps")) {
    spec.n_steps = f.steps;
    spec.steps_per_date = 0;
  } else if (!f.given("config")) {
    throw UsageError("missing --steps");
  }
  if (f.given("paths") || spec.n_paths == 0) spec.n_paths = f.paths;
  if (f.given("runs")) spec.runs = f.runs;
  if (f.given("no-cross-term")) spec.variance_cross_term = false;

  const int schedule_flags = int(f.given("dates")) + int(f.american) + int(f.european);
  if (schedule_flags > 1) throw UsageError("--dates, --american and --european are mutually exclusive");
  if (f.given("dates")) {
    spec.schedule = ScheduleSpec{ScheduleSpec::Kind::Bermudan, f.dates, false};
  } else if (f.american) {
    spec.schedule = ScheduleSpec{};
  } else if (f.european) {
    spec.schedule = ScheduleSpec{ScheduleSpec::Kind::European, 0, false};
  }

  if (spec.strike <= 0.0 && spec.axis != CaseAxis::Strike) throw UsageError("missing --strike (or give --preset/--config)");
  return spec;
}

RunOptions run_options(const CommonFlags& c, std::ostream& err) {
  RunOptions options;
  options.scale = c.scale;
  if (c.seed_opt->count() > 0) options.seed = c.seed;
  options.log = &err;
  return options;
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

void print_rows(const ExperimentReport& report, std::ostream& out) {
  out << std::setprecision(6);
  for (const auto& row : report.rows) {
    out << row.experiment << "  " << row.case_label << "  " << to_string(row.scheme) << "  M=" << row.n_steps
        << "  N=" << row.n_paths << "  runs=" << row.runs << "  price=" << row.mean_price
        << "  std_error=" << row.mean_std_error << "  run_std=" << row.run_std;
    if (row.ref_price) out << "  ref=" << *row.ref_price << "  rel_error=" << *row.rel_error;
    out << "  time=" << row.elapsed_s << "s  memory=" << row.memory_bytes << "B\n";
  }
}

int cmd_price(const ModelFlags& f, const CommonFlags& c, bool json, std::ostream& out, std::ostream& err) {
  const ExperimentSpec spec = spec_from_flags(f);
  const ExperimentReport report = run_experiment(spec, run_options(c, err));
  if (json) {
    out << to_json(report);
  } else {
    print_rows(report, out);
  }
  if (!c.out.empty()) {
    const fs::path dir = ensure_dir(c.out);
    emit_report(report, ReportFormat::Csv, (dir / (spec.name + ".csv")).string());
    emit_report(report, ReportFormat::Json, (dir / (spec.name + ".json")).string());
  }
  return kExitOk;
}

// AES at M steps against Euler at 2M, with the same exercise times.
int cmd_bench(const ModelFlags& f, const CommonFlags& c, std::ostream& out, std::ostream& err) {
  ExperimentSpec aes = spec_from_flags(f);
  if (aes.n_steps == 0) throw UsageError("bench needs a fixed step count (--steps)");
  aes.name = "bench";
  aes.scheme = Scheme::Aes;
  if (aes.schedule.kind == ScheduleSpec::Kind::American) {
    aes.schedule = ScheduleSpec{ScheduleSpec::Kind::Bermudan, aes.n_steps, false};
  }
  ExperimentSpec euler = aes;
  euler.scheme = Scheme::Euler;
  euler.n_steps = 2 * aes.n_steps;

  const RunOptions options = run_options(c, err);
  ExperimentReport report;
  report.id = "bench";
  for (auto& row : run_experiment(aes, options).rows) report.rows.push_back(std::move(row));
  for (auto& row : run_experiment(euler, options).rows) report.rows.push_back(std::move(row));
  print_rows(report, out);

  const std::size_t n = report.rows.size() / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = report.rows[i];
    const auto& e = report.rows[i + n];
    out << a.case_label << "  euler(" << e.n_steps << ")/aes(" << a.n_steps
        << "): time_ratio=" << e.elapsed_s / a.elapsed_s
        << "  memory_ratio=" << static_cast<double>(e.memory_bytes) / static_cast<double>(a.memory_bytes)
        << "  price_rel_diff=" << std::abs(e.mean_price - a.mean_price) / a.mean_price << '\n';
  }
  if (!c.out.empty()) {
    const fs::path dir = ensure_dir(c.out);
    emit_report(report, ReportFormat::Csv, (dir / "bench.csv").string());
    emit_report(report, ReportFormat::Json, (dir / "bench.json").string());
  }
  return kExitOk;
}

int cmd_paths(const ModelFlags& f, const CommonFlags& c, std::ostream& out) {
  ExperimentSpec spec = spec_from_flags(f);
  RunOptions options;
  options.scale = c.scale;
  if (c.seed_opt->count() > 0) options.seed = c.seed;
  spec = scaled(spec, options);
  const CaseSetup setup = resolve_case(spec, 0);
  const PathSet paths = simulate(setup.model, spec.scheme, setup.grid, spec.n_paths, spec.base_seed);
  if (c.out.empty()) {
    write_paths_csv(paths, out);
    return kExitOk;
  }
  const fs::path file = ensure_dir(c.out) / "paths.csv";
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  write_paths_csv(paths, os);
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + file.string());
  out << file.string() << '\n';
  return kExitOk;
}

struct TablesFlags {
  std::string id;
  std::string catalog = AESPRICE_CATALOG_DIR;
  std::string format = "both";
  std::size_t runs = 0;
  CLI::Option* runs_opt = nullptr;
};

int cmd_tables(const TablesFlags& t, const CommonFlags& c, std::ostream& out, std::ostream& err) {
  std::string path;
  try {
    path = catalog_path(t.id, t.catalog);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const ExperimentSuite suite = load_suite(path);
  RunOptions options = run_options(c, err);
  if (t.runs_opt->count() > 0) options.runs = t.runs;
  err << "running " << suite.id << " at scale " << c.scale << '\n';
  const ExperimentReport report = run_suite(suite, options);

  const fs::path dir = ensure_dir(c.out.empty() ? "." : c.out);
  if (t.format != "json") {
    for (const auto& group : groups_of(report)) {
      const ExperimentReport part = filter_group(report, group);
      const fs::path file = dir / (part.id + ".csv");
      emit_report(part, ReportFormat::Csv, file.string());
      out << "wrote " << file.string() << " (" << part.rows.size() << " rows)\n";
    }
  }
  if (t.format != "csv") {
    const fs::path file = dir / (report.id + ".json");
    emit_report(report, ReportFormat::Json, file.string());
    out << "wrote " << file.string() << '\n';
  }
  print_rows(report, out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heston / double Heston American put pricing by least-squares Monte Carlo", "aesprice"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(34);

  ModelFlags price_flags, bench_flags, paths_flags;
  CommonFlags price_common, bench_common, paths_common, tables_common;
  bool price_json = false;
  TablesFlags tables_flags;

  auto* price = app.add_subcommand("price", "Price one American/Bermudan put");
  add_model_flags(*price, price_flags, 100000, true);
  price->add_flag("--json", price_json, "Print the report as JSON instead of text");
  add_common(*price, price_common, 1.0, "Directory for <name>.csv and <name>.json");

  auto* bench = app.add_subcommand("bench", "Compare AES at M steps with Euler at 2M steps");
  add_model_flags(*bench, bench_flags, 100000, true);
  add_common(*bench, bench_common, 1.0, "Directory for bench.csv and bench.json");

  auto* tables = app.add_subcommand("tables", "Reproduce a catalog table or figure data set");
  tables->add_option("--id", tables_flags.id, "Catalog id: 1..6, fig1, fig2, fig3")->required();
  tables->add_option("--catalog", tables_flags.catalog, "Directory holding the catalog configs")
      ->capture_default_str();
  tables->add_option("--format", tables_flags.format, "Report format: csv | json | both")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json", "both"}));
  tables_flags.runs_opt = tables->add_option("--runs", tables_flags.runs, "Override the run count of every experiment");
  add_common(*tables, tables_common, 10.0, "Report directory (default: current directory)");

  auto* paths = app.add_subcommand("paths", "Dump simulated paths as CSV");
  add_model_flags(*paths, paths_flags, 10, false);
  add_common(*paths, paths_common, 1.0, "Directory for paths.csv (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (price->parsed()) return cmd_price(price_flags, price_common, price_json, out, err);
    if (bench->parsed()) return cmd_bench(bench_flags, bench_common, out, err);
    if (tables->parsed()) return cmd_tables(tables_flags, tables_common, out, err);
    return cmd_paths(paths_flags, paths_common, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nrun with --help for the flag list\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace aesprice

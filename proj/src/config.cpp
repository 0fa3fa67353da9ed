#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "aesprice/experiments.hpp"
#include "json.hpp"

namespace aesprice {

using nlohmann::json;

namespace {

void require_known_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

void override_if(const json& j, const char* key, double& field) {
  if (const auto it = j.find(key); it != j.end()) field = it->get<double>();
}

void apply_factor(const json& j, VarianceFactor& f, const std::string& where) {
  require_known_keys(j, {"v0", "kappa", "nu_bar", "gamma"}, where);
  override_if(j, "v0", f.v0);
  override_if(j, "kappa", f.kappa);
  override_if(j, "nu_bar", f.nu_bar);
  override_if(j, "gamma", f.gamma);
}

ModelParams apply_model(const json& j, ModelParams base, const std::string& where) {
  if (auto* h = std::get_if<HestonParams>(&base)) {
    require_known_keys(j, {"type", "s0", "v0", "r", "kappa", "nu_bar", "gamma", "rho"}, where);
    override_if(j, "s0", h->s0);
    override_if(j, "v0", h->v0);
    override_if(j, "r", h->r);
    override_if(j, "kappa", h->kappa);
    override_if(j, "nu_bar", h->nu_bar);
    override_if(j, "gamma", h->gamma);
    override_if(j, "rho", h->rho);
    return base;
  }
  auto& d = std::get<DoubleHestonParams>(base);
  require_known_keys(j, {"type", "s0", "r", "factor1", "factor2", "rho_13", "rho_24"}, where);
  override_if(j, "s0", d.s0);
  override_if(j, "r", d.r);
  override_if(j, "rho_13", d.rho_13);
  override_if(j, "rho_24", d.rho_24);
  if (j.contains("factor1")) apply_factor(j.at("factor1"), d.factor1, where + ".factor1");
  if (j.contains("factor2")) apply_factor(j.at("factor2"), d.factor2, where + ".factor2");
  return base;
}

ScheduleSpec parse_schedule(const json& j, const std::string& where) {
  require_known_keys(j, {"kind", "dates", "mapping"}, where);
  ScheduleSpec s;
  const auto kind = get_or<std::string>(j, "kind", "american");
  if (kind == "american") {
    s.kind = ScheduleSpec::Kind::American;
  } else if (kind == "bermudan") {
    s.kind = ScheduleSpec::Kind::Bermudan;
  } else if (kind == "european") {
    s.kind = ScheduleSpec::Kind::European;
  } else {
    throw ConfigError(where + ": unknown schedule kind '" + kind + "'");
  }
  s.dates = get_or<std::size_t>(j, "dates", 0);
  const auto mapping = get_or<std::string>(j, "mapping", "exact");
  if (mapping != "exact" && mapping != "nearest") {
    throw ConfigError(where + ": mapping must be 'exact' or 'nearest'");
  }
  s.nearest = mapping == "nearest";
  return s;
}

CaseAxis parse_axis(const std::string& text, const std::string& where) {
  if (text == "spot") return CaseAxis::Spot;
  if (text == "strike") return CaseAxis::Strike;
  if (text == "dates") return CaseAxis::Dates;
  throw ConfigError(where + ": unknown axis '" + text + "'");
}

ReferenceSet parse_fixed_reference(const json& j, const std::string& name, const std::string& where) {
  require_known_keys(j, {"name", "source", "prices", "note"}, where);
  ReferenceSet set;
  set.name = name;
  set.source = get_or<std::string>(j, "source", "paper");
  set.prices = j.at("prices").get<std::vector<double>>();
  return set;
}

ExperimentSpec experiment_from_json(const json& j, const std::string& where) {
  require_known_keys(j,
                     {"name", "group", "preset", "model", "strike", "maturity", "scheme", "n_paths", "n_steps",
                      "steps_per_date", "dates_per_year", "schedule", "axis", "cases", "runs", "base_seed",
                      "variance_cross_term", "storage", "reference", "paper_values", "note"},
                     where);
  ExperimentSpec spec;
  spec.name = get_or<std::string>(j, "name", "");
  spec.group = get_or<std::string>(j, "group", "");

  std::optional<ModelParams> model;
  if (const auto it = j.find("preset"); it != j.end()) {
    const auto name = it->get<std::string>();
    const auto preset = find_preset(name);
    if (!preset) throw ConfigError(where + ": unknown preset '" + name + "'");
    model = preset->model;
    spec.strike = preset->strike;
    spec.maturity = preset->maturity;
  }
  if (const auto it = j.find("model"); it != j.end()) {
    if (!model) {
      const auto type = get_or<std::string>(*it, "type", "heston");
      if (type == "heston") {
        model = HestonParams{};
      } else if (type == "double-heston") {
        model = DoubleHestonParams{};
      } else {
        throw ConfigError(where + ".model: unknown type '" + type + "'");
      }
    }
    model = apply_model(*it, *model, where + ".model");
  }
  if (!model) throw ConfigError(where + ": needs a 'preset' or a 'model'");
  spec.model = *model;

  spec.strike = get_or<double>(j, "strike", spec.strike);
  spec.maturity = get_or<double>(j, "maturity", spec.maturity);
  spec.scheme = parse_scheme(get_or<std::string>(j, "scheme", "aes"));
  spec.n_paths = get_or<std::size_t>(j, "n_paths", 0);
  spec.n_steps = get_or<std::size_t>(j, "n_steps", 0);
  spec.steps_per_date = get_or<std::size_t>(j, "steps_per_date", 0);
  spec.dates_per_year = get_or<double>(j, "dates_per_year", 0.0);
  if (const auto it = j.find("schedule"); it != j.end()) spec.schedule = parse_schedule(*it, where + ".schedule");
  spec.axis = parse_axis(get_or<std::string>(j, "axis", "spot"), where);
  if (const auto it = j.find("cases"); it != j.end()) {
    spec.cases = it->get<std::vector<double>>();
  } else if (spec.axis == CaseAxis::Spot) {
    spec.cases = {initial_spot(spec.model)};
  } else if (spec.axis == CaseAxis::Strike) {
    spec.cases = {spec.strike};
  }
  spec.runs = get_or<std::size_t>(j, "runs", 20);
  spec.base_seed = get_or<std::uint64_t>(j, "base_seed", 1);
  spec.variance_cross_term = get_or<bool>(j, "variance_cross_term", true);
  const auto storage = get_or<std::string>(j, "storage", "full");
  if (storage != "full" && storage != "exercise-dates") {
    throw ConfigError(where + ": storage must be 'full' or 'exercise-dates'");
  }
  spec.store_exercise_dates_only = storage == "exercise-dates";
  if (const auto it = j.find("reference"); it != j.end()) {
    if (it->is_string()) {
      spec.reference_name = it->get<std::string>();
    } else {
      spec.reference = parse_fixed_reference(*it, get_or<std::string>(*it, "name", spec.name + "-reference"),
                                             where + ".reference");
    }
  }
  spec.paper_values = get_or<std::vector<double>>(j, "paper_values", {});
  return spec;
}

json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

// Shallow merge: keys in `overrides` win over `defaults`.
json merged(const json& defaults, const json& overrides) {
  json out = defaults;
  for (const auto& item : overrides.items()) out[item.key()] = item.value();
  return out;
}

}  // namespace

ExperimentSpec parse_experiment(const std::string& json_text) {
  try {
    return experiment_from_json(parse_text(json_text, "experiment"), "experiment");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
}

ExperimentSuite parse_suite(const std::string& json_text) {
  const json root = parse_text(json_text, "suite");
  try {
    require_known_keys(root, {"id", "description", "defaults", "references", "experiments"}, "suite");
    ExperimentSuite suite;
    suite.id = root.at("id").get<std::string>();
    suite.description = get_or<std::string>(root, "description", "");
    const json defaults = root.value("defaults", json::object());

    if (const auto it = root.find("references"); it != root.end()) {
      for (const auto& item : it->items()) {
        const std::string where = "suite '" + suite.id + "' reference '" + item.key() + "'";
        const json& def = item.value();
        const auto source = get_or<std::string>(def, "source", "paper");
        if (source == "generated") {
          require_known_keys(def, {"source", "experiment", "note"}, where);
          ExperimentSpec spec = experiment_from_json(merged(defaults, def.at("experiment")), where);
          spec.name = item.key();
          suite.references.emplace(item.key(), std::move(spec));
        } else {
          suite.references.emplace(item.key(), parse_fixed_reference(def, item.key(), where));
        }
      }
    }
    const json& experiments = root.at("experiments");
    for (std::size_t i = 0; i < experiments.size(); ++i) {
      const std::string where = "suite '" + suite.id + "' experiment " + std::to_string(i);
      suite.experiments.push_back(experiment_from_json(merged(defaults, experiments[i]), where));
    }
    return suite;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("suite: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("suite: ") + e.what());
  }
}

ExperimentSuite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_suite(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<std::string> catalog_ids() { return {"1", "2", "3", "4", "5", "6", "fig1", "fig2", "fig3"}; }

std::string catalog_path(const std::string& id, const std::string& catalog_dir) {
  const auto ids = catalog_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
    std::string valid;
    for (const auto& v : ids) valid += (valid.empty() ? "" : ", ") + v;
    throw ConfigError("unknown table id '" + id + "' (valid ids: " + valid + ")");
  }
  const std::string file = id.starts_with("fig") ? id + ".json" : "table" + id + ".json";
  return (std::filesystem::path(catalog_dir) / file).string();
}

}  // namespace aesprice

#include "aesprice/models.hpp"

#include <cmath>

namespace aesprice {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

void require_positive(std::vector<std::string>& errors, double value, const std::string& field) {
  if (!(value > 0.0) || !std::isfinite(value)) errors.push_back(field + " must be positive");
}

void require_correlation(std::vector<std::string>& errors, double value, const std::string& field) {
  if (!(value >= -1.0 && value <= 1.0)) errors.push_back(field + " must lie in [-1,1]");
}

void require_finite(std::vector<std::string>& errors, double value, const std::string& field) {
  if (!std::isfinite(value)) errors.push_back(field + " must be finite");
}

void check_factor(std::vector<std::string>& errors, const VarianceFactor& f, const std::string& suffix) {
  require_positive(errors, f.v0, "v0" + suffix);
  require_positive(errors, f.kappa, "kappa" + suffix);
  require_positive(errors, f.nu_bar, "nu_bar" + suffix);
  require_positive(errors, f.gamma, "gamma" + suffix);
}

}  // namespace

ModelKind kind_of(const ModelParams& params) {
  return std::holds_alternative<HestonParams>(params) ? ModelKind::Heston : ModelKind::DoubleHeston;
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Heston ? "heston" : "double-heston"; }

bool feller_holds(const HestonParams& p) { return 2.0 * p.kappa * p.nu_bar > p.gamma * p.gamma; }

bool feller_holds(const VarianceFactor& f) { return 2.0 * f.kappa * f.nu_bar > f.gamma * f.gamma; }

InvalidParameters::InvalidParameters(std::vector<std::string> errors)
    : std::invalid_argument("invalid parameters: " + join(errors)), errors_(std::move(errors)) {}

std::vector<std::string> check(const HestonParams& p) {
  std::vector<std::string> errors;
  require_positive(errors, p.s0, "s0");
  require_positive(errors, p.v0, "v0");
  require_finite(errors, p.r, "r");
  require_positive(errors, p.kappa, "kappa");
  require_positive(errors, p.nu_bar, "nu_bar");
  require_positive(errors, p.gamma, "gamma");
  require_correlation(errors, p.rho, "rho");
  return errors;
}

std::vector<std::string> check(const DoubleHestonParams& p) {
  std::vector<std::string> errors;
  require_positive(errors, p.s0, "s0");
  require_finite(errors, p.r, "r");
  check_factor(errors, p.factor1, "_1");
  check_factor(errors, p.factor2, "_2");
  require_correlation(errors, p.rho_13, "rho_13");
  require_correlation(errors, p.rho_24, "rho_24");
  return errors;
}

std::vector<std::string> check(const PutPayoff& payoff) {
  std::vector<std::string> errors;
  require_positive(errors, payoff.strike, "strike");
  return errors;
}

const HestonParams& validate(const HestonParams& params) {
  if (auto errors = check(params); !errors.empty()) throw InvalidParameters(std::move(errors));
  return params;
}

const DoubleHestonParams& validate(const DoubleHestonParams& params) {
  if (auto errors = check(params); !errors.empty()) throw InvalidParameters(std::move(errors));
  return params;
}

const ModelParams& validate(const ModelParams& params) {
  std::visit([](const auto& p) { validate(p); }, params);
  return params;
}

std::vector<std::string> feller_warnings(const ModelParams& params) {
  std::vector<std::string> out;
  if (const auto* h = std::get_if<HestonParams>(&params)) {
    if (!feller_holds(*h)) out.emplace_back("Feller condition 2*kappa*nu_bar > gamma^2 does not hold");
  } else {
    const auto& d = std::get<DoubleHestonParams>(params);
    if (!feller_holds(d.factor1)) out.emplace_back("Feller condition does not hold for variance factor 1");
    if (!feller_holds(d.factor2)) out.emplace_back("Feller condition does not hold for variance factor 2");
  }
  return out;
}

double initial_spot(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.s0; }, params);
}

double risk_free_rate(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.r; }, params);
}

ModelParams with_spot(ModelParams params, double s0) {
  std::visit([s0](auto& p) { p.s0 = s0; }, params);
  return params;
}

std::optional<Preset> find_preset(std::string_view name) {
  if (name == "feller-holding") {
    HestonParams p{.s0 = 10.0, .v0 = 0.0625, .r = 0.1, .kappa = 5.0, .nu_bar = 0.16, .gamma = 0.9, .rho = 0.1};
    return Preset{std::string(name), p, 10.0, 0.25};
  }
  if (name == "feller-violating") {
    HestonParams p{.s0 = 100.0, .v0 = 0.0348, .r = 0.04, .kappa = 1.15, .nu_bar = 0.0348, .gamma = 0.39, .rho = -0.64};
    return Preset{std::string(name), p, 100.0, 0.25};
  }
  if (name == "double-heston-zhang") {
    DoubleHestonParams p{
        .s0 = 61.9,
        .r = 0.03,
        .factor1 = {.v0 = 0.2, .kappa = 0.9, .nu_bar = 0.1, .gamma = 0.1},
        .factor2 = {.v0 = 0.49, .kappa = 1.2, .nu_bar = 0.15, .gamma = 0.2},
        .rho_13 = -0.5,
        .rho_24 = -0.5,
    };
    return Preset{std::string(name), p, 61.9, 0.25};
  }
  return std::nullopt;
}

std::vector<std::string> preset_names() { return {"feller-holding", "feller-violating", "double-heston-zhang"}; }

}  // namespace aesprice

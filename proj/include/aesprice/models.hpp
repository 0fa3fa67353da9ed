#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace aesprice {

/// Single-factor Heston parameters. Variance follows a CIR process
/// dv = kappa (nu_bar - v) dt + gamma sqrt(v) dW, correlated with the asset by rho.
struct HestonParams {
  double s0 = 0.0;
  double v0 = 0.0;
  double r = 0.0;
  double kappa = 0.0;
  double nu_bar = 0.0;
  double gamma = 0.0;
  double rho = 0.0;
};

/// One CIR variance factor of the double Heston model.
struct VarianceFactor {
  double v0 = 0.0;
  double kappa = 0.0;
  double nu_bar = 0.0;
  double gamma = 0.0;
};

/// Double Heston: two independent CIR factors, factor j correlated with its own
/// asset Brownian component (rho_13 for factor 1, rho_24 for factor 2).
struct DoubleHestonParams {
  double s0 = 0.0;
  double r = 0.0;
  VarianceFactor factor1;
  VarianceFactor factor2;
  double rho_13 = 0.0;
  double rho_24 = 0.0;
};

using ModelParams = std::variant<HestonParams, DoubleHestonParams>;

enum class ModelKind { Heston, DoubleHeston };

ModelKind kind_of(const ModelParams& params);
std::string_view to_string(ModelKind kind);

struct PutPayoff {
  double strike = 0.0;

  double operator()(double spot) const { return spot < strike ? strike - spot : 0.0; }
};

/// (K - s)^+.
inline double put_payoff(const PutPayoff& p, double s) { return p(s); }

/// Feller condition 2 kappa nu_bar > gamma^2 (strict).
bool feller_holds(const HestonParams& params);
bool feller_holds(const VarianceFactor& factor);

/// Raised by validate(); carries one message per violated invariant.
class InvalidParameters : public std::invalid_argument {
 public:
  explicit InvalidParameters(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Complete list of invariant violations; empty when the parameters are valid.
/// A failed Feller condition is not a violation.
std::vector<std::string> check(const HestonParams& params);
std::vector<std::string> check(const DoubleHestonParams& params);
std::vector<std::string> check(const PutPayoff& payoff);

/// Returns the argument unchanged or throws InvalidParameters listing every violation.
const HestonParams& validate(const HestonParams& params);
const DoubleHestonParams& validate(const DoubleHestonParams& params);
const ModelParams& validate(const ModelParams& params);

/// Human-readable Feller warnings for each factor that violates the condition.
std::vector<std::string> feller_warnings(const ModelParams& params);

double initial_spot(const ModelParams& params);
double risk_free_rate(const ModelParams& params);
ModelParams with_spot(ModelParams params, double s0);

/// Built-in parameter sets with their contract terms.
struct Preset {
  std::string name;
  ModelParams model;
  double strike;
  double maturity;
};

/// "feller-holding", "feller-violating" or "double-heston-zhang".
std::optional<Preset> find_preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace aesprice

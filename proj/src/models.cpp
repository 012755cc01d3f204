#include "kisim/models.hpp"

#include <cmath>
#include <limits>

#include "kisim/error.hpp"
#include "kisim/film_physics.hpp"

namespace kisim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Bounds box(std::initializer_list<double> lower, std::initializer_list<double> upper) {
  Bounds b;
  b.lower = Eigen::Map<const Eigen::VectorXd>(lower.begin(), static_cast<Eigen::Index>(lower.size()));
  b.upper = Eigen::Map<const Eigen::VectorXd>(upper.begin(), static_cast<Eigen::Index>(upper.size()));
  return b;
}

}  // namespace

CurveModel eq1_temperature_model() {
  CurveModel m;
  m.name = "eq1_temperature";
  m.parameters = {"L0_nH", "T_C_K", "T_el_K"};
  m.evaluate = [](const Eigen::ArrayXd& t, const Eigen::VectorXd& p) -> Eigen::ArrayXd {
    const Eigen::ArrayXd temp = effective_temperature(t, p(2));
    return (temp < p(1)).select(p(0) / (1.0 - temp / p(1)), std::numeric_limits<double>::quiet_NaN());
  };
  m.bounds = box({1e-12, 1e-6, 0.0}, {kInf, kInf, kInf});
  return m;
}

CurveModel eq2_current_model(double rf_current_uA) {
  CurveModel m;
  m.name = "eq2_current";
  m.parameters = {"L0_nH", "Istar_uA"};
  m.evaluate = [rf_current_uA](const Eigen::ArrayXd& i, const Eigen::VectorXd& p) -> Eigen::ArrayXd {
    return p(0) * (1.0 + (i + rf_current_uA).square() / (p(1) * p(1)));
  };
  m.bounds = box({1e-12, 1e-12}, {kInf, kInf});
  return m;
}

CurveModel resonance_lorentzian_model() {
  CurveModel m;
  m.name = "resonance_lorentzian";
  m.parameters = {"f0", "gamma", "depth", "baseline"};
  m.evaluate = [](const Eigen::ArrayXd& f, const Eigen::VectorXd& p) -> Eigen::ArrayXd {
    return p(3) - p(2) / (1.0 + ((f - p(0)) / p(1)).square());
  };
  m.bounds = box({-kInf, 1e-300, -kInf, -kInf}, {kInf, kInf, kInf, kInf});
  return m;
}

CurveModel powerlaw_model() {
  CurveModel m;
  m.name = "powerlaw";
  m.parameters = {"c", "k"};
  m.evaluate = [](const Eigen::ArrayXd& x, const Eigen::VectorXd& p) -> Eigen::ArrayXd {
    return p(0) * x.pow(p(1));
  };
  return m;
}

CurveModel constant_model() {
  CurveModel m;
  m.name = "constant";
  m.parameters = {"c"};
  m.evaluate = [](const Eigen::ArrayXd& x, const Eigen::VectorXd& p) -> Eigen::ArrayXd {
    return Eigen::ArrayXd::Constant(x.size(), p(0));
  };
  return m;
}

std::vector<std::string> builtin_model_names() {
  return {"eq1_temperature", "eq2_current", "resonance_lorentzian", "powerlaw", "constant"};
}

CurveModel find_model(std::string_view name) {
  if (name == "eq1_temperature") return eq1_temperature_model();
  if (name == "eq2_current") return eq2_current_model();
  if (name == "resonance_lorentzian") return resonance_lorentzian_model();
  if (name == "powerlaw") return powerlaw_model();
  if (name == "constant") return constant_model();
  throw Error(ErrorCode::InvalidArgument, "unknown model '" + std::string(name) + "'");
}

ResidualFunction model_residuals(const CurveModel& model, const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                                 const Eigen::ArrayXd& weights) {
  detail::require(x.size() == y.size() && x.size() >= 1, "model_residuals: x and y must be non-empty and equal length");
  detail::require(weights.size() == 0 || weights.size() == x.size(), "model_residuals: weights length mismatch");
  const Eigen::ArrayXd w = weights.size() == 0 ? Eigen::ArrayXd::Ones(x.size()) : weights;
  return [evaluate = model.evaluate, x, y, w](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return (w * (evaluate(x, p) - y)).matrix();
  };
}

FitReport fit_model(const CurveModel& model, const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                    const Eigen::VectorXd& guess, const Eigen::ArrayXd& weights, const FitOptions& options) {
  detail::require(static_cast<std::size_t>(guess.size()) == model.parameters.size(),
                  "fit_model: " + model.name + " takes " + std::to_string(model.parameters.size()) + " parameters");
  return fit_curve(model_residuals(model, x, y, weights), guess, model.bounds, options, model.parameters);
}

}  // namespace kisim

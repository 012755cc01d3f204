#pragma once

// Built-in curve models for fit_curve. Each maps an abscissa array and a
// parameter vector to predicted ordinates.

#include <Eigen/Core>

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "kisim/estimator.hpp"

namespace kisim {

struct CurveModel {
  std::string name;
  std::vector<std::string> parameters;
  std::function<Eigen::ArrayXd(const Eigen::ArrayXd& x, const Eigen::VectorXd& p)> evaluate;
  Bounds bounds;  // default parameter box
};

/// L_K(T_mxc) = L0 / (1 - T/T_C), T = (T_mxc^4 + T_el^4)^(1/4). Parameters
/// (L0_nH, T_C_K, T_el_K); NaN wherever T >= T_C.
CurveModel eq1_temperature_model();

/// L_K(I_dc) = L0 (1 + (I_dc + I_rf)^2 / I*^2) with I_rf held fixed. Parameters (L0_nH, Istar_uA).
CurveModel eq2_current_model(double rf_current_uA = 0.0);

/// baseline - depth / (1 + ((f - f0) / gamma)^2), gamma the half width. Parameters (f0, gamma, depth, baseline).
CurveModel resonance_lorentzian_model();

/// c x^k. Parameters (c, k).
CurveModel powerlaw_model();

/// c. Parameters (c).
CurveModel constant_model();

/// Names accepted by find_model.
std::vector<std::string> builtin_model_names();

/// Throws Error(InvalidArgument) for an unknown name.
CurveModel find_model(std::string_view name);

/// w (model(x, p) - y); weights may be empty (all ones).
ResidualFunction model_residuals(const CurveModel& model, const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                                 const Eigen::ArrayXd& weights = {});

FitReport fit_model(const CurveModel& model, const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                    const Eigen::VectorXd& guess, const Eigen::ArrayXd& weights = {},
                    const FitOptions& options = {});

}  // namespace kisim

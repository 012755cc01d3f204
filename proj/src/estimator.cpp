#include "kisim/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

#include "kisim/error.hpp"

namespace kisim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fd_step(double p) { return 1e-7 * (1.0 + std::abs(p)); }

Eigen::VectorXd lower_of(const Bounds& b, Eigen::Index n) {
  return b.lower.size() == n ? b.lower : Eigen::VectorXd::Constant(n, -kInf);
}
Eigen::VectorXd upper_of(const Bounds& b, Eigen::Index n) {
  return b.upper.size() == n ? b.upper : Eigen::VectorXd::Constant(n, kInf);
}

Eigen::MatrixXd covariance_from(const Eigen::MatrixXd& jac, double cost) {
  const Eigen::Index m = jac.rows();
  const Eigen::Index n = jac.cols();
  const double s2 = m > n ? cost / static_cast<double>(m - n) : 1.0;
  const Eigen::MatrixXd normal = jac.transpose() * jac;
  return s2 * normal.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace

double FitReport::value(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return parameters(static_cast<Eigen::Index>(i));
  throw Error(ErrorCode::InvalidArgument, "FitReport has no parameter '" + std::string(name) + "'");
}

double FitReport::stderr_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (names[i] == name) return std::sqrt(covariance(k, k));
  }
  throw Error(ErrorCode::InvalidArgument, "FitReport has no parameter '" + std::string(name) + "'");
}

Eigen::MatrixXd jacobian_forward(const ResidualFunction& fn, const Eigen::VectorXd& p, const Eigen::VectorXd& r0,
                                 const Bounds& bounds) {
  const Eigen::VectorXd upper = upper_of(bounds, p.size());
  Eigen::MatrixXd jac(r0.size(), p.size());
  Eigen::VectorXd q = p;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    double h = fd_step(p(j));
    if (p(j) + h > upper(j)) h = -h;
    q(j) = p(j) + h;
    jac.col(j) = (fn(q) - r0) / h;
    q(j) = p(j);
  }
  return jac;
}

Eigen::MatrixXd jacobian_forward(const ResidualFunction& fn, const Eigen::VectorXd& p) {
  return jacobian_forward(fn, p, fn(p));
}

Eigen::MatrixXd jacobian_central(const ResidualFunction& fn, const Eigen::VectorXd& p) {
  const Eigen::VectorXd r0 = fn(p);
  Eigen::MatrixXd jac(r0.size(), p.size());
  Eigen::VectorXd q = p;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = fd_step(p(j));
    q(j) = p(j) + h;
    const Eigen::VectorXd plus = fn(q);
    q(j) = p(j) - h;
    const Eigen::VectorXd minus = fn(q);
    jac.col(j) = (plus - minus) / (2.0 * h);
    q(j) = p(j);
  }
  return jac;
}

FitReport fit_curve(const ResidualFunction& fn, const Eigen::VectorXd& guess, const Bounds& bounds,
                    const FitOptions& options, std::vector<std::string> names) {
  const Eigen::Index n = guess.size();
  detail::require(n >= 1, "fit_curve: empty parameter vector");
  const Eigen::VectorXd lower = lower_of(bounds, n);
  const Eigen::VectorXd upper = upper_of(bounds, n);
  detail::require(((guess.array() >= lower.array()) && (guess.array() <= upper.array())).all(),
                  "fit_curve: initial guess outside bounds");

  if (names.empty()) {
    for (Eigen::Index j = 0; j < n; ++j) names.push_back("p" + std::to_string(j));
  }
  detail::require(static_cast<Eigen::Index>(names.size()) == n, "fit_curve: names/parameters size mismatch");

  Eigen::VectorXd p = guess;
  Eigen::VectorXd r = fn(p);
  detail::require(r.size() >= 1 && r.allFinite(), "fit_curve: residual not finite at the initial guess");
  double cost = r.squaredNorm();

  auto project = [&](Eigen::VectorXd v) { return v.cwiseMax(lower).cwiseMin(upper); };

  FitReport report;
  report.names = std::move(names);
  double lambda = 0.0;
  Eigen::MatrixXd jac;

  for (int it = 1; it <= options.max_iterations; ++it) {
    report.iterations = it;
    jac = jacobian_forward(fn, p, r, bounds);
    const Eigen::VectorXd gradient = jac.transpose() * r;
    report.gradient_norm = gradient.norm();
    if (report.gradient_norm < options.gradient_tol) {
      report.converged = true;
      break;
    }

    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd diag = normal.diagonal();
    if ((diag.array() <= 0.0).any()) {
      throw Error(ErrorCode::SingularNormalEquations, "fit_curve: a parameter does not affect the residual");
    }

    bool accepted = false;
    bool stalled = false;
    Eigen::VectorXd p_new;
    Eigen::VectorXd r_new;
    double cost_new = cost;
    while (!accepted) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal() += lambda * diag;
      const Eigen::LDLT<Eigen::MatrixXd> solver(damped);
      Eigen::VectorXd step;
      if (solver.info() == Eigen::Success) step = -solver.solve(gradient);
      if (step.size() == n && step.allFinite()) {
        p_new = project(p + step);
        r_new = fn(p_new);
        cost_new = r_new.squaredNorm();
        if (r_new.allFinite() && cost_new <= cost) {
          accepted = true;
          break;
        }
      }
      lambda = lambda == 0.0 ? 1e-3 : lambda * 10.0;
      if (lambda > 1e16) {
        stalled = true;
        break;
      }
    }
    if (stalled) {
      // No descent direction left at working precision.
      report.converged = true;
      break;
    }

    const double step_norm = (p_new - p).norm();
    p = p_new;
    r = r_new;
    cost = cost_new;
    lambda = lambda < 1e-9 ? 0.0 : lambda / 10.0;
    if (step_norm <= options.step_tol * (p.norm() + options.step_tol)) {
      report.converged = true;
      break;
    }
  }

  report.parameters = p;
  report.residual_norm = std::sqrt(cost);
  jac = jacobian_forward(fn, p, r, bounds);
  report.gradient_norm = (jac.transpose() * r).norm();
  report.covariance = covariance_from(jac, cost);
  return report;
}

// ---------------------------------------------------------------------------

namespace {

struct AxisStats {
  double mean;
  double stddev;
  double min;
  double max;
};

AxisStats axis_stats(const Eigen::ArrayXd& v) {
  const double mean = v.mean();
  const double var = (v - mean).square().sum() / static_cast<double>(v.size());
  return {mean, std::sqrt(var), v.minCoeff(), v.maxCoeff()};
}

void require_cloud(const Eigen::ArrayXcd& samples, const AxisStats& i, const AxisStats& q) {
  detail::require(samples.size() >= 16, "fit_blob: need at least 16 samples");
  auto degenerate = [](const AxisStats& s) { return s.max == s.min || s.stddev <= 1e-12 * std::abs(s.mean); };
  if (degenerate(i) || degenerate(q)) {
    throw Error(ErrorCode::DegenerateCloud, "fit_blob: IQ cloud has zero spread along an axis");
  }
}

}  // namespace

BlobFit fit_blob_moments(const Eigen::ArrayXcd& samples) {
  const AxisStats i = axis_stats(samples.real());
  const AxisStats q = axis_stats(samples.imag());
  require_cloud(samples, i, q);
  BlobFit out;
  out.center_i = i.mean;
  out.center_q = q.mean;
  out.sigma_i = i.stddev;
  out.sigma_q = q.stddev;
  out.amplitude = static_cast<double>(samples.size()) / (2.0 * M_PI * i.stddev * q.stddev);
  out.converged = true;
  return out;
}

BlobFit fit_blob(const Eigen::ArrayXcd& samples) {
  const Eigen::ArrayXd re = samples.real();
  const Eigen::ArrayXd im = samples.imag();
  const AxisStats si = axis_stats(re);
  const AxisStats sq = axis_stats(im);
  require_cloud(samples, si, sq);

  // Work in standardised coordinates so every fitted parameter is O(1).
  const Eigen::ArrayXd x = (re - si.mean) / si.stddev;
  const Eigen::ArrayXd y = (im - sq.mean) / sq.stddev;
  const double x_lo = x.minCoeff(), x_hi = x.maxCoeff();
  const double y_lo = y.minCoeff(), y_hi = y.maxCoeff();

  const auto n = samples.size();
  const auto bins = static_cast<Eigen::Index>(std::ceil(std::sqrt(static_cast<double>(n))));
  const double dx = (x_hi - x_lo) / static_cast<double>(bins);
  const double dy = (y_hi - y_lo) / static_cast<double>(bins);

  Eigen::ArrayXXd counts = Eigen::ArrayXXd::Zero(bins, bins);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto bx = std::min<Eigen::Index>(bins - 1, static_cast<Eigen::Index>((x(k) - x_lo) / dx));
    const auto by = std::min<Eigen::Index>(bins - 1, static_cast<Eigen::Index>((y(k) - y_lo) / dy));
    counts(bx, by) += 1.0;
  }
  const Eigen::ArrayXd cx = x_lo + dx * (Eigen::ArrayXd::LinSpaced(bins, 0.0, static_cast<double>(bins - 1)) + 0.5);
  const Eigen::ArrayXd cy = y_lo + dy * (Eigen::ArrayXd::LinSpaced(bins, 0.0, static_cast<double>(bins - 1)) + 0.5);

  // Peak height of a unit-variance Gaussian histogram; used to normalise counts.
  const double peak = static_cast<double>(n) * dx * dy / (2.0 * M_PI);
  const Eigen::ArrayXXd target = counts / peak;

  ResidualFunction residual = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    const Eigen::ArrayXd ex = (-(cx - p(1)).square() / (2.0 * p(3) * p(3))).exp();
    const Eigen::ArrayXd ey = (-(cy - p(2)).square() / (2.0 * p(4) * p(4))).exp();
    Eigen::MatrixXd model = p(0) * (ex.matrix() * ey.matrix().transpose());
    model -= target.matrix();
    return Eigen::Map<const Eigen::VectorXd>(model.data(), model.size());
  };

  Eigen::VectorXd guess(5);
  guess << 1.0, 0.0, 0.0, 1.0, 1.0;
  Bounds bounds;
  bounds.lower.resize(5);
  bounds.upper.resize(5);
  bounds.lower << 1e-12, x_lo, y_lo, 1e-6, 1e-6;
  bounds.upper << kInf, x_hi, y_hi, x_hi - x_lo, y_hi - y_lo;

  FitOptions options;
  options.max_iterations = 500;
  const FitReport fit = fit_curve(residual, guess, bounds, options, {"A", "I0", "Q0", "sigma_I", "sigma_Q"});

  BlobFit out;
  out.amplitude = fit.parameters(0) * peak;
  out.center_i = si.mean + si.stddev * fit.parameters(1);
  out.center_q = sq.mean + sq.stddev * fit.parameters(2);
  out.sigma_i = si.stddev * fit.parameters(3);
  out.sigma_q = sq.stddev * fit.parameters(4);
  out.residual_norm = fit.residual_norm * peak;
  out.converged = fit.converged;
  return out;
}

double snr(const BlobFit& on, const BlobFit& off) {
  const double di = on.center_i - off.center_i;
  const double dq = on.center_q - off.center_q;
  const double separation = di * di + dq * dq;
  const double width = on.sigma() + off.sigma();
  return separation / (0.25 * width * width);
}

// ---------------------------------------------------------------------------

LogLogLine fit_log_log(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "fit_log_log: need >= 2 paired points");
  detail::require((x > 0.0).all() && (y > 0.0).all(), "fit_log_log: values must be > 0");
  const Eigen::ArrayXd lx = x.log10();
  const Eigen::ArrayXd ly = y.log10();
  const double mx = lx.mean();
  const double my = ly.mean();
  const double sxx = (lx - mx).square().sum();
  if (!(sxx > 0.0)) throw Error(ErrorCode::IllConditioned, "fit_log_log: all abscissae coincide");
  const double sxy = ((lx - mx) * (ly - my)).sum();

  LogLogLine line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  const auto n = static_cast<double>(x.size());
  if (x.size() > 2) {
    const double s2 = (ly - line.intercept - line.slope * lx).square().sum() / (n - 2.0);
    line.covariance(0, 0) = s2 * (1.0 / n + mx * mx / sxx);
    line.covariance(1, 1) = s2 / sxx;
    line.covariance(0, 1) = line.covariance(1, 0) = -mx * s2 / sxx;
  }
  return line;
}

TminEstimate tmin_extrapolate(const std::vector<SnrPoint>& points) {
  detail::require(points.size() >= 3, "tmin_extrapolate: need at least 3 points");
  Eigen::ArrayXd t(static_cast<Eigen::Index>(points.size()));
  Eigen::ArrayXd s(t.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    detail::require(points[k].snr > 0.0 && points[k].t_int_s > 0.0, "tmin_extrapolate: t_int and SNR must be > 0");
    t(static_cast<Eigen::Index>(k)) = points[k].t_int_s;
    s(static_cast<Eigen::Index>(k)) = points[k].snr;
  }
  const LogLogLine line = fit_log_log(t, s);
  if (line.slope == 0.0) throw Error(ErrorCode::IllConditioned, "tmin_extrapolate: SNR does not depend on t_int");

  TminEstimate out;
  out.slope = line.slope;
  out.intercept = line.intercept;
  const double log_tmin = -line.intercept / line.slope;
  out.t_min_s = std::pow(10.0, log_tmin);
  // Delta method on log10 t_min = -a / b.
  const double da = -1.0 / line.slope;
  const double db = line.intercept / (line.slope * line.slope);
  const double var = da * da * line.covariance(0, 0) + db * db * line.covariance(1, 1) +
                     2.0 * da * db * line.covariance(0, 1);
  out.t_min_stderr_s = out.t_min_s * std::log(10.0) * std::sqrt(std::max(var, 0.0));
  out.extrapolation_ratio = t.minCoeff() / out.t_min_s;
  return out;
}

PowerLawFit fit_power_law(const std::vector<PowerLawPoint>& points, double split_W) {
  std::vector<double> lp, lt, hp, ht;
  for (const auto& pt : points) {
    (pt.power_W <= split_W ? lp : hp).push_back(pt.power_W);
    (pt.power_W <= split_W ? lt : ht).push_back(pt.t_min_s);
  }
  if (lp.size() < 2 || hp.size() < 2) {
    throw Error(ErrorCode::IllConditioned, "fit_power_law: need two points on each side of the split");
  }
  auto as_array = [](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };
  const LogLogLine low = fit_log_log(as_array(lp), as_array(lt));
  const LogLogLine high = fit_log_log(as_array(hp), as_array(ht));
  PowerLawFit out;
  out.low_exponent = low.slope;
  out.high_exponent = high.slope;
  out.low_prefactor = std::pow(10.0, low.intercept);
  out.high_prefactor = std::pow(10.0, high.intercept);
  out.low_count = lp.size();
  out.high_count = hp.size();
  return out;
}

}  // namespace kisim

#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace kisim {

// ---------------------------------------------------------------------------
// Nonlinear least squares

/// r(p): residual vector for a parameter vector. Data is captured by the closure.
using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct Bounds {
  Eigen::VectorXd lower;  // empty means unbounded
  Eigen::VectorXd upper;
};

struct FitOptions {
  int max_iterations = 10000;
  double step_tol = 1e-10;      // relative parameter step
  double gradient_tol = 1e-12;  // |J^T r|
};

struct FitReport {
  std::vector<std::string> names;
  Eigen::VectorXd parameters;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1, s^2 = |r|^2 / (m - n)
  double residual_norm = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;

  double value(std::string_view name) const;
  double stderr_of(std::string_view name) const;
};

/// Forward differences with step 1e-7 (1 + |p_j|); steps backwards when the
/// forward step would leave the upper bound.
Eigen::MatrixXd jacobian_forward(const ResidualFunction& fn, const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& r0, const Bounds& bounds = {});
Eigen::MatrixXd jacobian_forward(const ResidualFunction& fn, const Eigen::VectorXd& p);

/// Central differences with the same step; used to validate jacobian_forward.
Eigen::MatrixXd jacobian_central(const ResidualFunction& fn, const Eigen::VectorXd& p);

/// Levenberg-Marquardt with Marquardt diagonal scaling and box projection.
/// The first trial step of each iteration is undamped Gauss-Newton once the
/// damping has decayed. Stops when the relative step is below step_tol or
/// |J^T r| is below gradient_tol; after max_iterations the report comes back
/// with converged = false.
/// Throws Error(InvalidArgument) for a guess outside the bounds or a
/// non-finite residual at the guess, Error(SingularNormalEquations) when a
/// parameter has no influence on the residual.
FitReport fit_curve(const ResidualFunction& fn, const Eigen::VectorXd& guess, const Bounds& bounds = {},
                    const FitOptions& options = {}, std::vector<std::string> names = {});

// ---------------------------------------------------------------------------
// IQ blobs and SNR

struct BlobFit {
  double amplitude = 0.0;  // histogram counts at the peak
  double center_i = 0.0;
  double center_q = 0.0;
  double sigma_i = 0.0;
  double sigma_q = 0.0;
  double residual_norm = 0.0;
  bool converged = false;

  /// The single width entering the SNR: mean of the two axis widths.
  double sigma() const { return 0.5 * (sigma_i + sigma_q); }
};

/// Least-squares fit of A exp(-(I-I0)^2/(2 sI^2) - (Q-Q0)^2/(2 sQ^2)) to the
/// ceil(sqrt(n)) x ceil(sqrt(n)) histogram of the samples over their bounding box.
/// Throws Error(DegenerateCloud) if either axis has (numerically) zero spread,
/// Error(InvalidArgument) for fewer than 16 samples.
BlobFit fit_blob(const Eigen::ArrayXcd& samples);

/// Sample mean / standard deviation estimate of the same blob parameters.
BlobFit fit_blob_moments(const Eigen::ArrayXcd& samples);

/// |center_on - center_off|^2 / (0.25 (sigma_on + sigma_off)^2).
double snr(const BlobFit& on, const BlobFit& off);

struct SnrPoint {
  double t_int_s = 0.0;
  double snr = 0.0;
};

struct TminEstimate {
  double t_min_s = 0.0;
  double slope = 0.0;      // d log10 SNR / d log10 t_int
  double intercept = 0.0;  // log10 SNR at t_int = 1 s
  double t_min_stderr_s = 0.0;
  /// Shortest measured t_int over t_min; > 1 means t_min lies below the data.
  double extrapolation_ratio = 0.0;
};

/// OLS of log10 SNR on log10 t_int, solved for SNR = 1.
/// Throws Error(InvalidArgument) for fewer than 3 points or SNR <= 0,
/// Error(IllConditioned) if all t_int coincide or the slope vanishes.
TminEstimate tmin_extrapolate(const std::vector<SnrPoint>& points);

struct LogLogLine {
  double slope = 0.0;
  double intercept = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // (intercept, slope)
};

/// OLS of log10 y on log10 x.
LogLogLine fit_log_log(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

struct PowerLawPoint {
  double power_W = 0.0;
  double t_min_s = 0.0;
};

struct PowerLawFit {
  double low_exponent = 0.0;
  double high_exponent = 0.0;
  double low_prefactor = 0.0;
  double high_prefactor = 0.0;
  std::size_t low_count = 0;
  std::size_t high_count = 0;
};

/// Independent log-log fits for P <= split and P > split.
/// Throws Error(IllConditioned) when either side has fewer than two distinct powers.
PowerLawFit fit_power_law(const std::vector<PowerLawPoint>& points, double split_W);

}  // namespace kisim

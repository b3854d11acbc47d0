#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "kinopt/model.hpp"
#include "kinopt/trace.hpp"

namespace kinopt {

/// m(t) = (1 - e^{-eta beta t}) w_d + m0 e^{-eta beta t}.
double mean_closed_form(double t, double m0, double w_d, double eta, double beta);

/// Bracket 4 alpha w_d/(4 alpha + nu) <= m_inf <= 4 alpha w_d/(4 alpha - nu),
/// returned as (lower, upper); for w_d < 0 the two values swap roles.
/// Throws ConditionUnmet when nu >= 4 alpha.
std::pair<double, double> mean_limit_bounds(double alpha, double nu, double w_d);

struct MomentOdeOptions {
  double w_d = 0.0;
  /// Record spacing; zero stores only the endpoints.
  double record_dt = 0.0;
  double rtol = 1e-10;
  double atol = 1e-12;
};

/// Limit moment system in the quasi-invariant regime
///
///   m' = (4/kappa)(w_d - m)
///   E' = -2 (1 + 2/kappa)(E - m^2) - (8/kappa) m (m - w_d) + varsigma int D f
///
/// with int D f = 1 - E for quadratic D and 0 for no diffusion. Integrated by
/// an adaptive Dormand-Prince pair. Throws ClosureUnavailable for custom D.
MomentTrace moment_ode_solve(double m0, double E0, double T, double kappa, double varsigma,
                             const DiffusionFunction& D, const MomentOdeOptions& options = {});

enum class SteadyFamily {
  /// P = 1, D = 1 - w^2.
  ConstantP,
  /// P = 1 - w^2, D = 1 - w^2.
  SznajdP,
};

struct SteadyParams {
  SteadyFamily family = SteadyFamily::ConstantP;
  double w_d = 0.0;
  double varsigma = 1.0;
  double kappa = kInfinity;
  /// Mean parameter of the ConstantP profile; defaults to w_d.
  std::optional<double> mean;
};

/// Normalized stationary density of the limit equation. The normalization
/// constant is computed once by double-exponential quadrature on (-1, 1) and
/// cached; evaluation is pure afterwards.
class SteadyDensity {
 public:
  /// Throws InvalidArgument for varsigma <= 0, kappa <= 0 or |w_d| >= 1, and
  /// QuadratureFailure when the profile is not integrable to tolerance.
  explicit SteadyDensity(const SteadyParams& params);

  const SteadyParams& params() const noexcept { return params_; }
  double norm_constant() const noexcept { return norm_; }

  /// Normalized density; 0 outside the open interval.
  double operator()(double w) const;
  /// Log of the unnormalized profile, exact as a function of (1 - w) and (1 + w).
  double log_profile(double one_minus_w, double one_plus_w) const;

  /// Drift a(w) of the stationary equation (varsigma/2)(D^2 f)' = a(w) f.
  double drift(double w) const;

  /// Largest density value (located by grid scan plus golden refinement).
  double max_value() const noexcept { return max_value_; }

  /// Probability mass in [a, b] with -1 <= a < b <= 1.
  double mass(double a, double b) const;
  /// int w^k f dw.
  double moment(int k) const;
  /// int (w - c)^2 f dw.
  double variance_about(double c) const;

 private:
  double normalized_two_sided(double w, double one_minus_w, double one_plus_w) const;

  SteadyParams params_;
  double c_ = 1.0;       // 1 + 2/kappa
  double shift_ = 0.0;   // max of the log profile, subtracted before exp
  double norm_ = 1.0;    // C such that C exp(log_profile - shift) integrates to 1
  double max_value_ = 0.0;
};

/// Builds and normalizes a steady density (same as the constructor).
SteadyDensity steady_density(const SteadyParams& params);

/// (varsigma/2) d/dw [D^2 f] - a(w) f at w, central difference with step h.
double stationarity_residual(const SteadyDensity& f, double w, double h = 1e-6);

/// Characteristic preimage x(w, t) = w / sqrt((1 - w^2) e^{-2 gamma t} + w^2)
/// of the mean-field Sznajd transport.
double sznajd_preimage(double w, double t, double gamma);

/// Exact density of the uncontrolled mean-field Sznajd transport started from f0.
double sznajd_exact(double w, double t, double gamma, const std::function<double(double)>& f0);

/// CDF of the same solution: F(w, t) = F0(x(w, t)).
double sznajd_exact_cdf(double w, double t, double gamma, const std::function<double(double)>& F0);

/// Adaptive double-exponential quadrature of f on [a, b]; throws
/// QuadratureFailure when the error estimate exceeds sqrt(`tolerance`) relative to
/// the L1 norm.
double integrate(const std::function<double(double)>& f, double a, double b, double tolerance = 1e-12);

}  // namespace kinopt

#include "kinopt/fokker_planck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include "kinopt/error.hpp"
#include "kinopt/optimize.hpp"

namespace kinopt {

double mean_closed_form(double t, double m0, double w_d, double eta, double beta) {
  if (!(eta >= 0.0) || !(beta >= 0.0)) throw InvalidArgument("eta and beta must be nonnegative");
  const double decay = std::exp(-eta * beta * t);
  return (1.0 - decay) * w_d + m0 * decay;
}

std::pair<double, double> mean_limit_bounds(double alpha, double nu, double w_d) {
  if (!(alpha > 0.0) || !(nu > 0.0)) throw InvalidArgument("alpha and nu must be positive");
  if (!(nu < 4.0 * alpha)) {
    throw ConditionUnmet("mean bracket requires nu < 4 alpha (nu = " + std::to_string(nu) +
                         ", 4 alpha = " + std::to_string(4.0 * alpha) + ")");
  }
  const double lo = 4.0 * alpha / (4.0 * alpha + nu) * w_d;
  const double hi = 4.0 * alpha / (4.0 * alpha - nu) * w_d;
  return w_d >= 0.0 ? std::pair{lo, hi} : std::pair{hi, lo};
}

MomentTrace moment_ode_solve(double m0, double E0, double T, double kappa, double varsigma,
                             const DiffusionFunction& D, const MomentOdeOptions& options) {
  namespace odeint = boost::numeric::odeint;
  if (D.kind() == DiffusionFunction::Kind::Custom) {
    throw ClosureUnavailable("no moment closure for custom diffusion '" + D.name() + "'");
  }
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (!(varsigma >= 0.0)) throw InvalidArgument("varsigma must be nonnegative");
  if (!(T >= 0.0)) throw InvalidArgument("horizon must be nonnegative");
  if (std::abs(m0) > 1.0 || E0 < m0 * m0 - 1e-15 || E0 > 1.0 + 1e-15) {
    throw InvalidArgument("initial moments must satisfy m0^2 <= E0 <= 1");
  }

  const double a = std::isinf(kappa) ? 0.0 : 4.0 / kappa;
  const double two_over_kappa = 0.5 * a;
  const bool quadratic = D.kind() == DiffusionFunction::Kind::Quadratic;
  const double w_d = options.w_d;

  using State = std::array<double, 2>;
  auto rhs = [&](const State& x, State& dx, double) {
    const double m = x[0];
    const double E = x[1];
    const double closure = quadratic ? 1.0 - E : 0.0;
    dx[0] = a * (w_d - m);
    dx[1] = -2.0 * (1.0 + two_over_kappa) * (E - m * m) - 2.0 * a * m * (m - w_d) + varsigma * closure;
  };

  std::vector<double> times{0.0};
  if (options.record_dt > 0.0) {
    const auto n = static_cast<std::size_t>(std::floor(T / options.record_dt + 1e-9));
    for (std::size_t i = 1; i <= n; ++i) times.push_back(std::min(T, static_cast<double>(i) * options.record_dt));
  }
  if (T > times.back()) times.push_back(T);

  MomentTrace trace;
  trace.w_d = w_d;
  State x{m0, E0};
  if (times.size() == 1) {
    trace.record(0.0, m0, E0, 0.0);
    return trace;
  }
  auto stepper = odeint::make_dense_output(options.atol, options.rtol, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), std::min(1e-3, T / 16.0),
                          [&trace](const State& s, double t) { trace.record(t, s[0], s[1], 0.0); });
  return trace;
}

namespace {

boost::math::quadrature::tanh_sinh<double>& quadrature() {
  static boost::math::quadrature::tanh_sinh<double> q;
  return q;
}

// Accept the estimate when it is within sqrt(tolerance) of the L1 norm: the
// reported error is the difference of the last two levels, which overstates the
// true error of a converging double-exponential rule by orders of magnitude.
void check_quadrature(double value, double error, double l1, double tolerance) {
  if (!std::isfinite(value) || error > std::sqrt(tolerance) * std::max(l1, 1e-300)) {
    throw QuadratureFailure("quadrature error estimate " + std::to_string(error) + " exceeds tolerance");
  }
}

// Integrates f(x, 1 - x, 1 + x) on [a, b] inside [-1, 1], passing endpoint
// distances accurate to the last bit near +-1. The interval is cut into equal
// pieces so sharply peaked profiles are resolved.
template <typename F>
double integrate_two_sided(F&& f, double a, double b, double tolerance) {
  constexpr int kPieces = 8;
  double total = 0.0;
  double total_error = 0.0;
  double total_l1 = 0.0;
  for (int k = 0; k < kPieces; ++k) {
    const double lo = k == 0 ? a : a + (b - a) * k / kPieces;
    const double hi = k == kPieces - 1 ? b : a + (b - a) * (k + 1) / kPieces;
    const double mid = 0.5 * (lo + hi);
    auto g = [&](double x, double xc) {
      const double one_minus = x > mid ? (1.0 - hi) + xc : 1.0 - x;
      const double one_plus = x < mid ? (1.0 + lo) - xc : 1.0 + x;
      return f(x, one_minus, one_plus);
    };
    double error = 0.0;
    double l1 = 0.0;
    try {
      total += quadrature().integrate(g, lo, hi, tolerance, &error, &l1);
    } catch (const std::exception& e) {
      throw QuadratureFailure(std::string("quadrature did not converge: ") + e.what());
    }
    // Pieces far in the tails carry negligible mass; judge errors globally.
    total_error += error;
    total_l1 += l1;
  }
  check_quadrature(total, total_error, total_l1, tolerance);
  return total;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tolerance) {
  if (!(a < b)) throw InvalidArgument("integration interval must satisfy a < b");
  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  try {
    value = quadrature().integrate(f, a, b, tolerance, &error, &l1);
  } catch (const std::exception& e) {
    throw QuadratureFailure(std::string("quadrature did not converge: ") + e.what());
  }
  check_quadrature(value, error, l1, tolerance);
  return value;
}

SteadyDensity::SteadyDensity(const SteadyParams& params) : params_(params) {
  if (!(params_.varsigma > 0.0)) throw InvalidArgument("varsigma must be positive for a steady density");
  if (!(params_.kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (!(std::abs(params_.w_d) < 1.0)) throw InvalidArgument("w_d must lie in the open interval (-1, 1)");
  if (!params_.mean) params_.mean = params_.w_d;
  if (!(std::abs(*params_.mean) < 1.0)) throw InvalidArgument("mean parameter must lie in (-1, 1)");
  c_ = std::isinf(params_.kappa) ? 1.0 : 1.0 + 2.0 / params_.kappa;

  if (params_.family == SteadyFamily::SznajdP && std::isinf(params_.kappa)) {
    // Pure power law: integrable only when both exponents exceed -1.
    const double z = params_.varsigma;
    const double e_minus = -2.0 - (params_.w_d - 1.0) / z;
    const double e_plus = -2.0 + (params_.w_d + 1.0) / z;
    if (!(e_minus > -1.0 && e_plus > -1.0)) {
      throw QuadratureFailure("uncontrolled profile is not integrable for varsigma = " + std::to_string(z));
    }
  }

  // Locate the maximum of the log profile so exp never overflows.
  auto log_at = [this](double w) { return log_profile(1.0 - w, 1.0 + w); };
  constexpr int kGrid = 4001;
  double best = -kInfinity;
  int bi = 1;
  for (int i = 1; i < kGrid - 1; ++i) {
    const double w = -1.0 + 2.0 * i / (kGrid - 1);
    const double v = log_at(w);
    if (v > best) {
      best = v;
      bi = i;
    }
  }
  const double h = 2.0 / (kGrid - 1);
  const double w0 = -1.0 + h * bi;
  const auto refined = golden_section_minimize<double>([&](double w) { return -log_at(w); },
                                                       std::max(-1.0 + 1e-300, w0 - h), std::min(1.0 - 1e-16, w0 + h),
                                                       1e-12);
  shift_ = std::max(best, -refined.fx);
  if (!std::isfinite(shift_)) throw QuadratureFailure("steady profile has no finite maximum");

  const double z = integrate_two_sided(
      [this](double, double om, double op) { return std::exp(log_profile(om, op) - shift_); }, -1.0, 1.0, 1e-13);
  if (!(z > 0.0)) throw QuadratureFailure("steady profile integrates to zero");
  norm_ = 1.0 / z;
  max_value_ = norm_;
  // For power-law profiles the log maximum sits at the grid edge; take the
  // larger of the two candidates.
  max_value_ = std::max(max_value_, (*this)(w0));
}

double SteadyDensity::log_profile(double one_minus_w, double one_plus_w) const {
  if (!(one_minus_w > 0.0) || !(one_plus_w > 0.0)) return -kInfinity;
  const double z = params_.varsigma;
  const double lm = std::log(one_minus_w);
  const double lp = std::log(one_plus_w);
  const double w = 0.5 * (one_plus_w - one_minus_w);
  const double one_minus_w2 = one_minus_w * one_plus_w;
  if (params_.family == SteadyFamily::ConstantP) {
    const double m = *params_.mean;
    return -2.0 * (lm + lp) + c_ * m / (2.0 * z) * (lp - lm) - c_ * (1.0 - m * w) / (z * one_minus_w2);
  }
  const double wd = params_.w_d;
  const double k_term = std::isinf(params_.kappa) ? 0.0 : wd / (params_.kappa * z);
  const double e_minus = -2.0 - (wd - 1.0) / z - k_term;
  const double e_plus = -2.0 + (wd + 1.0) / z + k_term;
  double value = e_minus * lm + e_plus * lp;
  if (!std::isinf(params_.kappa)) value -= 2.0 / params_.kappa * (1.0 - wd * w) / (z * one_minus_w2);
  return value;
}

double SteadyDensity::normalized_two_sided(double, double one_minus_w, double one_plus_w) const {
  return norm_ * std::exp(log_profile(one_minus_w, one_plus_w) - shift_);
}

double SteadyDensity::operator()(double w) const {
  if (!(w > -1.0 && w < 1.0)) return 0.0;
  return normalized_two_sided(w, 1.0 - w, 1.0 + w);
}

double SteadyDensity::drift(double w) const {
  if (params_.family == SteadyFamily::ConstantP) return c_ * (*params_.mean - w);
  const double extra = std::isinf(params_.kappa) ? 0.0 : 2.0 / params_.kappa;
  return ((1.0 - w) * (1.0 + w) + extra) * (params_.w_d - w);
}

double SteadyDensity::mass(double a, double b) const {
  a = std::max(a, -1.0);
  b = std::min(b, 1.0);
  if (!(a < b)) return 0.0;
  return integrate_two_sided(
      [this](double x, double om, double op) { return normalized_two_sided(x, om, op); }, a, b, 1e-12);
}

double SteadyDensity::moment(int k) const {
  return integrate_two_sided(
      [this, k](double x, double om, double op) { return std::pow(x, k) * normalized_two_sided(x, om, op); }, -1.0,
      1.0, 1e-12);
}

double SteadyDensity::variance_about(double c) const {
  return integrate_two_sided(
      [this, c](double x, double om, double op) { return (x - c) * (x - c) * normalized_two_sided(x, om, op); },
      -1.0, 1.0, 1e-12);
}

SteadyDensity steady_density(const SteadyParams& params) { return SteadyDensity(params); }

double stationarity_residual(const SteadyDensity& f, double w, double h) {
  auto flux = [&f](double x) {
    const double d = (1.0 - x) * (1.0 + x);
    return d * d * f(x);
  };
  const double derivative = (flux(w + h) - flux(w - h)) / (2.0 * h);
  return 0.5 * f.params().varsigma * derivative - f.drift(w) * f(w);
}

double sznajd_preimage(double w, double t, double gamma) {
  const double decay = std::exp(-2.0 * gamma * t);
  return w / std::sqrt((1.0 - w) * (1.0 + w) * decay + w * w);
}

double sznajd_exact(double w, double t, double gamma, const std::function<double(double)>& f0) {
  if (!(std::abs(w) < 1.0)) throw InvalidArgument("exact Sznajd density needs |w| < 1");
  if (!(t >= 0.0)) throw InvalidArgument("time must be nonnegative");
  const double decay = std::exp(-2.0 * gamma * t);
  const double s = (1.0 - w) * (1.0 + w) * decay + w * w;
  return decay / (s * std::sqrt(s)) * f0(w / std::sqrt(s));
}

double sznajd_exact_cdf(double w, double t, double gamma, const std::function<double(double)>& F0) {
  if (!(t >= 0.0)) throw InvalidArgument("time must be nonnegative");
  if (w <= -1.0) return F0(-1.0);
  if (w >= 1.0) return F0(1.0);
  return F0(sznajd_preimage(w, t, gamma));
}

}  // namespace kinopt

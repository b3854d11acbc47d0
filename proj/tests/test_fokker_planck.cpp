#include <doctest.h>

#include <cmath>
#include <functional>

#include "kinopt/error.hpp"
#include "kinopt/fokker_planck.hpp"

using namespace kinopt;

namespace {

// Trapezoid rule in w = tanh(s); independent of the library quadrature.
double tanh_trapezoid(const std::function<double(double)>& f, double s_max = 30.0, int n = 120000) {
  const double h = 2.0 * s_max / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = -s_max + h * i;
    const double w = std::tanh(s);
    if (!(std::abs(w) < 1.0)) continue;
    const double c = 1.0 / std::cosh(s);
    const double v = f(w) * c * c;
    sum += (i == 0 || i == n) ? 0.5 * v : v;
  }
  return sum * h;
}

// Mean-field drift written out from the interaction and control terms, at m = w_d.
double reference_drift(const SteadyParams& p, double w) {
  const double m = p.mean.value_or(p.w_d);
  const double ctrl = std::isinf(p.kappa) ? 0.0 : -(2.0 / p.kappa) * (p.w_d + w - 2.0 * p.w_d);
  if (p.family == SteadyFamily::ConstantP) {
    return (m - w) + ctrl;
  }
  return (1.0 - w * w) * (p.w_d - w) + ctrl;
}

double reference_residual(const SteadyDensity& f, double w, double h = 1e-5) {
  auto flux = [&f](double x) { return (1.0 - x * x) * (1.0 - x * x) * f(x); };
  // Five-point derivative.
  const double d = (-flux(w + 2 * h) + 8 * flux(w + h) - 8 * flux(w - h) + flux(w - 2 * h)) / (12.0 * h);
  return 0.5 * f.params().varsigma * d - reference_drift(f.params(), w) * f(w);
}

}  // namespace

TEST_CASE("mean closed form") {
  CHECK(mean_closed_form(1.0, 0.0, 1.0, 1.0, 1.0) == doctest::Approx(0.632120558828558).epsilon(1e-12));
  CHECK(mean_closed_form(0.0, 0.3, 1.0, 5.0, 0.2) == 0.3);
  CHECK(mean_closed_form(2.0, -0.5, 0.25, 10.0, 0.0) == -0.5);
  CHECK(mean_closed_form(100.0, -0.5, 0.25, 10.0, 0.5) == doctest::Approx(0.25));
  CHECK_THROWS_AS(mean_closed_form(1.0, 0.0, 0.0, -1.0, 0.1), InvalidArgument);
}

TEST_CASE("mean limit bounds") {
  const auto [lo, hi] = mean_limit_bounds(0.1, 0.2, 0.5);
  CHECK(lo == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(hi == doctest::Approx(1.0).epsilon(1e-14));
  const auto [nlo, nhi] = mean_limit_bounds(0.1, 0.2, -0.5);
  CHECK(nlo == doctest::Approx(-1.0));
  CHECK(nhi == doctest::Approx(-1.0 / 3.0));
  const auto [zlo, zhi] = mean_limit_bounds(0.1, 0.2, 0.0);
  CHECK(zlo == 0.0);
  CHECK(zhi == 0.0);
  CHECK_THROWS_AS(mean_limit_bounds(0.1, 0.4, 0.5), ConditionUnmet);
  CHECK_THROWS_AS(mean_limit_bounds(0.1, 1.0, 0.5), ConditionUnmet);
}

TEST_CASE("moment ODE: equilibrium initial data is stationary") {
  // m = w_d, and E solving E' = 0 for quadratic D: E(2c + varsigma) = 2c w_d^2 + varsigma.
  const double kappa = 0.5;
  const double z = 2.0;
  const double wd = 0.3;
  const double c = 1.0 + 2.0 / kappa;
  const double E = (2.0 * c * wd * wd + z) / (2.0 * c + z);
  MomentOdeOptions opt;
  opt.w_d = wd;
  opt.record_dt = 0.5;
  const auto tr = moment_ode_solve(wd, E, 5.0, kappa, z, DiffusionFunction::quadratic(), opt);
  REQUIRE(tr.size() == 11);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(std::abs(tr.m[i] - wd) <= 1e-12);
    CHECK(std::abs(tr.E[i] - E) <= 1e-10);
  }
}

TEST_CASE("moment ODE: mean decays at rate 4/kappa") {
  MomentOdeOptions opt;
  opt.record_dt = 0.01;
  const auto tr = moment_ode_solve(0.5, 0.5, 0.2, 0.1, 0.0, DiffusionFunction::none(), opt);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(std::abs(tr.m[i] - 0.5 * std::exp(-40.0 * tr.t[i])) <= 1e-9);
  }
}

TEST_CASE("moment ODE: uncontrolled no-noise second moment relaxes to m^2") {
  MomentOdeOptions opt;
  const auto tr = moment_ode_solve(0.2, 0.5, 1.0, kInfinity, 0.0, DiffusionFunction::none(), opt);
  REQUIRE(tr.size() == 2);
  CHECK(tr.m.back() == doctest::Approx(0.2).epsilon(1e-14));
  // E - m^2 = (E0 - m0^2) e^{-2t}
  CHECK(std::abs(tr.E.back() - (0.04 + 0.46 * std::exp(-2.0))) <= 1e-9);
}

TEST_CASE("moment ODE: closure against the steady density") {
  // kappa = 1, varsigma = 5, w_d = 0. The closure int D^2 f = 1 - E is an
  // approximation; report the gap to the exact steady second moment.
  MomentOdeOptions opt;
  const auto tr = moment_ode_solve(0.0, 1.0 / 3.0, 40.0, 1.0, 5.0, DiffusionFunction::quadratic(), opt);
  const double ode_E = tr.E.back();
  CHECK(ode_E == doctest::Approx(5.0 / 11.0).epsilon(1e-9));
  const SteadyDensity f({SteadyFamily::ConstantP, 0.0, 5.0, 1.0, std::nullopt});
  const double exact_E = f.moment(2);
  MESSAGE("steady E: moment ODE " << ode_E << ", density " << exact_E << ", gap " << std::abs(ode_E - exact_E));
  CHECK(exact_E > 0.0);
  CHECK(exact_E < 1.0);
}

TEST_CASE("moment ODE: input validation") {
  CHECK_THROWS_AS(moment_ode_solve(0.0, 0.3, 1.0, 1.0, 1.0, DiffusionFunction::custom([](double w) { return 1 - w * w; })),
                  ClosureUnavailable);
  CHECK_THROWS_AS(moment_ode_solve(0.5, 0.1, 1.0, 1.0, 1.0, DiffusionFunction::none()), InvalidArgument);
  CHECK_THROWS_AS(moment_ode_solve(0.0, 0.3, 1.0, 0.0, 1.0, DiffusionFunction::none()), InvalidArgument);
}

TEST_CASE("steady density: constant P profile") {
  for (double kappa : {kInfinity, 10.0, 1.0, 0.1}) {
    for (double z : {5.0, 2.0, 0.5}) {
      for (double wd : {0.0, 0.25, -0.5}) {
        const SteadyParams p{SteadyFamily::ConstantP, wd, z, kappa, std::nullopt};
        const SteadyDensity f(p);
        CHECK(std::abs(tanh_trapezoid([&](double w) { return f(w); }) - 1.0) <= 1e-8);
        CHECK(std::abs(f.moment(0) - 1.0) <= 1e-10);
        for (int i = 1; i < 100; ++i) {
          const double w = -0.99 + 0.02 * i;
          CHECK(std::abs(reference_residual(f, w)) <= 1e-6 * f.max_value());
        }
      }
    }
  }
}

TEST_CASE("steady density: symmetric target gives an even profile") {
  const SteadyDensity f({SteadyFamily::ConstantP, 0.0, 2.0, 0.1, std::nullopt});
  const SteadyDensity g({SteadyFamily::SznajdP, 0.0, 0.5, 1.0, std::nullopt});
  for (int i = 0; i <= 100; ++i) {
    const double w = 0.0099 * i;
    CHECK(std::abs(f(w) - f(-w)) <= 1e-12 * f.max_value());
    CHECK(std::abs(g(w) - g(-w)) <= 1e-12 * g.max_value());
  }
}

TEST_CASE("steady density: uncontrolled constant P is the closed-form profile") {
  // f ~ (1+w)^{-2 + m/(2z)} (1-w)^{-2 - m/(2z)} exp(-(1 - m w)/(z (1 - w^2))).
  const double z = 2.0;
  const double m = 0.3;
  const SteadyDensity f({SteadyFamily::ConstantP, 0.0, z, kInfinity, m});
  auto raw = [&](double w) {
    return std::pow(1.0 + w, -2.0 + m / (2.0 * z)) * std::pow(1.0 - w, -2.0 - m / (2.0 * z)) *
           std::exp(-(1.0 - m * w) / (z * (1.0 - w * w)));
  };
  const double norm = tanh_trapezoid(raw);
  for (int i = 1; i < 100; ++i) {
    const double w = -0.99 + 0.02 * i;
    CHECK(f(w) == doctest::Approx(raw(w) / norm).epsilon(1e-8));
  }
  CHECK(f.moment(1) == doctest::Approx(m).epsilon(1e-8));
}

TEST_CASE("steady density: Sznajd P profile") {
  for (double kappa : {kInfinity, 1.0, 0.1}) {
    for (double z : {0.9, 0.5, 0.3}) {
      for (double wd : {0.0, 0.4}) {
        const SteadyParams p{SteadyFamily::SznajdP, wd, z, kappa, std::nullopt};
        if (std::isinf(kappa) && (1.0 - std::abs(wd)) / z <= 1.0) {
          // Power law with an exponent <= -1 at one end.
          CHECK_THROWS_AS(SteadyDensity{p}, QuadratureFailure);
          continue;
        }
        const SteadyDensity f(p);
        CHECK(std::abs(f.moment(0) - 1.0) <= 1e-10);
        if (std::isinf(kappa)) {
          // (1-w)^a (1+w)^b normalized by 2^{a+b+1} B(a+1, b+1).
          const double a = -2.0 - (wd - 1.0) / z;
          const double b = -2.0 + (wd + 1.0) / z;
          const double norm = std::pow(2.0, a + b + 1.0) * std::beta(a + 1.0, b + 1.0);
          for (double w : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
            CHECK(f(w) == doctest::Approx(std::pow(1.0 - w, a) * std::pow(1.0 + w, b) / norm).epsilon(1e-9));
          }
        } else {
          CHECK(std::abs(tanh_trapezoid([&](double w) { return f(w); }, 30.0, 200000) - 1.0) <= 1e-8);
        }
        for (int i = 1; i < 100; ++i) {
          const double w = -0.99 + 0.02 * i;
          CHECK(std::abs(reference_residual(f, w)) <= 1e-6 * f.max_value());
        }
      }
    }
  }
}

TEST_CASE("steady density: non-integrable uncontrolled Sznajd profile") {
  CHECK_THROWS_AS(SteadyDensity({SteadyFamily::SznajdP, 0.0, 5.0, kInfinity, std::nullopt}), QuadratureFailure);
  CHECK_NOTHROW(SteadyDensity({SteadyFamily::SznajdP, 0.0, 5.0, 1.0, std::nullopt}));
}

TEST_CASE("steady density: stronger control concentrates the profile") {
  double previous = kInfinity;
  for (double kappa : {10.0, 1.0, 0.1, 0.01}) {
    const SteadyDensity f({SteadyFamily::ConstantP, 0.25, 5.0, kappa, std::nullopt});
    const double v = f.variance_about(0.25);
    CHECK(v < previous);
    previous = v;
    CHECK(f.moment(1) == doctest::Approx(0.25).epsilon(1e-6));
  }
}

TEST_CASE("steady density: parameter validation") {
  CHECK_THROWS_AS(SteadyDensity({SteadyFamily::ConstantP, 0.0, 0.0, 1.0, std::nullopt}), InvalidArgument);
  CHECK_THROWS_AS(SteadyDensity({SteadyFamily::ConstantP, 1.0, 1.0, 1.0, std::nullopt}), InvalidArgument);
  CHECK_THROWS_AS(SteadyDensity({SteadyFamily::ConstantP, 0.0, 1.0, -1.0, std::nullopt}), InvalidArgument);
  const SteadyDensity f({SteadyFamily::ConstantP, 0.0, 1.0, 1.0, std::nullopt});
  CHECK(f(1.0) == 0.0);
  CHECK(f(-1.5) == 0.0);
  CHECK(f.mass(-1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.mass(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(stationarity_residual(f, 0.3)) <= 1e-6 * f.max_value());
}

TEST_CASE("exact Sznajd transport") {
  auto f0 = [](double) { return 0.5; };
  auto F0 = [](double x) { return 0.5 * (x + 1.0); };
  for (double w : {-0.9, -0.3, 0.0, 0.4, 0.8}) CHECK(sznajd_exact(w, 0.0, 1.0, f0) == doctest::Approx(0.5));
  for (double t : {0.5, 1.0, 2.0}) {
    for (double gamma : {1.0, -1.0}) {
      const double mass = tanh_trapezoid([&](double w) { return sznajd_exact(w, t, gamma, f0); }, 40.0, 400000);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
      // CDF consistent with the density.
      const double cdf = sznajd_exact_cdf(0.3, t, gamma, F0) - sznajd_exact_cdf(-0.2, t, gamma, F0);
      const double num = integrate([&](double w) { return sznajd_exact(w, t, gamma, f0); }, -0.2, 0.3);
      CHECK(cdf == doctest::Approx(num).epsilon(1e-10));
    }
  }
  // gamma = 1 concentrates at the centre.
  const double centre = sznajd_exact_cdf(0.1, 5.0, 1.0, F0) - sznajd_exact_cdf(-0.1, 5.0, 1.0, F0);
  CHECK(centre >= 0.99);
  CHECK(sznajd_preimage(0.5, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(sznajd_exact(1.0, 1.0, 1.0, f0), InvalidArgument);
}

TEST_CASE("integrate") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(integrate([](double x) { return 1.0 / std::sqrt(1.0 - x * x); }, -1.0, 1.0) ==
        doctest::Approx(M_PI).epsilon(1e-8));
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0), InvalidArgument);
}

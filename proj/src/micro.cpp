#include "kinopt/micro.hpp"

#include <algorithm>
#include <cmath>

#include "kinopt/error.hpp"
#include "kinopt/numeric.hpp"
#include "kinopt/optimize.hpp"

namespace kinopt {

namespace {

constexpr double kBracket = 1e3;

void require_valid(const MicroState& state) {
  if (state.ensemble.empty()) throw InvalidArgument("microscopic state needs at least one agent");
  if (!(state.dt > 0.0)) throw InvalidArgument("time step must be positive");
}

// Writes w + dt (K + u Q_i) into `out`, clamping or raising on escape.
void advance(std::vector<double>& out, const OpinionEnsemble& ensemble, const std::vector<double>& drift, double dt,
             double u, const ControlWeight* Q, bool clamp) {
  const std::size_t n = ensemble.size();
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = ensemble[i];
    const double q = Q ? (*Q)(w) : 1.0;
    double next = w + dt * drift[i] + dt * u * q;
    if (!in_opinion_range(next)) {
      if (!clamp) throw BoundViolation(i, next);
      next = std::clamp(next, -1.0, 1.0);
    }
    out[i] = next;
  }
}

std::size_t steps_for(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument(std::string(what) + " is not a multiple of the time step");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

std::vector<double> interaction_drift(const OpinionEnsemble& ensemble, const CompromiseFunction& P, int workers) {
  const std::size_t n = ensemble.size();
  const auto w = ensemble.values();
  std::vector<double> drift(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double wi = w[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += P(wi, w[j]) * (w[j] - wi);
      drift[i] = acc * inv_n;
    }
  });
  return drift;
}

namespace {

double control_from_drift(const OpinionEnsemble& ensemble, const std::vector<double>& drift, double dt,
                          const ControlParams& ctrl) {
  const double mean = ensemble.mean();
  const double mean_drift = compensated_mean(drift);
  const double denom = ctrl.nu + dt * dt;
  const double u = dt / denom * (ctrl.w_d - mean) - dt * dt / denom * mean_drift;
  return ctrl.saturate(u);
}

}  // namespace

double explicit_control(const MicroState& state, const CompromiseFunction& P, const ControlParams& ctrl,
                        int workers) {
  require_valid(state);
  return control_from_drift(state.ensemble, interaction_drift(state.ensemble, P, workers), state.dt, ctrl);
}

MicroStepResult step_micro(const MicroState& state, const CompromiseFunction& P, const ControlParams& ctrl,
                           int workers) {
  require_valid(state);
  const auto drift = interaction_drift(state.ensemble, P, workers);
  const double u = control_from_drift(state.ensemble, drift, state.dt, ctrl);
  std::vector<double> next;
  advance(next, state.ensemble, drift, state.dt, u, nullptr, ctrl.clamp.has_value());
  const auto step = static_cast<std::int64_t>(std::llround(state.time / state.dt));
  return {MicroState{OpinionEnsemble(std::move(next)), state.time + state.dt, state.dt}, ControlRecord{u, step}};
}

MicroStepResult step_micro_q(const MicroState& state, const CompromiseFunction& P, const ControlWeight& Q,
                             const ControlParams& ctrl, int workers) {
  require_valid(state);
  const auto drift = interaction_drift(state.ensemble, P, workers);
  const double dt = state.dt;
  KahanSum num;
  KahanSum q2;
  for (std::size_t j = 0; j < state.ensemble.size(); ++j) {
    const double q = Q(state.ensemble[j]);
    num.add((state.ensemble[j] + dt * drift[j] - ctrl.w_d) * q);
    q2.add(q * q);
  }
  const double n = static_cast<double>(state.ensemble.size());
  const double u = ctrl.saturate(-dt * num.value() / (ctrl.nu * n + dt * dt * q2.value()));
  std::vector<double> next;
  advance(next, state.ensemble, drift, dt, u, &Q, ctrl.clamp.has_value());
  const auto step = static_cast<std::int64_t>(std::llround(state.time / dt));
  return {MicroState{OpinionEnsemble(std::move(next)), state.time + dt, dt}, ControlRecord{u, step}};
}

namespace {

// Uncontrolled predictor in extended precision, computed from P directly.
std::vector<long double> predictor_ld(const MicroState& state, const CompromiseFunction& P) {
  const std::size_t n = state.ensemble.size();
  std::vector<long double> p(n);
  const long double dt = state.dt;
  for (std::size_t j = 0; j < n; ++j) {
    const long double wj = state.ensemble[j];
    long double acc = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      const long double wk = state.ensemble[k];
      acc += static_cast<long double>(P(state.ensemble[j], state.ensemble[k])) * (wk - wj);
    }
    p[j] = wj + dt * acc / static_cast<long double>(n);
  }
  return p;
}

long double cost_from_predictor(const std::vector<long double>& p, long double dt, long double nu, long double w_d,
                                long double u) {
  long double acc = 0.0L;
  for (long double pj : p) {
    const long double e = pj + dt * u - w_d;
    acc += 0.5L * e * e;
  }
  return dt / static_cast<long double>(p.size()) * acc + 0.5L * dt * nu * u * u;
}

}  // namespace

long double discrete_cost(const MicroState& state, const CompromiseFunction& P, const ControlParams& ctrl,
                          long double u) {
  require_valid(state);
  return cost_from_predictor(predictor_ld(state, P), state.dt, ctrl.nu, ctrl.w_d, u);
}

double brute_force_control(const MicroState& state, const CompromiseFunction& P, const ControlParams& ctrl) {
  require_valid(state);
  if (!(ctrl.nu > 0.0)) throw InvalidArgument("penalization nu must be positive");
  const auto p = predictor_ld(state, P);
  const long double dt = state.dt;
  const long double nu = ctrl.nu;
  const long double w_d = ctrl.w_d;
  auto J = [&](long double u) { return cost_from_predictor(p, dt, nu, w_d, u); };

  long double lo = -kBracket;
  long double hi = kBracket;
  if (ctrl.clamp) {
    lo = std::max<long double>(lo, ctrl.clamp->lower);
    hi = std::min<long double>(hi, ctrl.clamp->upper);
  }
  const auto best = golden_section_minimize<long double>(J, lo, hi, 1e-10L);
  const long double edge = 1e-6L;
  const bool at_lower = best.x - (-kBracket) < edge && lo == -kBracket;
  const bool at_upper = kBracket - best.x < edge && hi == kBracket;
  if (at_lower || at_upper || !std::isfinite(static_cast<double>(best.fx))) {
    throw BracketFailure("no interior minimizer of the one-step cost within [-1e3, 1e3]");
  }
  return static_cast<double>(best.x);
}

MicroRun run_micro(const MicroState& initial, const CompromiseFunction& P, const ControlParams& ctrl,
                   const MicroRunOptions& options) {
  require_valid(initial);
  if (!(options.horizon >= 0.0)) throw InvalidArgument("horizon must be nonnegative");
  const std::size_t steps = steps_for(options.horizon, initial.dt, "horizon");
  const std::size_t stride =
      options.record_dt > 0.0 ? std::max<std::size_t>(1, steps_for(options.record_dt, initial.dt, "record_dt")) : 1;

  MicroRun run;
  run.trace.w_d = ctrl.w_d;
  run.final_state = initial;
  run.controls.reserve(steps);
  run.trace.record(initial.time, initial.ensemble.values(), 0.0);
  for (std::size_t n = 1; n <= steps; ++n) {
    auto result = options.Q ? step_micro_q(run.final_state, P, *options.Q, ctrl, options.workers)
                            : step_micro(run.final_state, P, ctrl, options.workers);
    // Keep time on the exact grid instead of accumulating dt.
    result.state.time = initial.time + static_cast<double>(n) * initial.dt;
    run.controls.push_back(result.record);
    run.final_state = std::move(result.state);
    if (n % stride == 0 || n == steps) {
      run.trace.record(run.final_state.time, run.final_state.ensemble.values(), result.record.u);
    }
  }
  return run;
}

}  // namespace kinopt

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kinopt/model.hpp"
#include "kinopt/trace.hpp"

namespace kinopt {

/// State of the N-agent feedback-controlled system at t^n = n dt.
struct MicroState {
  OpinionEnsemble ensemble;
  double time = 0.0;
  double dt = 0.01;
};

struct ControlRecord {
  double u = 0.0;
  std::int64_t step_index = 0;
};

struct MicroStepResult {
  MicroState state;
  ControlRecord record;
};

/// Per-agent interaction drift (1/N) sum_j P(w_i, w_j)(w_j - w_i). Rows are
/// independent, so the result does not depend on `workers`.
std::vector<double> interaction_drift(const OpinionEnsemble& ensemble, const CompromiseFunction& P, int workers = 1);

/// Closed-form receding-horizon control for one explicit Euler step:
///
///   u = dt/(nu + dt^2) (w_d - m) - dt^2/(nu + dt^2) S,
///   S = (1/N^2) sum_{i,j} P(w_i, w_j)(w_j - w_i),
///
/// the solution of the implicit system w^{n+1} = w^n + dt K + dt u,
/// u = -(dt / (nu N)) sum_j (w_j^{n+1} - w_d). Saturated to the clamp.
double explicit_control(const MicroState& state, const CompromiseFunction& P, const ControlParams& ctrl,
                        int workers = 1);

/// One explicit Euler step with the explicit control. Throws BoundViolation if
/// an opinion leaves [-1, 1] and no clamp is configured; with a clamp,
/// opinions are projected back onto [-1, 1].
MicroStepResult step_micro(const MicroState& state, const CompromiseFunction& P, const ControlParams& ctrl,
                           int workers = 1);

/// Step with agent-dependent control action u Q(w_i). The implicit relation
/// u Q_i = -(dt/(nu N)) sum_j (w_j^{n+1} - w_d) Q_j Q_i is linear in u once the
/// uncontrolled predictor is substituted, giving
///
///   u = -dt sum_j (p_j - w_d) Q_j / (nu N + dt^2 sum_j Q_j^2),
///   p_j = w_j + dt K_j.
MicroStepResult step_micro_q(const MicroState& state, const CompromiseFunction& P, const ControlWeight& Q,
                             const ControlParams& ctrl, int workers = 1);

/// Single-step discrete cost J(u) = (dt/N) sum_j 1/2 (w_j^{n+1}(u) - w_d)^2 + (dt nu / 2) u^2,
/// evaluated in extended precision.
long double discrete_cost(const MicroState& state, const CompromiseFunction& P, const ControlParams& ctrl,
                          long double u);

/// Minimizer of `discrete_cost` by golden-section search on [-1e3, 1e3]
/// refined to a bracket of 1e-10. Independent of the closed form; used as an
/// oracle. Throws BracketFailure if the minimum sits on the search boundary.
double brute_force_control(const MicroState& state, const CompromiseFunction& P, const ControlParams& ctrl);

struct MicroRunOptions {
  double horizon = 0.0;
  /// Record spacing; must be a multiple of dt. Zero records every step.
  double record_dt = 0.0;
  /// Use the agent-weighted law when set.
  std::optional<ControlWeight> Q;
  int workers = 1;
};

struct MicroRun {
  /// aux = control applied on the step that produced the record (0 at t = 0).
  MomentTrace trace;
  MicroState final_state;
  std::vector<ControlRecord> controls;
};

MicroRun run_micro(const MicroState& initial, const CompromiseFunction& P, const ControlParams& ctrl,
                   const MicroRunOptions& options);

}  // namespace kinopt

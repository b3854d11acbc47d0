#pragma once

#include <string>
#include <utility>

#include "kinopt/model.hpp"

namespace kinopt {

enum class RuleKind {
  /// Control embedded in the explicit two-agent step; noise added afterwards.
  Base,
  /// Noise enters before the control inversion, so each agent sees both draws.
  NoiseCoupled,
  /// Control driven by the ensemble mean instead of the pair mean.
  MeanControl,
  /// Agent-dependent control action Q(w); coefficient beta(w, v).
  AgentWeighted,
};

/// Two-agent interaction (w, v) -> (w*, v*) with embedded feedback control.
struct BinaryRule {
  RuleKind kind = RuleKind::Base;
  /// Compromise strength alpha = dt / 2.
  double alpha = 0.0;
  /// Microscopic penalization; +inf switches the control off.
  double nu = kInfinity;
  double w_d = 0.0;
  NoiseModel noise;
  CompromiseFunction P = CompromiseFunction::constant();
  DiffusionFunction D = DiffusionFunction::none();
  ControlWeight Q = ControlWeight::uniform();

  /// Control strength 4 alpha^2 / (nu + 4 alpha^2).
  double beta() const noexcept { return std::isinf(nu) ? 0.0 : 4.0 * alpha * alpha / (nu + 4.0 * alpha * alpha); }

  /// 4 alpha^2 Q(w) / (nu + 2 alpha^2 (Q(v)^2 + Q(w)^2)).
  double agent_beta(double w, double v) const noexcept {
    if (std::isinf(nu)) return 0.0;
    const double qw = Q(w);
    const double qv = Q(v);
    return 4.0 * alpha * alpha * qw / (nu + 2.0 * alpha * alpha * (qv * qv + qw * qw));
  }

  /// Rule in the quasi-invariant regime: alpha = eps, nu = eps kappa, uniform
  /// noise with variance eps varsigma (none when varsigma = 0).
  static BinaryRule scaled(RuleKind kind, const ScalingParams& scaling, CompromiseFunction P, DiffusionFunction D,
                           double w_d);
};

/// Evaluates the rule exactly. Candidates may leave [-1, 1]; acceptance is the
/// caller's decision. `mean` is read only by RuleKind::MeanControl.
std::pair<double, double> collide(double w, double v, double theta1, double theta2, const BinaryRule& rule,
                                  double mean = 0.0);

/// Sufficient conditions for the rule to keep both agents in [-1, 1]:
/// beta/2 <= alpha p and |Theta| < d (1 - beta/2), with p = min P on I x I and
/// d = min over D(w) != 0 of (1 - w)/D(w) (and of (1 + w)/D(w) for the lower
/// bound).
struct BoundReport {
  double p = 0.0;
  double d = 0.0;
  double beta = 0.0;
  bool condition_control = false;
  double noise_cap = 0.0;
  /// d (1 - alpha - beta/2): noise bound that also covers agents next to the
  /// boundary interacting with a partner at the opposite extreme.
  double strict_noise_cap = 0.0;
  bool satisfied = false;
  std::string reason;
};

BoundReport check_bounds_conditions(const BinaryRule& rule);

}  // namespace kinopt

#include "kinopt/binary.hpp"

#include <algorithm>
#include <cmath>

#include "kinopt/error.hpp"
#include "kinopt/optimize.hpp"

namespace kinopt {

BinaryRule BinaryRule::scaled(RuleKind kind, const ScalingParams& scaling, CompromiseFunction P,
                              DiffusionFunction D, double w_d) {
  scaling.validate();
  BinaryRule rule;
  rule.kind = kind;
  rule.alpha = scaling.alpha();
  rule.nu = scaling.nu();
  rule.w_d = w_d;
  rule.noise = NoiseModel::for_scaling(scaling);
  rule.P = std::move(P);
  rule.D = std::move(D);
  return rule;
}

std::pair<double, double> collide(double w, double v, double theta1, double theta2, const BinaryRule& rule,
                                  double mean) {
  const double a = rule.alpha;
  const double pwv = rule.P(w, v);
  const double pvw = rule.P(v, w);
  const double dw = rule.D(w);
  const double dv = rule.D(v);
  const double compromise_w = (1.0 - a * pwv) * w + a * pwv * v;
  const double compromise_v = (1.0 - a * pvw) * v + a * pvw * w;

  switch (rule.kind) {
    case RuleKind::Base:
    case RuleKind::NoiseCoupled: {
      const double b = rule.beta();
      // Shared control increment dt u of the inverted 2x2 system.
      const double control = -0.5 * b * ((v - rule.w_d) + (w - rule.w_d)) - a * 0.5 * b * (pwv - pvw) * (v - w);
      if (rule.kind == RuleKind::Base) {
        return {compromise_w + control + theta1 * dw, compromise_v + control + theta2 * dv};
      }
      const double keep = 1.0 - 0.5 * b;
      return {compromise_w + control + keep * theta1 * dw - 0.5 * b * theta2 * dv,
              compromise_v + control + keep * theta2 * dv - 0.5 * b * theta1 * dw};
    }
    case RuleKind::MeanControl: {
      const double b = rule.beta();
      const double control = -b * (mean - rule.w_d) - a * 0.5 * b * (pwv - pvw) * (v - w);
      return {compromise_w + control + theta1 * dw, compromise_v + control + theta2 * dv};
    }
    case RuleKind::AgentWeighted: {
      const double qw = rule.Q(w);
      const double qv = rule.Q(v);
      const double bracket = qv * (v - rule.w_d) + qw * (w - rule.w_d) + a * (qw * pwv - qv * pvw) * (v - w);
      const double bw = rule.agent_beta(w, v);
      const double bv = rule.agent_beta(v, w);
      return {compromise_w - 0.5 * bw * bracket + theta1 * dw, compromise_v - 0.5 * bv * bracket + theta2 * dv};
    }
  }
  return {w, v};
}

namespace {

constexpr int kScanPoints = 2001;  // grid step 1e-3 on [-1, 1]
constexpr double kScanStep = 2.0 / (kScanPoints - 1);

double scan_point(int i) { return -1.0 + kScanStep * i; }

double min_compromise(const CompromiseFunction& P) {
  double best = std::numeric_limits<double>::infinity();
  int bi = 0;
  int bj = 0;
  for (int i = 0; i < kScanPoints; ++i) {
    const double w = scan_point(i);
    for (int j = 0; j < kScanPoints; ++j) {
      const double p = P(w, scan_point(j));
      if (p < best) {
        best = p;
        bi = i;
        bj = j;
      }
    }
  }
  // Local coordinate-wise refinement around the grid minimizer.
  double w = scan_point(bi);
  double v = scan_point(bj);
  for (int pass = 0; pass < 3; ++pass) {
    const double wr = ternary_minimize([&](double x) { return P(x, v); }, std::max(-1.0, w - kScanStep),
                                       std::min(1.0, w + kScanStep));
    if (P(wr, v) < P(w, v)) w = wr;
    const double vr = ternary_minimize([&](double x) { return P(w, x); }, std::max(-1.0, v - kScanStep),
                                       std::min(1.0, v + kScanStep));
    if (P(w, vr) < P(w, v)) v = vr;
  }
  return std::min(best, P(w, v));
}

// min over D(w) != 0 of (1 - |w| side distance) / D(w); +inf when D vanishes.
double min_diffusion_ratio(const DiffusionFunction& D) {
  if (D.kind() == DiffusionFunction::Kind::None) return std::numeric_limits<double>::infinity();
  auto ratio = [&D](double w) {
    const double d = D(w);
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    return std::min(1.0 - w, 1.0 + w) / d;
  };
  double best = std::numeric_limits<double>::infinity();
  int bi = -1;
  for (int i = 0; i < kScanPoints; ++i) {
    const double r = ratio(scan_point(i));
    if (r < best) {
      best = r;
      bi = i;
    }
  }
  if (bi < 0) return best;
  const double w0 = scan_point(bi);
  // Refine on both neighbouring cells separately; the ratio can be monotone
  // towards a boundary where D vanishes.
  for (double lo : {w0 - kScanStep, w0}) {
    const double a = std::max(-1.0, lo);
    const double b = std::min(1.0, lo + kScanStep);
    if (b <= a) continue;
    best = std::min(best, ratio(ternary_minimize(ratio, a, b)));
  }
  return best;
}

}  // namespace

BoundReport check_bounds_conditions(const BinaryRule& rule) {
  BoundReport report;
  if (rule.kind == RuleKind::AgentWeighted) {
    double b = 0.0;
    for (int i = 0; i < 201; ++i) {
      for (int j = 0; j < 201; ++j) b = std::max(b, rule.agent_beta(-1.0 + 0.01 * i, -1.0 + 0.01 * j));
    }
    report.beta = b;
  } else {
    report.beta = rule.beta();
  }
  report.p = min_compromise(rule.P);
  report.d = min_diffusion_ratio(rule.D);
  report.condition_control = 0.5 * report.beta <= rule.alpha * report.p;
  report.noise_cap = report.d * (1.0 - 0.5 * report.beta);
  report.strict_noise_cap = report.d * (1.0 - rule.alpha - 0.5 * report.beta);
  const double half_width = rule.noise.kind == NoiseModel::Kind::Uniform ? rule.noise.half_width : 0.0;
  const bool noise_ok = half_width < report.noise_cap || (half_width == 0.0 && report.d > 0.0);

  if (!(report.p > 0.0)) {
    report.reason = "p <= 0";
  } else if (!rule.P.bounded_unit()) {
    report.reason = "P exceeds 1";
  } else if (!report.condition_control) {
    report.reason = "beta/2 > alpha p";
  } else if (!noise_ok) {
    report.reason = "noise half-width >= d (1 - beta/2)";
  }
  report.satisfied = report.reason.empty();
  return report;
}

}  // namespace kinopt

#include "kinopt/model.hpp"

#include <algorithm>
#include <sstream>

#include "kinopt/error.hpp"
#include "kinopt/numeric.hpp"
#include "kinopt/rng.hpp"

namespace kinopt {

namespace {

constexpr int kGridPoints = 201;  // step 0.01 on [-1, 1]

double grid_point(int i) { return -1.0 + 2.0 * static_cast<double>(i) / (kGridPoints - 1); }

}  // namespace

OpinionEnsemble::OpinionEnsemble(std::vector<double> opinions) : opinions_(std::move(opinions)) {
  if (opinions_.empty()) throw InvalidArgument("opinion ensemble must not be empty");
  for (std::size_t i = 0; i < opinions_.size(); ++i) {
    if (!in_opinion_range(opinions_[i])) {
      throw InvalidArgument("opinion " + std::to_string(i) + " = " + std::to_string(opinions_[i]) +
                            " outside [-1,1]");
    }
  }
}

OpinionEnsemble OpinionEnsemble::uniform(std::size_t count, double lo, double hi, std::uint64_t seed) {
  if (!(lo < hi) || !in_opinion_range(lo) || !in_opinion_range(hi)) {
    throw InvalidArgument("uniform initial data needs -1 <= lo < hi <= 1");
  }
  SplitMix64 rng(derive_seed(seed, "initial"));
  std::vector<double> w(count);
  for (auto& x : w) x = rng.uniform(lo, hi);
  return OpinionEnsemble(std::move(w));
}

OpinionEnsemble OpinionEnsemble::grid(std::size_t count, double lo, double hi) {
  if (!(lo < hi) || !in_opinion_range(lo) || !in_opinion_range(hi)) {
    throw InvalidArgument("grid initial data needs -1 <= lo < hi <= 1");
  }
  std::vector<double> w(count);
  const double h = (hi - lo) / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) w[i] = lo + h * (static_cast<double>(i) + 0.5);
  return OpinionEnsemble(std::move(w));
}

double OpinionEnsemble::mean() const { return compensated_mean(opinions_); }

double OpinionEnsemble::second_moment() const {
  KahanSum s;
  for (double w : opinions_) s.add(w * w);
  return opinions_.empty() ? 0.0 : s.value() / static_cast<double>(opinions_.size());
}

double OpinionEnsemble::variance() const {
  const double m = mean();
  KahanSum s;
  for (double w : opinions_) s.add((w - m) * (w - m));
  return opinions_.empty() ? 0.0 : s.value() / static_cast<double>(opinions_.size());
}

CompromiseFunction::CompromiseFunction(Kind kind, double gamma, double delta, Evaluator evaluator,
                                       std::string name)
    : kind_(kind), gamma_(gamma), delta_(delta), evaluator_(std::move(evaluator)), name_(std::move(name)) {
  bool bounded = true;
  bool symmetric = true;
  for (int i = 0; i < kGridPoints; ++i) {
    for (int j = 0; j < kGridPoints; ++j) {
      const double p = (*this)(grid_point(i), grid_point(j));
      if (!(p >= 0.0 && p <= 1.0)) bounded = false;
      if (p != (*this)(grid_point(j), grid_point(i))) symmetric = false;
    }
  }
  bounded_unit_ = bounded;
  symmetric_ = symmetric;
}

CompromiseFunction CompromiseFunction::constant() { return {Kind::Constant, 0.0, 2.0, {}, "constant"}; }

CompromiseFunction CompromiseFunction::sznajd(double gamma) {
  if (!std::isfinite(gamma)) throw InvalidArgument("sznajd gamma must be finite");
  return {Kind::Sznajd, gamma, 2.0, {}, "sznajd"};
}

CompromiseFunction CompromiseFunction::bounded_confidence(double delta) {
  if (!(delta > 0.0 && delta <= 2.0)) {
    throw InvalidArgument("bounded confidence delta must lie in (0, 2], got " + std::to_string(delta));
  }
  return {Kind::BoundedConfidence, 0.0, delta, {}, "bounded_confidence"};
}

CompromiseFunction CompromiseFunction::custom(Evaluator evaluator, std::string name) {
  if (!evaluator) throw InvalidArgument("custom compromise function needs an evaluator");
  return {Kind::Custom, 0.0, 2.0, std::move(evaluator), std::move(name)};
}

DiffusionFunction DiffusionFunction::none() { return {Kind::None, {}, "none"}; }

DiffusionFunction DiffusionFunction::quadratic() { return {Kind::Quadratic, {}, "quadratic"}; }

DiffusionFunction DiffusionFunction::custom(Evaluator evaluator, std::string name) {
  if (!evaluator) throw InvalidArgument("custom diffusion function needs an evaluator");
  for (int i = 0; i < kGridPoints; ++i) {
    const double d = evaluator(grid_point(i));
    if (!(d >= 0.0 && d <= 1.0)) {
      throw InvalidArgument("diffusion function must satisfy 0 <= D(w) <= 1; D(" +
                            std::to_string(grid_point(i)) + ") = " + std::to_string(d));
    }
  }
  return {Kind::Custom, std::move(evaluator), std::move(name)};
}

ControlWeight ControlWeight::uniform() { return {Kind::Uniform, {}, "uniform"}; }

ControlWeight ControlWeight::custom(Evaluator evaluator, std::string name) {
  if (!evaluator) throw InvalidArgument("custom control weight needs an evaluator");
  // Denser than the P/D grid: Q enters a denominator.
  constexpr int kPoints = 2001;
  for (int i = 0; i < kPoints; ++i) {
    const double w = -1.0 + 2.0 * i / (kPoints - 1.0);
    const double q = evaluator(w);
    if (!(q > 0.0 && q <= 1.0)) {
      throw InvalidArgument("control weight must satisfy 0 < Q(w) <= 1; Q(" + std::to_string(w) +
                            ") = " + std::to_string(q));
    }
  }
  return {Kind::Custom, std::move(evaluator), std::move(name)};
}

void ScalingParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be positive");
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive or +inf");
  if (!(varsigma >= 0.0) || !std::isfinite(varsigma)) throw InvalidArgument("varsigma must be nonnegative");
}

NoiseModel NoiseModel::uniform(double half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidArgument("uniform noise half-width must be positive");
  }
  return {Kind::Uniform, half_width};
}

NoiseModel NoiseModel::for_scaling(const ScalingParams& scaling) {
  if (scaling.varsigma == 0.0) return none();
  return uniform(std::sqrt(3.0 * scaling.epsilon * scaling.varsigma));
}

bool ValidationReport::ok() const noexcept { return errors() == 0; }

std::size_t ValidationReport::warnings() const noexcept {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) {
    return c.severity == ValidationCheck::Severity::Warning;
  }));
}

std::size_t ValidationReport::errors() const noexcept {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) {
    return c.severity == ValidationCheck::Severity::Error;
  }));
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    switch (c.severity) {
      case ValidationCheck::Severity::Pass: out << "[PASS] "; break;
      case ValidationCheck::Severity::Warning: out << "[WARN] "; break;
      case ValidationCheck::Severity::Error: out << "[FAIL] "; break;
    }
    out << c.name;
    if (!c.message.empty()) out << ": " << c.message;
    out << '\n';
  }
  return out.str();
}

ValidationReport validate_spec(const ModelSpec& model) {
  using Severity = ValidationCheck::Severity;
  ValidationReport report;
  auto add = [&report](std::string name, bool pass, Severity failure, std::string message) {
    report.checks.push_back({std::move(name), pass ? Severity::Pass : failure, pass ? std::string{} : std::move(message)});
  };

  add("nu > 0", model.control.nu > 0.0, Severity::Error,
      "penalization nu must be positive, got " + std::to_string(model.control.nu));
  add("w_d in [-1,1]", in_opinion_range(model.control.w_d), Severity::Error, "desired state outside [-1,1]");
  if (model.control.clamp) {
    add("clamp u_L < u_R", model.control.clamp->lower < model.control.clamp->upper, Severity::Error,
        "clamp interval is empty");
  }

  if (model.P.kind() == CompromiseFunction::Kind::BoundedConfidence) {
    add("delta > 0", model.P.delta() > 0.0, Severity::Error, "confidence bound must be positive");
  }
  add("P in [0,1]", model.P.bounded_unit(), Severity::Warning,
      "P not in [0,1]; bound preservation not guaranteed, rejection kernel required");

  if (model.noise.kind == NoiseModel::Kind::Uniform) {
    add("noise half-width > 0", model.noise.half_width > 0.0, Severity::Error, "noise half-width must be positive");
  }

  if (model.scaling) {
    bool scaling_ok = true;
    std::string why;
    try {
      model.scaling->validate();
    } catch (const Error& e) {
      scaling_ok = false;
      why = e.what();
    }
    add("scaling parameters", scaling_ok, Severity::Error, why);
  }

  if (model.opinions) {
    const auto& w = *model.opinions;
    add("ensemble non-empty", !w.empty(), Severity::Error, "empty ensemble");
    std::size_t bad = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!in_opinion_range(w[i])) {
        bad = i;
        break;
      }
    }
    add("opinions in [-1,1]", bad == w.size(), Severity::Error,
        bad < w.size() ? "opinion " + std::to_string(bad) + " = " + std::to_string(w[bad]) + " outside [-1,1]"
                       : std::string{});
  }
  return report;
}

}  // namespace kinopt

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kinopt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// True when |w| <= 1.
constexpr bool in_opinion_range(double w) noexcept { return w >= -1.0 && w <= 1.0; }

/// Population of opinions in [-1, 1]. The empirical measure of the kinetic
/// density.
class OpinionEnsemble {
 public:
  OpinionEnsemble() = default;

  /// Throws InvalidArgument when empty or when any value is outside [-1, 1].
  explicit OpinionEnsemble(std::vector<double> opinions);

  /// `count` samples uniform on [lo, hi) drawn from `seed`.
  static OpinionEnsemble uniform(std::size_t count, double lo, double hi, std::uint64_t seed);

  /// Midpoint grid of `count` points on [lo, hi].
  static OpinionEnsemble grid(std::size_t count, double lo = -1.0, double hi = 1.0);

  std::size_t size() const noexcept { return opinions_.size(); }
  bool empty() const noexcept { return opinions_.empty(); }
  double operator[](std::size_t i) const { return opinions_[i]; }
  std::span<const double> values() const noexcept { return opinions_; }

  /// Raw write access for the solvers. Callers are responsible for the bounds.
  std::vector<double>& mutable_values() noexcept { return opinions_; }

  double mean() const;
  double second_moment() const;
  /// Centered variance (population normalization).
  double variance() const;

  bool operator==(const OpinionEnsemble&) const = default;

 private:
  std::vector<double> opinions_;
};

/// Compromise propensity P(w, v).
class CompromiseFunction {
 public:
  enum class Kind { Constant, Sznajd, BoundedConfidence, Custom };
  using Evaluator = std::function<double(double, double)>;

  static CompromiseFunction constant();
  /// P(w, v) = gamma (1 - w^2).
  static CompromiseFunction sznajd(double gamma);
  /// P(w, v) = 1 if |w - v| <= delta else 0; delta in (0, 2].
  static CompromiseFunction bounded_confidence(double delta);
  static CompromiseFunction custom(Evaluator evaluator, std::string name = "custom");

  double operator()(double w, double v) const {
    switch (kind_) {
      case Kind::Constant: return 1.0;
      case Kind::Sznajd: return gamma_ * (1.0 - w) * (1.0 + w);
      case Kind::BoundedConfidence: return std::abs(w - v) <= delta_ ? 1.0 : 0.0;
      case Kind::Custom: return evaluator_(w, v);
    }
    return 0.0;
  }

  Kind kind() const noexcept { return kind_; }
  double gamma() const noexcept { return gamma_; }
  double delta() const noexcept { return delta_; }
  const std::string& name() const noexcept { return name_; }

  /// 0 <= P <= 1 on the 201x201 grid of I x I (computed at construction).
  bool bounded_unit() const noexcept { return bounded_unit_; }
  /// P(w, v) == P(v, w) (exact for the built-ins, grid scan for Custom).
  bool symmetric() const noexcept { return symmetric_; }

 private:
  CompromiseFunction(Kind kind, double gamma, double delta, Evaluator evaluator, std::string name);

  Kind kind_ = Kind::Constant;
  double gamma_ = 0.0;
  double delta_ = 2.0;
  Evaluator evaluator_;
  std::string name_;
  bool bounded_unit_ = true;
  bool symmetric_ = true;
};

/// Local relevance of the diffusion, 0 <= D(w) <= 1.
class DiffusionFunction {
 public:
  enum class Kind { None, Quadratic, Custom };
  using Evaluator = std::function<double(double)>;

  static DiffusionFunction none();
  /// D(w) = 1 - w^2.
  static DiffusionFunction quadratic();
  /// Throws InvalidArgument if 0 <= D <= 1 fails on the grid.
  static DiffusionFunction custom(Evaluator evaluator, std::string name = "custom");

  double operator()(double w) const {
    switch (kind_) {
      case Kind::None: return 0.0;
      case Kind::Quadratic: return (1.0 - w) * (1.0 + w);
      case Kind::Custom: return evaluator_(w);
    }
    return 0.0;
  }

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  DiffusionFunction(Kind kind, Evaluator evaluator, std::string name)
      : kind_(kind), evaluator_(std::move(evaluator)), name_(std::move(name)) {}

  Kind kind_ = Kind::None;
  Evaluator evaluator_;
  std::string name_ = "none";
};

/// Agent-dependent action of the control, 0 < Q(w) <= 1.
class ControlWeight {
 public:
  enum class Kind { Uniform, Custom };
  using Evaluator = std::function<double(double)>;

  static ControlWeight uniform();
  /// Throws InvalidArgument if 0 < Q <= 1 fails on the validation grid.
  static ControlWeight custom(Evaluator evaluator, std::string name = "custom");

  double operator()(double w) const { return kind_ == Kind::Uniform ? 1.0 : evaluator_(w); }

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  ControlWeight(Kind kind, Evaluator evaluator, std::string name)
      : kind_(kind), evaluator_(std::move(evaluator)), name_(std::move(name)) {}

  Kind kind_ = Kind::Uniform;
  Evaluator evaluator_;
  std::string name_ = "uniform";
};

struct ControlClamp {
  double lower = -kInfinity;
  double upper = kInfinity;

  bool operator==(const ControlClamp&) const = default;
};

/// Target state and microscopic penalization of the receding-horizon control.
struct ControlParams {
  double w_d = 0.0;
  double nu = 1.0;
  std::optional<ControlClamp> clamp;

  /// Saturates u into the clamp interval when one is configured.
  double saturate(double u) const noexcept {
    if (!clamp) return u;
    return u < clamp->lower ? clamp->lower : (u > clamp->upper ? clamp->upper : u);
  }

  bool operator==(const ControlParams&) const = default;
};

/// Quasi-invariant scaling: alpha = eps, eta = 1/eps, sigma^2 = eps * varsigma,
/// nu = eps * kappa. Derived values are computed on demand.
struct ScalingParams {
  double epsilon = 0.01;
  double kappa = kInfinity;
  double varsigma = 0.0;

  double alpha() const noexcept { return epsilon; }
  double eta() const noexcept { return 1.0 / epsilon; }
  /// 4 eps / (kappa + 4 eps); exactly 0 for kappa = +inf.
  double beta() const noexcept { return std::isinf(kappa) ? 0.0 : 4.0 * epsilon / (kappa + 4.0 * epsilon); }
  double noise_variance() const noexcept { return epsilon * varsigma; }
  /// Microscopic penalization nu = eps * kappa.
  double nu() const noexcept { return epsilon * kappa; }

  /// Throws InvalidArgument for eps <= 0, kappa <= 0 or varsigma < 0.
  void validate() const;

  bool operator==(const ScalingParams&) const = default;
};

/// Zero-mean noise Theta added to the binary interactions.
struct NoiseModel {
  enum class Kind { None, Uniform };

  Kind kind = Kind::None;
  double half_width = 0.0;

  static NoiseModel none() { return {}; }
  /// Uniform on (-half_width, half_width); throws for half_width <= 0.
  static NoiseModel uniform(double half_width);
  /// Uniform with variance eps * varsigma, i.e. half_width = sqrt(3 eps varsigma).
  /// Returns none() when varsigma == 0.
  static NoiseModel for_scaling(const ScalingParams& scaling);

  double variance() const noexcept { return kind == Kind::Uniform ? half_width * half_width / 3.0 : 0.0; }

  /// Maps a uniform draw on [0, 1) to a noise sample.
  double sample(double u01) const noexcept {
    return kind == Kind::Uniform ? half_width * (2.0 * u01 - 1.0) : 0.0;
  }

  bool operator==(const NoiseModel&) const = default;
};

/// Everything `validate_spec` inspects. `opinions` is raw so that invalid
/// initial data can be reported instead of thrown.
struct ModelSpec {
  CompromiseFunction P = CompromiseFunction::constant();
  DiffusionFunction D = DiffusionFunction::none();
  ControlWeight Q = ControlWeight::uniform();
  NoiseModel noise;
  ControlParams control;
  std::optional<ScalingParams> scaling;
  std::optional<std::vector<double>> opinions;
};

struct ValidationCheck {
  enum class Severity { Pass, Warning, Error };

  std::string name;
  Severity severity = Severity::Pass;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const noexcept;
  std::size_t warnings() const noexcept;
  std::size_t errors() const noexcept;
  /// One line per check: "[PASS] name", "[WARN] name: message", ...
  std::string to_string() const;
};

ValidationReport validate_spec(const ModelSpec& model);

}  // namespace kinopt

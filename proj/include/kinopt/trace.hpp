#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kinopt {

/// Time series of moments. `aux` carries the applied control u (microscopic
/// runs) or the collision rejection rate since the previous record (DSMC).
struct MomentTrace {
  double w_d = 0.0;
  std::vector<double> t;
  std::vector<double> m;
  std::vector<double> E;
  /// Centered variance; kept separately so stderr does not suffer from E - m^2.
  std::vector<double> var;
  std::vector<double> aux;
  /// Filled only when several repetitions are averaged.
  std::vector<double> m_stderr;

  std::size_t size() const noexcept { return t.size(); }
  bool empty() const noexcept { return t.empty(); }

  /// Appends moments of the sample (compensated sums).
  void record(double time, std::span<const double> opinions, double aux_value);
  /// Appends explicit values (used by the moment ODE).
  void record(double time, double mean, double second_moment, double aux_value);

  /// |m - w_d| at record i.
  double dist_wd(std::size_t i) const;
  /// Integral of (w - w_d)^2 f = E - 2 m w_d + w_d^2 at record i.
  double dist2_wd(std::size_t i) const;

  /// Linear interpolation of m at time `time`; throws InvalidArgument outside the range.
  double mean_at(double time) const;
};

}  // namespace kinopt

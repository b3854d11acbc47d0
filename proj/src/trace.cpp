#include "kinopt/trace.hpp"

#include <algorithm>
#include <cmath>

#include "kinopt/error.hpp"
#include "kinopt/numeric.hpp"

namespace kinopt {

void MomentTrace::record(double time, std::span<const double> opinions, double aux_value) {
  const double n = static_cast<double>(opinions.size());
  KahanSum s1;
  KahanSum s2;
  for (double w : opinions) {
    s1.add(w);
    s2.add(w * w);
  }
  const double mean = s1.value() / n;
  KahanSum sv;
  for (double w : opinions) sv.add((w - mean) * (w - mean));
  t.push_back(time);
  m.push_back(mean);
  E.push_back(s2.value() / n);
  var.push_back(sv.value() / n);
  aux.push_back(aux_value);
}

void MomentTrace::record(double time, double mean, double second_moment, double aux_value) {
  t.push_back(time);
  m.push_back(mean);
  E.push_back(second_moment);
  var.push_back(std::max(0.0, second_moment - mean * mean));
  aux.push_back(aux_value);
}

double MomentTrace::dist_wd(std::size_t i) const { return std::abs(m.at(i) - w_d); }

double MomentTrace::dist2_wd(std::size_t i) const { return E.at(i) - 2.0 * m.at(i) * w_d + w_d * w_d; }

double MomentTrace::mean_at(double time) const {
  if (t.empty()) throw InvalidArgument("empty trace");
  const double tol = 1e-9 * std::max(1.0, std::abs(t.back()));
  if (time < t.front() - tol || time > t.back() + tol) {
    throw InvalidArgument("time " + std::to_string(time) + " outside trace range");
  }
  const auto it = std::lower_bound(t.begin(), t.end(), time - tol);
  const auto i = static_cast<std::size_t>(it - t.begin());
  if (i >= t.size()) return m.back();
  if (std::abs(t[i] - time) <= tol || i == 0) return m[i];
  const double a = (time - t[i - 1]) / (t[i] - t[i - 1]);
  return (1.0 - a) * m[i - 1] + a * m[i];
}

}  // namespace kinopt

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "kinopt/model.hpp"
#include "kinopt/trace.hpp"

namespace kinopt {

/// Uniform-width histogram on [-1, 1].
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  /// counts / (total * width): integrates to one.
  std::vector<double> density;

  std::size_t bins() const noexcept { return counts.size(); }
  double width(std::size_t k) const { return edges[k + 1] - edges[k]; }
  std::size_t total() const noexcept;
};

/// Throws InvalidArgument for fewer than 2 samples or fewer than 2 bins. The
/// value w = 1 falls in the last bin.
Histogram histogram(std::span<const double> samples, std::size_t bins);
Histogram histogram(const OpinionEnsemble& ensemble, std::size_t bins);

/// Bin averages (1/width) int_{bin} f of a density, by quadrature.
std::vector<double> bin_averages(const std::function<double(double)>& f, std::span<const double> edges);

/// sum_k |density_k - fbar_k| width_k with fbar_k the bin average of f.
double l1_distance(const Histogram& h, const std::function<double(double)>& f);
/// Same, with precomputed bin averages on h's edges.
double l1_distance(const Histogram& h, std::span<const double> bin_average);
/// Between two histograms on identical edges.
double l1_distance(const Histogram& a, const Histogram& b);

/// |m(T) - w_d| with m interpolated on the trace.
double mean_error_l2(const MomentTrace& trace, double w_d, double T);

/// Number of groups in the sorted opinions separated by gaps larger than `gap`.
std::size_t count_clusters(std::span<const double> opinions, double gap);
std::size_t count_clusters(const OpinionEnsemble& ensemble, double gap);

struct Cluster {
  double center = 0.0;  // mean of the members
  double lo = 0.0;
  double hi = 0.0;
  std::size_t size = 0;
};

/// The clusters counted by count_clusters, in increasing order.
std::vector<Cluster> clusters(std::span<const double> opinions, double gap);

/// sup_w |F_n(w) - F(w)| for the empirical CDF of the samples.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

}  // namespace kinopt

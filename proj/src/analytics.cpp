#include "kinopt/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kinopt/error.hpp"
#include "kinopt/fokker_planck.hpp"

namespace kinopt {

std::size_t Histogram::total() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

Histogram histogram(std::span<const double> samples, std::size_t bins) {
  if (samples.size() < 2) throw InvalidArgument("histogram needs at least 2 samples");
  if (bins < 2) throw InvalidArgument("histogram needs at least 2 bins");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) h.edges[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(bins);
  h.edges.back() = 1.0;
  h.counts.assign(bins, 0);
  const double scale = static_cast<double>(bins) / 2.0;
  for (double w : samples) {
    if (!in_opinion_range(w)) throw InvalidArgument("histogram sample outside [-1, 1]");
    auto k = static_cast<std::size_t>((w + 1.0) * scale);
    k = std::min(k, bins - 1);
    // Floating rounding can put an edge value one bin off; fix against edges.
    if (k > 0 && w < h.edges[k]) --k;
    if (k + 1 < bins && w >= h.edges[k + 1]) ++k;
    ++h.counts[k];
  }
  const double n = static_cast<double>(samples.size());
  h.density.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) h.density[k] = static_cast<double>(h.counts[k]) / (n * h.width(k));
  return h;
}

Histogram histogram(const OpinionEnsemble& ensemble, std::size_t bins) { return histogram(ensemble.values(), bins); }

std::vector<double> bin_averages(const std::function<double(double)>& f, std::span<const double> edges) {
  if (edges.size() < 2) throw InvalidArgument("need at least one bin");
  std::vector<double> out(edges.size() - 1);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double width = edges[k + 1] - edges[k];
    out[k] = integrate(f, edges[k], edges[k + 1], 1e-10) / width;
  }
  return out;
}

double l1_distance(const Histogram& h, std::span<const double> bin_average) {
  if (bin_average.size() != h.bins()) throw InvalidArgument("bin average count does not match the histogram");
  double acc = 0.0;
  for (std::size_t k = 0; k < h.bins(); ++k) acc += std::abs(h.density[k] - bin_average[k]) * h.width(k);
  return acc;
}

double l1_distance(const Histogram& h, const std::function<double(double)>& f) {
  return l1_distance(h, bin_averages(f, h.edges));
}

double l1_distance(const Histogram& a, const Histogram& b) {
  if (a.edges != b.edges) throw InvalidArgument("histograms must share their bin edges");
  return l1_distance(a, b.density);
}

double mean_error_l2(const MomentTrace& trace, double w_d, double T) { return std::abs(trace.mean_at(T) - w_d); }

std::vector<Cluster> clusters(std::span<const double> opinions, double gap) {
  if (!(gap > 0.0)) throw InvalidArgument("cluster gap must be positive");
  std::vector<double> sorted(opinions.begin(), opinions.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Cluster> out;
  std::size_t start = 0;
  auto close = [&](std::size_t end) {
    Cluster c;
    c.lo = sorted[start];
    c.hi = sorted[end - 1];
    c.size = end - start;
    double acc = 0.0;
    for (std::size_t i = start; i < end; ++i) acc += sorted[i];
    c.center = acc / static_cast<double>(c.size);
    out.push_back(c);
  };
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] - sorted[i - 1] > gap) {
      close(i);
      start = i;
    }
  }
  if (!sorted.empty()) close(sorted.size());
  return out;
}

std::size_t count_clusters(std::span<const double> opinions, double gap) { return clusters(opinions, gap).size(); }

std::size_t count_clusters(const OpinionEnsemble& ensemble, double gap) {
  return count_clusters(ensemble.values(), gap);
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidArgument("KS distance needs samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace kinopt

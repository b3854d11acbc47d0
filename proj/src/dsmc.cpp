#include "kinopt/dsmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kinopt/error.hpp"
#include "kinopt/numeric.hpp"
#include "kinopt/rng.hpp"

namespace kinopt {

namespace {

// Substream indices reserved for the per-step draws that are not pair-local.
constexpr std::uint64_t kCountStream = ~std::uint64_t{0};
constexpr std::uint64_t kPermStream = ~std::uint64_t{0} - 1;

std::size_t steps_for(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument(std::string(what) + " is not a multiple of the Monte Carlo time step");
  }
  return static_cast<std::size_t>(rounded);
}

void check_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("collision probability eta*dt must lie in (0, 1]");
}

}  // namespace

DsmcStepResult dsmc_step(OpinionEnsemble& ensemble, const BinaryRule& rule, std::uint64_t step,
                         const DsmcOptions& options, std::vector<std::uint32_t>& order) {
  const std::size_t n = ensemble.size();
  if (n < 2 || n % 2 != 0) {
    throw PairingError("pairwise stepping needs an even ensemble of at least 2 agents, got " + std::to_string(n));
  }
  check_probability(options.collision_probability);
  if (order.size() != n) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::uint32_t{0});
  }

  const std::size_t half = n / 2;
  std::size_t pairs = half;
  if (options.collision_probability < 1.0) {
    SplitMix64 count_rng(derive_seed(options.seed, step, kCountStream));
    std::binomial_distribution<std::size_t> count(half, options.collision_probability);
    pairs = count(count_rng);
  }

  // Partial Fisher-Yates: the first 2 * pairs slots become a uniform random
  // ordered sample, regardless of the permutation left by earlier steps.
  SplitMix64 perm_rng(derive_seed(options.seed, step, kPermStream));
  for (std::size_t i = 0; i < 2 * pairs; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(perm_rng.below(n - i));
    std::swap(order[i], order[j]);
  }

  const double mean = rule.kind == RuleKind::MeanControl ? ensemble.mean() : 0.0;
  const bool noisy = rule.noise.kind != NoiseModel::Kind::None;
  auto& w = ensemble.mutable_values();

  std::vector<std::size_t> rejected(chunk_count(pairs, options.workers), 0);
  parallel_for_chunks(pairs, options.workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::size_t local = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint32_t a = order[2 * k];
      const std::uint32_t b = order[2 * k + 1];
      double theta1 = 0.0;
      double theta2 = 0.0;
      if (noisy) {
        SplitMix64 rng(derive_seed(options.seed, step, k));
        theta1 = rule.noise.sample(rng.uniform());
        theta2 = rule.noise.sample(rng.uniform());
      }
      const auto [ws, vs] = collide(w[a], w[b], theta1, theta2, rule, mean);
      if (in_opinion_range(ws) && in_opinion_range(vs)) {
        w[a] = ws;
        w[b] = vs;
      } else {
        ++local;
      }
    }
    rejected[chunk] = local;
  });

  DsmcStepResult result;
  result.collisions = pairs;
  result.rejections = std::accumulate(rejected.begin(), rejected.end(), std::size_t{0});
  return result;
}

DsmcSolver::DsmcSolver(OpinionEnsemble initial, BinaryRule rule, const ScalingParams& scaling, DsmcOptions options)
    : ensemble_(std::move(initial)), rule_(std::move(rule)), options_(options) {
  scaling.validate();
  check_probability(options_.collision_probability);
  dt_ = options_.collision_probability / scaling.eta();
}

DsmcStepResult DsmcSolver::step() {
  const auto result = dsmc_step(ensemble_, rule_, steps_, options_, order_);
  ++steps_;
  return result;
}

DsmcRun run_dsmc(const OpinionEnsemble& initial, const BinaryRule& rule, const ScalingParams& scaling,
                 double horizon, double record_dt, const DsmcOptions& options) {
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be nonnegative");
  DsmcSolver solver(initial, rule, scaling, options);
  const std::size_t steps = steps_for(horizon, solver.dt(), "horizon");
  const std::size_t stride = record_dt > 0.0 ? std::max<std::size_t>(1, steps_for(record_dt, solver.dt(), "record_dt")) : 1;

  DsmcRun run;
  run.trace.w_d = rule.w_d;
  run.trace.record(0.0, solver.ensemble().values(), 0.0);
  std::size_t window_collisions = 0;
  std::size_t window_rejections = 0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const auto r = solver.step();
    window_collisions += r.collisions;
    window_rejections += r.rejections;
    if (s % stride == 0 || s == steps) {
      const double rate =
          window_collisions == 0 ? 0.0 : static_cast<double>(window_rejections) / static_cast<double>(window_collisions);
      run.trace.record(solver.time(), solver.ensemble().values(), rate);
      run.collisions += window_collisions;
      run.rejections += window_rejections;
      window_collisions = 0;
      window_rejections = 0;
    }
  }
  run.final_ensemble = solver.ensemble();
  return run;
}

}  // namespace kinopt

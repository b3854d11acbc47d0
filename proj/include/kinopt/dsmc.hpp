#pragma once

#include <cstdint>
#include <vector>

#include "kinopt/binary.hpp"
#include "kinopt/model.hpp"
#include "kinopt/trace.hpp"

namespace kinopt {

struct DsmcOptions {
  /// eta * dt_mc in (0, 1]. 1 means every pair collides each step and
  /// dt_mc = eps; smaller values thin the collisions (Bernoulli per pair) and
  /// shrink the step accordingly.
  double collision_probability = 1.0;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct DsmcStepResult {
  std::size_t collisions = 0;
  std::size_t rejections = 0;
};

/// One Nanbu-type step. A uniformly random set of disjoint pairs is drawn
/// (partial Fisher-Yates on `order`, which persists between calls); each pair
/// collides with probability eta dt_mc. Noise and acceptance for pair k come
/// from the substream (seed, step, k), so the result is independent of the
/// worker count. A collision producing a candidate outside [-1, 1] is
/// discarded whole. Throws PairingError for an odd ensemble.
DsmcStepResult dsmc_step(OpinionEnsemble& ensemble, const BinaryRule& rule, std::uint64_t step,
                         const DsmcOptions& options, std::vector<std::uint32_t>& order);

struct DsmcRun {
  /// aux = rejection rate (rejections / collisions) since the previous record.
  MomentTrace trace;
  OpinionEnsemble final_ensemble;
  std::size_t collisions = 0;
  std::size_t rejections = 0;
};

/// Runs the particle solver to `horizon` with dt_mc = p eps, recording every
/// `record_dt` (a multiple of dt_mc; zero records every step).
DsmcRun run_dsmc(const OpinionEnsemble& initial, const BinaryRule& rule, const ScalingParams& scaling,
                 double horizon, double record_dt, const DsmcOptions& options);

/// Incremental form of run_dsmc for callers that need intermediate states.
class DsmcSolver {
 public:
  DsmcSolver(OpinionEnsemble initial, BinaryRule rule, const ScalingParams& scaling, DsmcOptions options);

  DsmcStepResult step();

  const OpinionEnsemble& ensemble() const noexcept { return ensemble_; }
  double time() const noexcept { return static_cast<double>(steps_) * dt_; }
  double dt() const noexcept { return dt_; }
  std::uint64_t steps() const noexcept { return steps_; }

 private:
  OpinionEnsemble ensemble_;
  BinaryRule rule_;
  DsmcOptions options_;
  double dt_;
  std::uint64_t steps_ = 0;
  std::vector<std::uint32_t> order_;
};

}  // namespace kinopt

#pragma once

// Update rules:
//  * Euclidean Adam for unconstrained parameters (gradient-module weights),
//  * Adam on the homogeneous space O(N)/O(N-n) for Stiefel weights: lift the
//    Riemannian gradient to g^{hor,E}, run Adam there, retract,
//  * StiefelAdam: Adam acting directly on T_X St(n,N) with a single first
//    moment that is carried along by vector transport, and a pseudo second
//    moment rebuilt from that first moment and the current gradient.

#include <cstdint>
#include <optional>

#include "smor/homogeneous.hpp"
#include "smor/kernels.hpp"
#include "smor/stiefel.hpp"

namespace smor::optim {

using homogeneous::HorizontalElement;
using stiefel::MetricKind;
using stiefel::StiefelPoint;
using stiefel::TangentVector;
using stiefel::TransportKind;

inline constexpr double kDefaultDecay = 0.9995;

struct AdamHyper {
  double eta = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double delta = 1e-8;
  std::optional<double> decay;  // multiplicative eta decay per step
  long t = 1;
  double beta1_t = 0.9;  // beta1^t
  double beta2_t = 0.99;  // beta2^t

  /// Throws ConfigError unless 0 < beta < 1, delta > 0, eta > 0 and the
  /// cached powers agree with t.
  void validate() const;

  double c1_old() const { return (beta1 - beta1_t) / (1.0 - beta1_t); }
  double c1_new() const { return (1.0 - beta1) / (1.0 - beta1_t); }
  double c2_old() const { return (beta2 - beta2_t) / (1.0 - beta2_t); }
  double c2_new() const { return (1.0 - beta2) / (1.0 - beta2_t); }
};

/// Default hyperparameters, optionally with the 0.9995 learning-rate decay.
AdamHyper make_hyper(bool with_decay = false, double eta = 0.001);

/// t <- t+1, beta_i^t <- beta_i^t * beta_i, eta <- eta * decay if enabled.
AdamHyper update_hyper(const AdamHyper& hyper);

struct EuclideanAdamCache {
  Matrix b1;
  Matrix b2;
  static EuclideanAdamCache zeros(Index rows, Index cols);
};

/// One Euclidean Adam step; mutates the cache, returns the update vector.
Matrix adam_step(const AdamHyper& hyper, EuclideanAdamCache& cache,
                 const Matrix& grad,
                 kernels::ExecPolicy policy = kernels::ExecPolicy::Parallel);

struct HomogeneousAdamCache {
  HorizontalElement b1;
  HorizontalElement b2;
  static HomogeneousAdamCache zeros(Index big_n, Index n);
};

/// Adam on the homogeneous space. The section is drawn from `section_seed`.
StiefelPoint homogeneous_psd_update(const AdamHyper& hyper,
                                    HomogeneousAdamCache& cache,
                                    const StiefelPoint& x, const Matrix& egrad,
                                    std::uint64_t section_seed);

struct StiefelAdamCache {
  TangentVector b1;
  static StiefelAdamCache zeros(const StiefelPoint& x);
};

/// StiefelAdam update vector at X for the tangent direction Z. Mutates the
/// first moment in place (still anchored at X).
TangentVector stiefel_adam_step(
    const AdamHyper& hyper, StiefelAdamCache& cache, const StiefelPoint& x,
    const TangentVector& z,
    kernels::ExecPolicy policy = kernels::ExecPolicy::Parallel);

/// Riemannian gradient -> StiefelAdam -> Cayley retraction -> transport of the
/// first moment to the new iterate.
StiefelPoint stiefel_psd_update(
    const AdamHyper& hyper, StiefelAdamCache& cache, const StiefelPoint& x,
    const Matrix& egrad, MetricKind metric, TransportKind transport,
    kernels::ExecPolicy policy = kernels::ExecPolicy::Parallel);

/// Plain Riemannian gradient descent along the Cayley retraction (debugging
/// fallback; no moments).
StiefelPoint stiefel_gradient_descent(const AdamHyper& hyper,
                                      const StiefelPoint& x,
                                      const Matrix& egrad, MetricKind metric);

enum class ManifoldOptimizer {
  HomogeneousAdam,
  StiefelAdam,
  StiefelAdamWithDecay,
  GradientDescent,
};

/// Per-layer owner of hyperparameters and caches for a Stiefel weight. Each
/// step() applies the configured rule and then update_hyper().
class StiefelWeightOptimizer {
 public:
  StiefelWeightOptimizer(ManifoldOptimizer kind, MetricKind metric,
                         TransportKind transport, const StiefelPoint& x0,
                         std::uint64_t section_seed, double eta = 0.001);

  StiefelPoint step(const StiefelPoint& x, const Matrix& egrad);

  const AdamHyper& hyper() const noexcept { return hyper_; }
  ManifoldOptimizer kind() const noexcept { return kind_; }
  const StiefelAdamCache& stiefel_cache() const { return *stiefel_cache_; }
  long steps_taken() const noexcept { return steps_; }

 private:
  ManifoldOptimizer kind_;
  MetricKind metric_;
  TransportKind transport_;
  AdamHyper hyper_;
  std::uint64_t section_seed_;
  long steps_ = 0;
  std::optional<HomogeneousAdamCache> homogeneous_cache_;
  std::optional<StiefelAdamCache> stiefel_cache_;
};

}  // namespace smor::optim

#include "smor/optimizers.hpp"

#include <cmath>

namespace smor::optim {

using kernels::ExecPolicy;

void AdamHyper::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw ConfigError("Adam decay rates must lie in (0, 1)");
  if (!(delta > 0.0) || !(eta > 0.0))
    throw ConfigError("Adam needs eta > 0 and delta > 0");
  if (t < 1) throw ConfigError("Adam step counter starts at 1");
  if (decay && !(*decay > 0.0 && *decay <= 1.0))
    throw ConfigError("learning-rate decay must lie in (0, 1]");
}

AdamHyper make_hyper(bool with_decay, double eta) {
  AdamHyper h;
  h.eta = eta;
  h.beta1_t = h.beta1;
  h.beta2_t = h.beta2;
  if (with_decay) h.decay = kDefaultDecay;
  h.validate();
  return h;
}

AdamHyper update_hyper(const AdamHyper& hyper) {
  AdamHyper h = hyper;
  h.t += 1;
  h.beta1_t *= h.beta1;
  h.beta2_t *= h.beta2;
  if (h.decay) h.eta *= *h.decay;
  return h;
}

EuclideanAdamCache EuclideanAdamCache::zeros(Index rows, Index cols) {
  return {Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
}

Matrix adam_step(const AdamHyper& hyper, EuclideanAdamCache& cache,
                 const Matrix& grad, ExecPolicy policy) {
  const kernels::AdamCoefficients c{hyper.c1_old(), hyper.c1_new(),
                                    hyper.c2_old(), hyper.c2_new(),
                                    hyper.eta,      hyper.delta};
  Matrix update;
  kernels::adam_update(policy, c, cache.b1, cache.b2, grad, update);
  return update;
}

HomogeneousAdamCache HomogeneousAdamCache::zeros(Index big_n, Index n) {
  return {HorizontalElement::zero(big_n, n), HorizontalElement::zero(big_n, n)};
}

StiefelPoint homogeneous_psd_update(const AdamHyper& hyper,
                                    HomogeneousAdamCache& cache,
                                    const StiefelPoint& x, const Matrix& egrad,
                                    std::uint64_t section_seed) {
  const TangentVector z =
      stiefel::riemannian_gradient(MetricKind::Canonical, x, egrad);
  const homogeneous::OrthoSection section =
      homogeneous::section_qr(x, section_seed);
  const HorizontalElement b = homogeneous::lift_to_global(section, z);

  // Adam on the packed storage. Skew structure of the first moment is kept
  // exactly because only the strict lower triangle is stored; the second
  // moment is the symmetric Hadamard square on the same positions.
  const kernels::AdamCoefficients c{hyper.c1_old(), hyper.c1_new(),
                                    hyper.c2_old(), hyper.c2_new(),
                                    hyper.eta,      hyper.delta};
  Matrix lower1 = cache.b1.skew_lower();
  Matrix lower2 = cache.b2.skew_lower();
  Matrix lower_update;
  kernels::adam_update(ExecPolicy::Parallel, c, lower1, lower2,
                       Matrix(b.skew_lower()), lower_update);
  Matrix comp_update;
  kernels::adam_update(ExecPolicy::Parallel, c, cache.b1.comp_block(),
                       cache.b2.comp_block(), b.comp_block(), comp_update);
  cache.b1.skew_lower() = lower1.col(0);
  cache.b2.skew_lower() = lower2.col(0);

  const HorizontalElement v(Vector(lower_update.col(0)), std::move(comp_update));
  return homogeneous::retract_global(section, v);
}

StiefelAdamCache StiefelAdamCache::zeros(const StiefelPoint& x) {
  return {TangentVector::zero(x)};
}

TangentVector stiefel_adam_step(const AdamHyper& hyper, StiefelAdamCache& cache,
                                const StiefelPoint& x, const TangentVector& z,
                                ExecPolicy policy) {
  if (!stiefel::same_point(x, z.anchor()) ||
      !stiefel::same_point(x, cache.b1.anchor()))
    throw AnchorMismatchError("stiefel_adam_step: inputs anchored elsewhere");
  const Matrix& xm = x.matrix();

  // Pseudo second moment from the not yet updated first moment.
  Matrix b2;
  kernels::stiefel_second_moment(policy, hyper.c2_old(), hyper.c2_new(),
                                 hyper.delta, cache.b1.matrix(), z.matrix(),
                                 b2);
  Matrix b1 = hyper.c1_old() * cache.b1.matrix() + hyper.c1_new() * z.matrix();

  const Matrix w = skew(xm.transpose() * b1);
  const Matrix complement = b1 - xm * w;

  // Skew part: W ./ sqrt(B2^T B2) elementwise. The Gram matrix is symmetric,
  // so the quotient stays skew.
  const Matrix gram = b2.transpose() * b2;
  Matrix w_scaled;
  kernels::divide(ExecPolicy::Serial, w, gram.cwiseSqrt(), w_scaled);

  Matrix comp_scaled;
  kernels::divide(policy, complement, b2, comp_scaled);
  comp_scaled -= xm * (xm.transpose() * comp_scaled);

  Matrix v = -hyper.eta * (xm * w_scaled + comp_scaled);
  cache.b1 = TangentVector::trusted(x, std::move(b1));
  return TangentVector::trusted(x, std::move(v));
}

StiefelPoint stiefel_psd_update(const AdamHyper& hyper, StiefelAdamCache& cache,
                                const StiefelPoint& x, const Matrix& egrad,
                                MetricKind metric, TransportKind transport,
                                ExecPolicy policy) {
  const TangentVector z = stiefel::riemannian_gradient(metric, x, egrad);
  const TangentVector v = stiefel_adam_step(hyper, cache, x, z, policy);
  StiefelPoint next = stiefel::cayley_retract(x, v);
  cache.b1 = stiefel::transport(transport, x, v, cache.b1, next);
  return next;
}

StiefelPoint stiefel_gradient_descent(const AdamHyper& hyper,
                                      const StiefelPoint& x,
                                      const Matrix& egrad, MetricKind metric) {
  const TangentVector z = stiefel::riemannian_gradient(metric, x, egrad);
  return stiefel::cayley_retract(
      x, TangentVector::trusted(x, -hyper.eta * z.matrix()));
}

StiefelWeightOptimizer::StiefelWeightOptimizer(ManifoldOptimizer kind,
                                               MetricKind metric,
                                               TransportKind transport,
                                               const StiefelPoint& x0,
                                               std::uint64_t section_seed,
                                               double eta)
    : kind_(kind),
      metric_(metric),
      transport_(transport),
      hyper_(make_hyper(kind == ManifoldOptimizer::StiefelAdamWithDecay, eta)),
      section_seed_(section_seed) {
  switch (kind_) {
    case ManifoldOptimizer::HomogeneousAdam:
      homogeneous_cache_ = HomogeneousAdamCache::zeros(x0.rows(), x0.cols());
      break;
    case ManifoldOptimizer::StiefelAdam:
    case ManifoldOptimizer::StiefelAdamWithDecay:
      stiefel_cache_ = StiefelAdamCache::zeros(x0);
      break;
    case ManifoldOptimizer::GradientDescent:
      break;
  }
}

StiefelPoint StiefelWeightOptimizer::step(const StiefelPoint& x,
                                          const Matrix& egrad) {
  StiefelPoint next = [&] {
    switch (kind_) {
      case ManifoldOptimizer::HomogeneousAdam:
        return homogeneous_psd_update(hyper_, *homogeneous_cache_, x, egrad,
                                      section_seed_ + static_cast<std::uint64_t>(steps_));
      case ManifoldOptimizer::StiefelAdam:
      case ManifoldOptimizer::StiefelAdamWithDecay:
        return stiefel_psd_update(hyper_, *stiefel_cache_, x, egrad, metric_,
                                  transport_);
      case ManifoldOptimizer::GradientDescent:
        break;
    }
    return stiefel_gradient_descent(hyper_, x, egrad, metric_);
  }();
  hyper_ = update_hyper(hyper_);
  ++steps_;
  return next;
}

}  // namespace smor::optim

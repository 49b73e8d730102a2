#pragma once

// Training loops for the autoencoder. Gradient-layer parameters use Euclidean
// Adam; each PSD weight has its own StiefelWeightOptimizer.

#include <cstdint>
#include <vector>

#include "smor/network.hpp"
#include "smor/optimizers.hpp"

namespace smor::train {

using net::LossKind;
using net::Network;
using optim::ManifoldOptimizer;

struct OptimizerConfig {
  ManifoldOptimizer manifold = ManifoldOptimizer::StiefelAdamWithDecay;
  stiefel::MetricKind metric = stiefel::MetricKind::Canonical;
  stiefel::TransportKind transport = stiefel::TransportKind::Submanifold;
  double eta = 0.001;
  std::uint64_t section_seed = 0;
  kernels::ExecPolicy policy = kernels::ExecPolicy::Parallel;
};

/// True when the configured manifold optimizer carries the learning-rate
/// decay; gradient layers then decay at the same rate.
bool uses_decay(const OptimizerConfig& config);

class NetworkOptimizer {
 public:
  NetworkOptimizer(const Network& net, const OptimizerConfig& config);

  /// Applies one update to every layer and bumps net.version.
  void step(Network& net, const std::vector<net::LayerGrad>& grads);

  long steps_taken() const noexcept { return steps_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  struct GradientState {
    optim::AdamHyper hyper;
    optim::EuclideanAdamCache k, a, b;
  };

  OptimizerConfig config_;
  // Indexed by layer; exactly one of the two is engaged per layer.
  std::vector<std::optional<GradientState>> gradient_;
  std::vector<std::optional<optim::StiefelWeightOptimizer>> psd_;
  long steps_ = 0;
};

/// Forward, loss, backward, update on one batch. Returns the batch loss
/// (before the update).
double train_batch(Network& net, NetworkOptimizer& opt, const Matrix& batch,
                   LossKind kind);

/// Shuffled column partition into ceil(cols / batch_size) batches; the last
/// batch may be short.
std::vector<std::vector<Index>> epoch_batches(Index cols, Index batch_size,
                                              Rng& rng);

/// One pass over all columns. Returns the mean of the batch losses.
double train_epoch(Network& net, NetworkOptimizer& opt, const Matrix& data,
                   Index batch_size, LossKind kind, Rng& rng);

/// ceil(n_epochs * n_cols / batch_size)
Index noepoch_iterations(Index n_epochs, Index n_cols, Index batch_size);

/// Batches drawn uniformly with replacement. Returns per-iteration losses.
std::vector<double> train_noepoch(Network& net, NetworkOptimizer& opt,
                                  const Matrix& data, Index batch_size,
                                  Index n_epochs, LossKind kind, Rng& rng);

Matrix gather_columns(const Matrix& data, const std::vector<Index>& idx);

}  // namespace smor::train

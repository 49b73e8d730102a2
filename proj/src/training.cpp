#include "smor/training.hpp"

#include <algorithm>
#include <numeric>

namespace smor::train {

bool uses_decay(const OptimizerConfig& config) {
  return config.manifold == ManifoldOptimizer::StiefelAdamWithDecay;
}

NetworkOptimizer::NetworkOptimizer(const Network& net,
                                   const OptimizerConfig& config)
    : config_(config),
      gradient_(net.layers.size()),
      psd_(net.layers.size()) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (const auto* g = std::get_if<net::GradientLayer>(&net.layers[i])) {
      gradient_[i] = GradientState{
          optim::make_hyper(uses_decay(config), config.eta),
          optim::EuclideanAdamCache::zeros(g->k.rows(), g->k.cols()),
          optim::EuclideanAdamCache::zeros(g->a.size(), 1),
          optim::EuclideanAdamCache::zeros(g->b.size(), 1)};
    } else {
      const auto& p = std::get<net::PsdLayer>(net.layers[i]);
      // Distinct section streams per PSD layer.
      const std::uint64_t seed =
          config.section_seed + 0x9E3779B97F4A7C15ULL * (i + 1);
      psd_[i].emplace(config.manifold, config.metric, config.transport,
                      p.weight, seed, config.eta);
    }
  }
}

void NetworkOptimizer::step(Network& net,
                            const std::vector<net::LayerGrad>& grads) {
  if (grads.size() != net.layers.size())
    throw DimensionError("NetworkOptimizer::step: one gradient per layer");
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (auto* g = std::get_if<net::GradientLayer>(&net.layers[i])) {
      const auto& d = std::get<kernels::GradientModuleGrads>(grads[i]);
      auto& st = *gradient_[i];
      g->k += optim::adam_step(st.hyper, st.k, d.dk, config_.policy);
      g->a += optim::adam_step(st.hyper, st.a, d.da, config_.policy);
      g->b += optim::adam_step(st.hyper, st.b, d.db, config_.policy);
      st.hyper = optim::update_hyper(st.hyper);
    } else {
      auto& p = std::get<net::PsdLayer>(net.layers[i]);
      p.weight = psd_[i]->step(p.weight, std::get<Matrix>(grads[i]));
    }
  }
  ++net.version;
  ++steps_;
}

Matrix gather_columns(const Matrix& data, const std::vector<Index>& idx) {
  Matrix out(data.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    out.col(static_cast<Index>(j)) = data.col(idx[j]);
  return out;
}

double train_batch(Network& net, NetworkOptimizer& opt, const Matrix& batch,
                   LossKind kind) {
  const auto policy = opt.config().policy;
  auto fw = net::forward(net, batch, policy);
  const double value = net::loss(kind, batch, fw.output);
  const Matrix upstream = net::loss_backward(kind, batch, fw.output);
  auto bw = net::backward(net, fw.tape, upstream, policy);
  opt.step(net, bw.grads);
  return value;
}

std::vector<std::vector<Index>> epoch_batches(Index cols, Index batch_size,
                                              Rng& rng) {
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (cols < 1) throw EmptyDataError("no columns to partition");
  std::vector<Index> order(static_cast<std::size_t>(cols));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Index>> out;
  for (Index start = 0; start < cols; start += batch_size) {
    const Index stop = std::min(cols, start + batch_size);
    out.emplace_back(order.begin() + start, order.begin() + stop);
  }
  return out;
}

double train_epoch(Network& net, NetworkOptimizer& opt, const Matrix& data,
                   Index batch_size, LossKind kind, Rng& rng) {
  if (data.cols() == 0) throw EmptyDataError("train_epoch: empty data");
  const auto batches = epoch_batches(data.cols(), batch_size, rng);
  double sum = 0.0;
  for (const auto& idx : batches)
    sum += train_batch(net, opt, gather_columns(data, idx), kind);
  return sum / static_cast<double>(batches.size());
}

Index noepoch_iterations(Index n_epochs, Index n_cols, Index batch_size) {
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  return (n_epochs * n_cols + batch_size - 1) / batch_size;
}

std::vector<double> train_noepoch(Network& net, NetworkOptimizer& opt,
                                  const Matrix& data, Index batch_size,
                                  Index n_epochs, LossKind kind, Rng& rng) {
  if (data.cols() == 0) throw EmptyDataError("train_noepoch: empty data");
  const Index iters = noepoch_iterations(n_epochs, data.cols(), batch_size);
  std::uniform_int_distribution<Index> pick(0, data.cols() - 1);
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(iters));
  std::vector<Index> idx(static_cast<std::size_t>(batch_size));
  for (Index it = 0; it < iters; ++it) {
    for (auto& i : idx) i = pick(rng);
    losses.push_back(train_batch(net, opt, gather_columns(data, idx), kind));
  }
  return losses;
}

}  // namespace smor::train

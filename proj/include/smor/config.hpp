#pragma once

// Run configuration: a flat `key = value` text file. Lines starting with '#'
// are comments. `variant = V1..V10` selects a preset for the learning flags;
// explicit flag keys override the preset regardless of line order.
//
// keys: model, N, n_range, n_epochs, batch_size, time_steps, mu_left,
//       mu_right, n_params, nu_list, testing, variant, loss, epochwise,
//       normalized, use_ref, optimizer, metric, transport, t0, t1, a, b,
//       seed, eta, alternate_pq, speed_pairs

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "smor/training.hpp"

namespace smor::config {

enum class Model { Wave, SgSingleSoliton, SgDoublets };

struct RunConfig {
  Model model = Model::Wave;
  Index grid = 32;  // N
  std::vector<Index> n_range{4};
  Index n_epochs = 10;
  Index batch_size = 32;
  Index time_steps = 50;  // K
  std::vector<double> params;
  std::vector<double> testing;
  std::string variant = "V6";
  net::LossKind loss = net::LossKind::Relative;
  bool epochwise = true;
  bool normalized = true;
  optim::ManifoldOptimizer optimizer = optim::ManifoldOptimizer::StiefelAdamWithDecay;
  stiefel::MetricKind metric = stiefel::MetricKind::Canonical;
  stiefel::TransportKind transport = stiefel::TransportKind::Submanifold;
  double t0 = 0.0;
  double t1 = 1.0;
  double a = -0.5;
  double b = 0.5;
  std::uint64_t seed = 1;
  double eta = 0.001;
  bool alternate_pq = false;
  std::vector<std::pair<Index, Index>> speed_pairs{{2000, 10}, {4000, 10}};

  /// Throws ConfigError on inconsistent or out-of-range settings.
  void validate() const;
  bool use_ref() const { return normalized; }
  train::OptimizerConfig optimizer_config() const;
};

/// Applies a V1..V10 preset to the learning flags.
void apply_variant(RunConfig& cfg, const std::string& name);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& file);

/// Writes a text form that parse_config reads back to an equal config.
std::string to_text(const RunConfig& cfg);

std::string model_name(Model m);
std::string optimizer_name(optim::ManifoldOptimizer o);
std::string metric_name(stiefel::MetricKind m);
std::string transport_name(stiefel::TransportKind t);
std::string loss_name(net::LossKind k);

/// Evenly spaced values including both ends.
std::vector<double> linspace(double left, double right, Index count);

}  // namespace smor::config

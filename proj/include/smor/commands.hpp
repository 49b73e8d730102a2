#pragma once

// Subcommands of the `smor` tool plus the library pieces they are built from.
//
// Output files:
//   generate-data  <out>/snapshots.bin (+ .json sidecar)
//   normalize      <out>/snapshots_normalized.bin (+ sidecar)
//   train          <run>/losses_n{n}.csv     epoch,avg_loss
//                  <run>/network_n{n}.json, <run>/config.txt,
//                  <run>/run_manifest.json
//   evaluate       <run>/errors.csv          n,param,e_red,e_proj,integration_seconds
//   psd            <out>/psd_errors.csv      n,param,e_red,e_proj,integration_seconds
//   speed-test     <out>/speed.csv           optimizer,N,n,seconds
//   report         <out>/errors_all.csv      variant,n,param,e_red,e_proj,integration_seconds
//                  <out>/losses_all.csv      variant,n,epoch,avg_loss

#include <filesystem>
#include <string>
#include <vector>

#include "smor/config.hpp"
#include "smor/reduction.hpp"
#include "smor/snapshot_io.hpp"

namespace smor::cli {

namespace fs = std::filesystem;
using config::RunConfig;

/// FOM for one parameter value, its initial state and the reference
/// trajectory used for errors (integrated for the wave model, closed form
/// for sine-Gordon).
struct FomCase {
  integ::OdeSystem system;
  Vector x0;
  integ::Trajectory exact;
};
FomCase fom_case(const RunConfig& cfg, double param);

mor::SnapshotSet generate_snapshots(const RunConfig& cfg);

struct TrainResult {
  net::Network network;
  std::vector<double> epoch_losses;  // one per epoch (or per epoch-length chunk)
  double seconds = 0.0;
};
/// Trains one network of reduced size 2n on `data` (already normalized when
/// cfg.normalized).
TrainResult train_network(const RunConfig& cfg, const Matrix& data, Index n);

/// Median wall time of `reps` manifold update steps on a ones gradient after
/// one warm-up step.
double time_manifold_step(optim::ManifoldOptimizer kind,
                          stiefel::MetricKind metric,
                          stiefel::TransportKind transport, Index big_n,
                          Index n, std::uint64_t seed, int reps = 5);

fs::path cmd_generate_data(const RunConfig& cfg, const fs::path& out_dir);
fs::path cmd_normalize(const fs::path& input, const fs::path& out_dir);
fs::path cmd_train(const RunConfig& cfg, const fs::path& data,
                   const fs::path& run_dir);
fs::path cmd_evaluate(const fs::path& run_dir);
fs::path cmd_psd(const RunConfig& cfg, const fs::path& data,
                 const fs::path& out_dir);
fs::path cmd_speed_test(const RunConfig& cfg, const fs::path& out_dir);
fs::path cmd_report(const std::vector<fs::path>& run_dirs,
                    const fs::path& out_dir);

}  // namespace smor::cli

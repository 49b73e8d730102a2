#include "smor/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "smor/models.hpp"

namespace smor::cli {

using json = nlohmann::json;
using config::Model;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

models::SgCase sg_case(Model m) {
  return m == Model::SgDoublets ? models::SgCase::Doublets
                                : models::SgCase::SingleSoliton;
}

const std::vector<double>& testing_params(const RunConfig& cfg) {
  return cfg.testing.empty() ? cfg.params : cfg.testing;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("missing " + file.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

FomCase fom_case(const RunConfig& cfg, double param) {
  FomCase c;
  if (cfg.model == Model::Wave) {
    const auto model = models::wave_build(cfg.grid, param);
    c.system = models::wave_system(model);
    c.x0 = models::wave_initial(model);
    c.exact = integ::implicit_midpoint(c.system, c.x0, cfg.t0, cfg.t1,
                                       cfg.time_steps);
  } else {
    const auto model =
        models::sg_build(cfg.grid, param, cfg.a, cfg.b, sg_case(cfg.model));
    c.system = models::sg_system(model);
    c.exact = models::sg_exact_trajectory(model, cfg.t0, cfg.t1, cfg.time_steps);
    c.x0 = c.exact.states.col(0);
  }
  return c;
}

mor::SnapshotSet generate_snapshots(const RunConfig& cfg) {
  if (cfg.params.empty()) throw ConfigError("no training parameters given");
  mor::SnapshotSet set;
  set.params = cfg.params;
  set.steps = cfg.time_steps;
  set.t0 = cfg.t0;
  set.t1 = cfg.t1;
  const Index n_params = static_cast<Index>(cfg.params.size());
  std::vector<integ::Trajectory> trajs(cfg.params.size());
  // Independent per parameter; each slot is written by exactly one thread.
  kernels::parallel_for(kernels::ExecPolicy::Parallel, n_params, [&](Index j) {
    trajs[static_cast<std::size_t>(j)] =
        fom_case(cfg, cfg.params[static_cast<std::size_t>(j)]).exact;
  });
  const Index rows = trajs.front().states.rows();
  set.data.resize(rows, n_params * set.block_cols());
  for (Index j = 0; j < n_params; ++j)
    set.data.middleCols(j * set.block_cols(), set.block_cols()) =
        trajs[static_cast<std::size_t>(j)].states;
  return set;
}

TrainResult train_network(const RunConfig& cfg, const Matrix& data, Index n) {
  const auto start = Clock::now();
  net::BuildOptions opts;
  opts.alternate_pq = cfg.alternate_pq;
  TrainResult res;
  train::OptimizerConfig oc = cfg.optimizer_config();
  oc.section_seed = mix(cfg.seed, 3 * n + 1);
  res.network = net::build_network(data.rows(), 2 * n, mix(cfg.seed, 3 * n), opts);
  train::NetworkOptimizer opt(res.network, oc);
  Rng rng(mix(cfg.seed, 3 * n + 2));
  if (cfg.epochwise) {
    for (Index e = 0; e < cfg.n_epochs; ++e)
      res.epoch_losses.push_back(train::train_epoch(
          res.network, opt, data, cfg.batch_size, cfg.loss, rng));
  } else {
    const auto losses = train::train_noepoch(res.network, opt, data,
                                             cfg.batch_size, cfg.n_epochs,
                                             cfg.loss, rng);
    const std::size_t chunk = static_cast<std::size_t>(
        (data.cols() + cfg.batch_size - 1) / cfg.batch_size);
    for (std::size_t s = 0; s < losses.size(); s += chunk) {
      const std::size_t e = std::min(losses.size(), s + chunk);
      double sum = 0.0;
      for (std::size_t i = s; i < e; ++i) sum += losses[i];
      res.epoch_losses.push_back(sum / static_cast<double>(e - s));
    }
  }
  res.seconds = seconds_since(start);
  return res;
}

double time_manifold_step(optim::ManifoldOptimizer kind,
                          stiefel::MetricKind metric,
                          stiefel::TransportKind transport, Index big_n,
                          Index n, std::uint64_t seed, int reps) {
  stiefel::StiefelPoint x = stiefel::random_stiefel(big_n, n, seed);
  optim::StiefelWeightOptimizer opt(kind, metric, transport, x, seed + 1);
  const Matrix ones = Matrix::Ones(big_n, n);
  x = opt.step(x, ones);  // warm-up, not timed
  std::vector<double> times;
  for (int r = 0; r < reps; ++r) {
    const auto start = Clock::now();
    x = opt.step(x, ones);
    times.push_back(seconds_since(start));
  }
  std::sort(times.begin(), times.end());
  const std::size_t m = times.size() / 2;
  return times.size() % 2 ? times[m] : 0.5 * (times[m - 1] + times[m]);
}

fs::path cmd_generate_data(const RunConfig& cfg, const fs::path& out_dir) {
  ensure_dir(out_dir);
  const mor::SnapshotSet set = generate_snapshots(cfg);
  io::SnapshotMeta meta{config::model_name(cfg.model), cfg.grid, cfg.a, cfg.b,
                        cfg.seed};
  const fs::path file = out_dir / "snapshots.bin";
  io::write_snapshot_file(file, set, meta);
  return file;
}

fs::path cmd_normalize(const fs::path& input, const fs::path& out_dir) {
  ensure_dir(out_dir);
  const io::SnapshotFile in = io::read_snapshot_file(input);
  const mor::SnapshotSet set = mor::normalize_snapshots(in.set);
  const fs::path file = out_dir / "snapshots_normalized.bin";
  io::write_snapshot_file(file, set, in.meta);
  return file;
}

fs::path cmd_train(const RunConfig& cfg, const fs::path& data,
                   const fs::path& run_dir) {
  ensure_dir(run_dir);
  io::SnapshotFile file = io::read_snapshot_file(data);
  if (file.meta.model != config::model_name(cfg.model))
    throw ConfigError("data file holds model '" + file.meta.model +
                      "', config asks for '" + config::model_name(cfg.model) + "'");
  mor::SnapshotSet set = std::move(file.set);
  if (cfg.normalized && !set.normalized) set = mor::normalize_snapshots(set);
  if (!cfg.normalized && set.normalized)
    throw ConfigError("variant trains on unnormalized data but the file is normalized");

  open_out(run_dir / "config.txt") << config::to_text(cfg);
  json manifest;
  manifest["variant"] = cfg.variant;
  manifest["config"] = config::to_text(cfg);
  manifest["data_file"] = fs::absolute(data).string();
  manifest["seed"] = cfg.seed;
  manifest["seed_derivation"] =
      "splitmix64(seed + golden * (salt + 1)); salt 3n: network init, "
      "3n+1: section streams, 3n+2: batch sampling";
  manifest["initialization"] =
      "K ~ U(-sqrt(6/(L+half)), +sqrt(6/(L+half))), a ~ same / L, b = 0, "
      "PSD weights: thin-QR of a standard normal matrix";
  manifest["threads"] = kernels::max_threads();
  manifest["optimizer"] = {
      {"manifold", config::optimizer_name(cfg.optimizer)},
      {"metric", config::metric_name(cfg.metric)},
      {"transport", config::transport_name(cfg.transport)},
      {"eta", cfg.eta},
      {"beta1", 0.9},
      {"beta2", 0.99},
      {"delta", 1e-8},
      {"decay", train::uses_decay(cfg.optimizer_config()) ? optim::kDefaultDecay
                                                          : 1.0}};
  json runs = json::array();
  for (Index n : cfg.n_range) {
    const TrainResult res = train_network(cfg, set.data, n);
    auto csv = open_out(run_dir / ("losses_n" + std::to_string(n) + ".csv"));
    csv << "epoch,avg_loss\n";
    for (std::size_t e = 0; e < res.epoch_losses.size(); ++e)
      csv << e + 1 << ',' << fmt(res.epoch_losses[e]) << '\n';
    io::write_network(run_dir / ("network_n" + std::to_string(n) + ".json"),
                      res.network);
    runs.push_back({{"n", n},
                    {"parameters", net::parameter_count(res.network)},
                    {"wall_seconds", res.seconds},
                    {"first_loss", res.epoch_losses.front()},
                    {"last_loss", res.epoch_losses.back()}});
  }
  manifest["runs"] = runs;
  manifest["reorthonormalizations"] = stiefel::reorthonormalization_count();
  open_out(run_dir / "run_manifest.json") << manifest.dump(2) << '\n';
  return run_dir;
}

namespace {

struct ErrorRow {
  Index n;
  double param;
  double e_red, e_proj, seconds;
};

void write_errors(const fs::path& file, const std::vector<ErrorRow>& rows) {
  auto out = open_out(file);
  out << "n,param,e_red,e_proj,integration_seconds\n";
  for (const auto& r : rows)
    out << r.n << ',' << fmt(r.param) << ',' << fmt(r.e_red) << ','
        << fmt(r.e_proj) << ',' << fmt(r.seconds) << '\n';
}

ErrorRow evaluate_cell(const RunConfig& cfg, const mor::Autoencoder& ae,
                       Index n, double param, bool use_ref) {
  ErrorRow row{n, param, std::numeric_limits<double>::quiet_NaN(),
               std::numeric_limits<double>::quiet_NaN(),
               std::numeric_limits<double>::quiet_NaN()};
  const FomCase fom = fom_case(cfg, param);
  const mor::RomSpec rom = mor::build_rom(ae, fom.x0, use_ref);
  const auto variant =
      use_ref ? mor::ErrorVariant::WithRef : mor::ErrorVariant::NoRef;
  row.e_proj = mor::projection_error(variant, fom.exact.states, ae, rom.x_ref);
  try {
    const auto start = Clock::now();
    const auto reduced =
        mor::solve_rom(rom, fom.system, cfg.t0, cfg.t1, cfg.time_steps);
    row.seconds = seconds_since(start);
    row.e_red =
        mor::reduction_error(variant, fom.exact.states, rom, reduced.states);
  } catch (const IntegrationFailureError& e) {
    std::cerr << "warning: n=" << n << " param=" << param << ": " << e.what()
              << '\n';
  }
  return row;
}

}  // namespace

fs::path cmd_evaluate(const fs::path& run_dir) {
  const RunConfig cfg = config::load_config(run_dir / "config.txt");
  std::vector<ErrorRow> rows;
  for (Index n : cfg.n_range) {
    const net::Network network =
        io::read_network(run_dir / ("network_n" + std::to_string(n) + ".json"));
    const mor::Autoencoder ae = mor::network_autoencoder(network);
    for (double param : testing_params(cfg))
      rows.push_back(evaluate_cell(cfg, ae, n, param, cfg.use_ref()));
  }
  const fs::path file = run_dir / "errors.csv";
  write_errors(file, rows);
  return file;
}

fs::path cmd_psd(const RunConfig& cfg, const fs::path& data,
                 const fs::path& out_dir) {
  ensure_dir(out_dir);
  const io::SnapshotFile file = io::read_snapshot_file(data);
  if (file.set.normalized)
    throw NormalizationError("the PSD baseline runs on unnormalized data");
  std::vector<ErrorRow> rows;
  for (Index n : cfg.n_range) {
    const auto x = mor::psd_cotangent_lift(file.set.data, n);
    const mor::Autoencoder ae = mor::psd_autoencoder(x);
    for (double param : testing_params(cfg))
      rows.push_back(evaluate_cell(cfg, ae, n, param, false));
  }
  const fs::path out = out_dir / "psd_errors.csv";
  write_errors(out, rows);
  return out;
}

fs::path cmd_speed_test(const RunConfig& cfg, const fs::path& out_dir) {
  ensure_dir(out_dir);
  using optim::ManifoldOptimizer;
  using stiefel::MetricKind;
  using stiefel::TransportKind;
  struct Cell {
    std::string name;
    ManifoldOptimizer kind;
    MetricKind metric;
    TransportKind transport;
  };
  const std::vector<Cell> cells{
      {"HomogeneousAdam", ManifoldOptimizer::HomogeneousAdam,
       MetricKind::Canonical, TransportKind::Submanifold},
      {"StiefelAdam(can,sub)", ManifoldOptimizer::StiefelAdam,
       MetricKind::Canonical, TransportKind::Submanifold},
      {"StiefelAdamWithDecay(can,sub)", ManifoldOptimizer::StiefelAdamWithDecay,
       MetricKind::Canonical, TransportKind::Submanifold},
      {"StiefelAdamWithDecay(can,diff)",
       ManifoldOptimizer::StiefelAdamWithDecay, MetricKind::Canonical,
       TransportKind::Differential},
      {"StiefelAdamWithDecay(euc,sub)", ManifoldOptimizer::StiefelAdamWithDecay,
       MetricKind::Euclidean, TransportKind::Submanifold},
      {"StiefelAdamWithDecay(euc,diff)",
       ManifoldOptimizer::StiefelAdamWithDecay, MetricKind::Euclidean,
       TransportKind::Differential},
  };
  const fs::path file = out_dir / "speed.csv";
  auto out = open_out(file);
  out << "optimizer,N,n,seconds\n";
  for (const auto& [big_n, n] : cfg.speed_pairs)
    for (const auto& c : cells) {
      double t = std::numeric_limits<double>::quiet_NaN();
      try {
        t = time_manifold_step(c.kind, c.metric, c.transport, big_n, n,
                               cfg.seed);
      } catch (const std::bad_alloc&) {
        std::cerr << "warning: out of memory for " << c.name << " at (" << big_n
                  << ", " << n << ")\n";
      }
      out << c.name << ',' << big_n << ',' << n << ',' << fmt(t) << '\n';
      out.flush();
    }
  return file;
}

fs::path cmd_report(const std::vector<fs::path>& run_dirs,
                    const fs::path& out_dir) {
  if (run_dirs.empty()) throw ConfigError("report: no run directories given");
  ensure_dir(out_dir);
  auto errors = open_out(out_dir / "errors_all.csv");
  auto losses = open_out(out_dir / "losses_all.csv");
  errors << "variant,n,param,e_red,e_proj,integration_seconds\n";
  losses << "variant,n,epoch,avg_loss\n";
  for (const auto& dir : run_dirs) {
    std::ifstream mf(dir / "run_manifest.json");
    if (!mf) throw IoError("missing " + (dir / "run_manifest.json").string());
    json manifest;
    mf >> manifest;
    const std::string variant = manifest.at("variant").get<std::string>();
    const RunConfig cfg = config::load_config(dir / "config.txt");
    const auto err_rows = read_csv(dir / "errors.csv");
    for (std::size_t i = 1; i < err_rows.size(); ++i) {
      errors << variant;
      for (const auto& c : err_rows[i]) errors << ',' << c;
      errors << '\n';
    }
    for (Index n : cfg.n_range) {
      const auto rows =
          read_csv(dir / ("losses_n" + std::to_string(n) + ".csv"));
      for (std::size_t i = 1; i < rows.size(); ++i)
        losses << variant << ',' << n << ',' << rows[i].at(0) << ','
               << rows[i].at(1) << '\n';
    }
  }
  return out_dir;
}

}  // namespace smor::cli

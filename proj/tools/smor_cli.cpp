// smor: data generation, training, evaluation and timing for symplectic
// autoencoder model reduction.
//
// On failure the last line on stderr is machine readable:
//   error: code=<tag> message=<text>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smor/commands.hpp"

namespace {

using smor::config::RunConfig;

RunConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  RunConfig cfg = smor::config::load_config(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symplectic autoencoder model reduction"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", data_path, input_path, run_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> runs;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "key = value config file");
    if (needs_config) opt->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* gen = app.add_subcommand("generate-data", "integrate or sample the FOM");
  add_common(gen, true);
  auto* norm = app.add_subcommand("normalize", "subtract per-parameter x0");
  add_common(norm, false);
  norm->add_option("--in", input_path, "snapshot file")->required();
  auto* tr = app.add_subcommand("train", "train one network per reduced size");
  add_common(tr, true);
  tr->add_option("--data", data_path, "snapshot file")->required();
  auto* ev = app.add_subcommand("evaluate", "ROM errors for a trained run");
  add_common(ev, false);
  ev->add_option("--run", run_dir, "run directory written by train")->required();
  auto* psd = app.add_subcommand("psd", "PSD baseline errors");
  add_common(psd, true);
  psd->add_option("--data", data_path, "unnormalized snapshot file")->required();
  auto* speed = app.add_subcommand("speed-test", "time single manifold updates");
  add_common(speed, true);
  auto* rep = app.add_subcommand("report", "merge evaluated runs into tidy CSVs");
  add_common(rep, false);
  rep->add_option("runs", runs, "run directories")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::path result;
    if (gen->parsed()) {
      result = smor::cli::cmd_generate_data(load(config_path, seed), out_dir);
    } else if (norm->parsed()) {
      result = smor::cli::cmd_normalize(input_path, out_dir);
    } else if (tr->parsed()) {
      result = smor::cli::cmd_train(load(config_path, seed), data_path, out_dir);
    } else if (ev->parsed()) {
      result = smor::cli::cmd_evaluate(run_dir);
    } else if (psd->parsed()) {
      result = smor::cli::cmd_psd(load(config_path, seed), data_path, out_dir);
    } else if (speed->parsed()) {
      result = smor::cli::cmd_speed_test(load(config_path, seed), out_dir);
    } else if (rep->parsed()) {
      std::vector<std::filesystem::path> dirs(runs.begin(), runs.end());
      result = smor::cli::cmd_report(dirs, out_dir);
    }
    std::cout << result.string() << '\n';
    return 0;
  } catch (const smor::Error& e) {
    std::cerr << "error: code=" << e.code() << " message=" << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: code=internal message=" << e.what() << '\n';
    return 3;
  }
}

#include <algorithm>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "smor/training.hpp"

using namespace smor;
using namespace smor::train;

TEST_CASE("non epoch-wise iteration count") {
  CHECK(noepoch_iterations(100, 4020, 32) == 12563);
  CHECK(noepoch_iterations(1, 64, 32) == 2);
  CHECK_THROWS_AS(noepoch_iterations(1, 10, 0), ConfigError);
}

TEST_CASE("epoch batches partition the columns") {
  Rng rng(3);
  const auto batches = epoch_batches(70, 32, rng);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 32);
  CHECK(batches[2].size() == 6);
  std::set<Index> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  CHECK(seen.size() == 70);
  CHECK(*seen.rbegin() == 69);
  CHECK_THROWS_AS(epoch_batches(0, 4, rng), EmptyDataError);
}

TEST_CASE("gather columns") {
  Matrix d(2, 3);
  d << 1, 2, 3, 4, 5, 6;
  const Matrix g = gather_columns(d, {2, 0, 2});
  CHECK(g(0, 0) == 3.0);
  CHECK(g(1, 1) == 4.0);
  CHECK(g.cols() == 3);
}

namespace {

Matrix toy_data(Index dim, Index cols) {
  Rng rng(8);
  Matrix basis = random_normal(dim, 2, rng);
  return basis * random_normal(2, cols, rng) * 0.5;
}

}  // namespace

TEST_CASE("training reduces the loss and keeps the weights on St") {
  const Matrix data = toy_data(8, 64);
  for (auto manifold : {ManifoldOptimizer::HomogeneousAdam,
                        ManifoldOptimizer::StiefelAdamWithDecay}) {
    auto net = net::build_network(8, 4, 5);
    OptimizerConfig cfg;
    cfg.manifold = manifold;
    cfg.eta = 0.01;
    NetworkOptimizer opt(net, cfg);
    Rng rng(1);
    const double first = train_epoch(net, opt, data, 16, LossKind::Relative, rng);
    double last = first;
    for (int e = 0; e < 20; ++e)
      last = train_epoch(net, opt, data, 16, LossKind::Relative, rng);
    CHECK(last < first);
    CHECK(opt.steps_taken() == 21 * 4);
    for (const auto& l : net.layers)
      if (const auto* p = std::get_if<net::PsdLayer>(&l))
        CHECK(p->weight.residual() < 1e-8);
  }
}

TEST_CASE("training is reproducible") {
  const Matrix data = toy_data(8, 40);
  auto run = [&] {
    auto net = net::build_network(8, 2, 9);
    NetworkOptimizer opt(net, OptimizerConfig{});
    Rng rng(4);
    std::vector<double> losses;
    for (int e = 0; e < 3; ++e)
      losses.push_back(train_epoch(net, opt, data, 8, LossKind::Relative, rng));
    return std::make_pair(losses, net::flatten_euclidean(net));
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("non epoch-wise loop runs the expected number of steps") {
  const Matrix data = toy_data(6, 20);
  auto net = net::build_network(6, 2, 1);
  NetworkOptimizer opt(net, OptimizerConfig{});
  Rng rng(2);
  const auto losses = train_noepoch(net, opt, data, 8, 3, LossKind::ScaledMSE, rng);
  CHECK(losses.size() == 8);
  CHECK(opt.steps_taken() == 8);
  CHECK(std::all_of(losses.begin(), losses.end(),
                    [](double v) { return std::isfinite(v); }));
}

TEST_CASE("decay follows the manifold optimizer choice") {
  OptimizerConfig c;
  CHECK(uses_decay(c));
  c.manifold = ManifoldOptimizer::StiefelAdam;
  CHECK_FALSE(uses_decay(c));
}

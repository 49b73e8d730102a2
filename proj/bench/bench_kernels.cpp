// Serial reference vs OpenMP paths of the data-parallel kernels, plus single
// manifold optimizer steps. Arg 0 selects the policy (0 serial, 1 parallel).

#include <benchmark/benchmark.h>

#include "smor/kernels.hpp"
#include "smor/network.hpp"
#include "smor/optimizers.hpp"

using namespace smor;
using kernels::ExecPolicy;

namespace {

ExecPolicy policy_of(const benchmark::State& st) {
  return st.range(0) ? ExecPolicy::Parallel : ExecPolicy::Serial;
}

void BM_AdamUpdate(benchmark::State& st) {
  const Index rows = st.range(1);
  Rng rng(1);
  const Matrix g = random_normal(rows, 64, rng);
  Matrix m1 = Matrix::Zero(rows, 64), m2 = Matrix::Zero(rows, 64), u;
  const kernels::AdamCoefficients c{0.9, 0.1, 0.99, 0.01, 1e-3, 1e-8};
  for (auto _ : st) {
    kernels::adam_update(policy_of(st), c, m1, m2, g, u);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_AdamUpdate)->ArgsProduct({{0, 1}, {1000, 20000}});

void BM_GradientModuleForward(benchmark::State& st) {
  const Index half = st.range(1), l = 5 * half, batch = 256;
  Rng rng(2);
  const Matrix k = random_normal(l, half, rng);
  const Vector a = random_normal(l, 1, rng), b = random_normal(l, 1, rng);
  const Matrix src = random_normal(half, batch, rng);
  Matrix dst = Matrix::Zero(half, batch), pre;
  for (auto _ : st) {
    kernels::gradient_module_forward(policy_of(st), kernels::Activation::Tanh,
                                     k, a, b, src, dst, pre);
    benchmark::DoNotOptimize(dst.data());
  }
}
BENCHMARK(BM_GradientModuleForward)->ArgsProduct({{0, 1}, {34, 130}});

void BM_GradientModuleBackward(benchmark::State& st) {
  const Index half = st.range(1), l = 5 * half, batch = 256;
  Rng rng(3);
  const Matrix k = random_normal(l, half, rng);
  const Vector a = random_normal(l, 1, rng), b = random_normal(l, 1, rng);
  const Matrix src = random_normal(half, batch, rng);
  const Matrix up = random_normal(half, batch, rng);
  Matrix dst = Matrix::Zero(half, batch), pre;
  kernels::gradient_module_forward(ExecPolicy::Serial, kernels::Activation::Tanh,
                                   k, a, b, src, dst, pre);
  for (auto _ : st) {
    Matrix gsrc = Matrix::Zero(half, batch);
    auto g = kernels::gradient_module_backward(policy_of(st), kernels::Activation::Tanh,
                                               k, a, src, pre, up, gsrc);
    benchmark::DoNotOptimize(g.dk.data());
  }
}
BENCHMARK(BM_GradientModuleBackward)->ArgsProduct({{0, 1}, {34, 130}});

void BM_NetworkForwardBackward(benchmark::State& st) {
  const auto net = net::build_network(2 * st.range(1), 8, 1);
  Rng rng(4);
  const Matrix batch = random_normal(2 * st.range(1), 32, rng);
  for (auto _ : st) {
    auto fwd = net::forward(net, batch, policy_of(st));
    auto bwd = net::backward(
        net, fwd.tape, net::loss_backward(net::LossKind::Relative, batch, fwd.output),
        policy_of(st));
    benchmark::DoNotOptimize(bwd.input_grad.data());
  }
}
BENCHMARK(BM_NetworkForwardBackward)->ArgsProduct({{0, 1}, {34, 130}});

void BM_StiefelAdamStep(benchmark::State& st) {
  const Index big_n = st.range(1);
  const auto x = stiefel::random_stiefel(big_n, 10, 1);
  const Matrix g = Matrix::Ones(big_n, 10);
  const auto hyper = optim::make_hyper(true);
  for (auto _ : st) {
    auto cache = optim::StiefelAdamCache::zeros(x);
    auto next = optim::stiefel_psd_update(hyper, cache, x, g,
                                          stiefel::MetricKind::Canonical,
                                          stiefel::TransportKind::Submanifold,
                                          policy_of(st));
    benchmark::DoNotOptimize(next.matrix().data());
  }
}
BENCHMARK(BM_StiefelAdamStep)->ArgsProduct({{0, 1}, {2000, 10000}});

void BM_HomogeneousAdamStep(benchmark::State& st) {
  const Index big_n = st.range(0);
  const auto x = stiefel::random_stiefel(big_n, 10, 1);
  const Matrix g = Matrix::Ones(big_n, 10);
  const auto hyper = optim::make_hyper();
  for (auto _ : st) {
    auto cache = optim::HomogeneousAdamCache::zeros(big_n, 10);
    auto next = optim::homogeneous_psd_update(hyper, cache, x, g, 7);
    benchmark::DoNotOptimize(next.matrix().data());
  }
}
BENCHMARK(BM_HomogeneousAdamStep)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

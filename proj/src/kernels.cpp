#include "smor/kernels.hpp"

#include <cmath>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace smor::kernels {

namespace {

// Column block width shared by the serial and parallel paths, so both visit
// the same sub-products in the same order.
constexpr Index kColumnBlock = 16;

Index block_count(Index cols) { return (cols + kColumnBlock - 1) / kColumnBlock; }

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void parallel_for(ExecPolicy policy, Index count,
                  const std::function<void(Index)>& body) {
  if (policy == ExecPolicy::Serial || count < 2) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  // Exceptions must not cross the parallel region; keep the first and
  // rethrow it on the calling thread.
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(smor_parallel_for_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void adam_update(ExecPolicy policy, const AdamCoefficients& c, Matrix& m1,
                 Matrix& m2, const Matrix& g, Matrix& update) {
  require_shape(m1, g.rows(), g.cols(), "adam_update m1");
  require_shape(m2, g.rows(), g.cols(), "adam_update m2");
  update.resize(g.rows(), g.cols());
  const Index size = g.size();
  double* p1 = m1.data();
  double* p2 = m2.data();
  const double* pg = g.data();
  double* pu = update.data();
  auto body = [&](Index i) {
    p1[i] = c.c1_old * p1[i] + c.c1_new * pg[i];
    p2[i] = c.c2_old * p2[i] + c.c2_new * pg[i] * pg[i];
    pu[i] = -c.eta * p1[i] / std::sqrt(p2[i] + c.delta);
  };
  if (policy == ExecPolicy::Serial) {
    for (Index i = 0; i < size; ++i) body(i);
  } else {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < size; ++i) body(i);
  }
}

void stiefel_second_moment(ExecPolicy policy, double c_old, double c_new,
                           double delta, const Matrix& m1, const Matrix& g,
                           Matrix& out) {
  require_shape(m1, g.rows(), g.cols(), "stiefel_second_moment");
  out.resize(g.rows(), g.cols());
  const Index size = g.size();
  const double* p1 = m1.data();
  const double* pg = g.data();
  double* po = out.data();
  auto body = [&](Index i) {
    po[i] = std::sqrt(c_old * p1[i] * p1[i] + c_new * pg[i] * pg[i] + delta);
  };
  if (policy == ExecPolicy::Serial) {
    for (Index i = 0; i < size; ++i) body(i);
  } else {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < size; ++i) body(i);
  }
}

void divide(ExecPolicy policy, const Matrix& num, const Matrix& den,
            Matrix& out) {
  require_shape(den, num.rows(), num.cols(), "divide");
  out.resize(num.rows(), num.cols());
  const Index size = num.size();
  const double* pn = num.data();
  const double* pd = den.data();
  double* po = out.data();
  if (policy == ExecPolicy::Serial) {
    for (Index i = 0; i < size; ++i) po[i] = pn[i] / pd[i];
  } else {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < size; ++i) po[i] = pn[i] / pd[i];
  }
}

double activate(Activation act, double x) {
  switch (act) {
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Explu:
      return x >= 0.0 ? x : std::expm1(x);
  }
  return x;
}

double activate_derivative(Activation act, double x) {
  switch (act) {
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::Explu:
      return x >= 0.0 ? 1.0 : std::exp(x);
  }
  return 1.0;
}

void gradient_module_forward(ExecPolicy policy, Activation act,
                             const Matrix& k, const Vector& a, const Vector& b,
                             Eigen::Ref<const Matrix> src,
                             Eigen::Ref<Matrix> dst, Matrix& pre) {
  const Index cols = src.cols();
  require_shape(dst, k.cols(), cols, "gradient_module_forward dst");
  pre.resize(k.rows(), cols);
  parallel_for(policy, block_count(cols), [&](Index blk) {
    const Index c0 = blk * kColumnBlock;
    const Index w = std::min(kColumnBlock, cols - c0);
    Matrix u = k * src.middleCols(c0, w);
    u.colwise() += b;
    pre.middleCols(c0, w) = u;
    const Matrix s =
        a.asDiagonal() * u.unaryExpr([act](double v) { return activate(act, v); });
    dst.middleCols(c0, w).noalias() += k.transpose() * s;
  });
}

GradientModuleGrads gradient_module_backward(ExecPolicy policy, Activation act,
                                             const Matrix& k, const Vector& a,
                                             Eigen::Ref<const Matrix> src,
                                             const Matrix& pre,
                                             Eigen::Ref<const Matrix> g_dst,
                                             Eigen::Ref<Matrix> g_src) {
  const Index cols = src.cols();
  const Index nb = block_count(cols);
  std::vector<GradientModuleGrads> partial(static_cast<std::size_t>(nb));
  parallel_for(policy, nb, [&](Index blk) {
    const Index c0 = blk * kColumnBlock;
    const Index w = std::min(kColumnBlock, cols - c0);
    const auto u = pre.middleCols(c0, w);
    const Matrix s = u.unaryExpr([act](double v) { return activate(act, v); });
    const Matrix ds =
        u.unaryExpr([act](double v) { return activate_derivative(act, v); });
    const auto g = g_dst.middleCols(c0, w);
    const Matrix r = k * g;                                   // L x w
    const Matrix v = a.asDiagonal() * ds.cwiseProduct(r);     // L x w
    auto& out = partial[static_cast<std::size_t>(blk)];
    out.da = s.cwiseProduct(r).rowwise().sum();
    out.db = v.rowwise().sum();
    out.dk = (a.asDiagonal() * s) * g.transpose() +
             v * src.middleCols(c0, w).transpose();
    g_src.middleCols(c0, w).noalias() += k.transpose() * v;
  });
  GradientModuleGrads total{Matrix::Zero(k.rows(), k.cols()),
                            Vector::Zero(k.rows()), Vector::Zero(k.rows())};
  for (const auto& p : partial) {
    total.dk += p.dk;
    total.da += p.da;
    total.db += p.db;
  }
  return total;
}

}  // namespace smor::kernels

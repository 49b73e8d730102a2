#include "smor/stiefel.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <iostream>

namespace smor::stiefel {

namespace {

std::atomic<std::size_t> g_reorthonormalizations{0};

std::uint64_t fnv1a(const Matrix& m) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  const std::size_t len = static_cast<std::size_t>(m.size()) * sizeof(double);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  h ^= static_cast<std::uint64_t>(m.rows()) * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(m.cols()) << 32;
  return h;
}

void require_anchor(const StiefelPoint& x, const TangentVector& z,
                    const char* what) {
  if (!same_point(x, z.anchor()))
    throw AnchorMismatchError(std::string(what) +
                              ": tangent vector is anchored at another point");
}

// Thin QR whose R has a positive diagonal, so a nearly orthonormal input is
// mapped to a nearby orthonormal matrix.
Matrix sign_fixed_q(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < a.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

}  // namespace

double orthonormality_tolerance(Index n) {
  return 1e-10 * std::sqrt(static_cast<double>(n));
}

StiefelPoint::StiefelPoint(Matrix data) : data_(std::move(data)) {
  if (data_.cols() < 1 || data_.rows() < data_.cols())
    throw DimensionError("Stiefel point needs N >= n >= 1, got " +
                         std::to_string(data_.rows()) + "x" +
                         std::to_string(data_.cols()));
  const double res = orthonormality_residual(data_);
  if (!(res <= orthonormality_tolerance(data_.cols())))
    throw NotOnManifoldError("orthonormality residual " + std::to_string(res));
  checksum_ = fnv1a(data_);
}

StiefelPoint::StiefelPoint(Matrix data, Trusted) : data_(std::move(data)) {
  checksum_ = fnv1a(data_);
}

StiefelPoint StiefelPoint::adopt(Matrix data) {
  const double res = orthonormality_residual(data);
  if (!std::isfinite(res))
    throw NotOnManifoldError("retraction produced non-finite entries");
  if (res > kDriftThreshold) {
    std::cerr << "warning: Stiefel iterate drifted (residual " << res
              << "), re-orthonormalizing\n";
    ++g_reorthonormalizations;
    return StiefelPoint(sign_fixed_q(data), Trusted{});
  }
  return StiefelPoint(std::move(data), Trusted{});
}

std::size_t reorthonormalization_count() { return g_reorthonormalizations; }

bool same_point(const StiefelPoint& a, const StiefelPoint& b) noexcept {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         a.checksum() == b.checksum();
}

TangentVector::TangentVector(StiefelPoint anchor, Matrix data)
    : anchor_(std::move(anchor)), data_(std::move(data)) {
  require_shape(data_, anchor_.rows(), anchor_.cols(), "tangent vector");
  const double scale = std::max(1.0, data_.norm());
  const double tol =
      1e-9 * std::sqrt(static_cast<double>(anchor_.cols())) * scale;
  const double res = tangency_residual();
  if (!(res <= tol))
    throw NotOnManifoldError("tangency residual " + std::to_string(res));
}

TangentVector::TangentVector(StiefelPoint anchor, Matrix data, Trusted)
    : anchor_(std::move(anchor)), data_(std::move(data)) {}

TangentVector TangentVector::trusted(StiefelPoint anchor, Matrix data) {
  require_shape(data, anchor.rows(), anchor.cols(), "tangent vector");
  return TangentVector(std::move(anchor), std::move(data), Trusted{});
}

TangentVector TangentVector::zero(const StiefelPoint& anchor) {
  return TangentVector(anchor, Matrix::Zero(anchor.rows(), anchor.cols()),
                       Trusted{});
}

double TangentVector::tangency_residual() const {
  const Matrix w = anchor_.matrix().transpose() * data_;
  return (w + w.transpose()).norm();
}

StiefelPoint random_stiefel(Index big_n, Index n, std::uint64_t seed) {
  if (n < 1 || big_n < n)
    throw DimensionError("random_stiefel needs N >= n >= 1");
  Rng rng(seed);
  return StiefelPoint(thin_q(random_normal(big_n, n, rng)));
}

TangentVector project_tangent(const StiefelPoint& x, const Matrix& y) {
  require_shape(y, x.rows(), x.cols(), "project_tangent");
  const Matrix& xm = x.matrix();
  const Matrix xty = xm.transpose() * y;
  Matrix out = y - xm * xty + xm * skew(xty);
  return TangentVector::trusted(x, std::move(out));
}

TangentVector riemannian_gradient(MetricKind metric, const StiefelPoint& x,
                                  const Matrix& egrad) {
  require_shape(egrad, x.rows(), x.cols(), "riemannian_gradient");
  const Matrix& xm = x.matrix();
  if (metric == MetricKind::Euclidean) {
    const Matrix xtg = xm.transpose() * egrad;
    return TangentVector::trusted(x, egrad - xm * sym(xtg));
  }
  // egrad - X egrad^T X
  const Matrix gtx = egrad.transpose() * xm;
  return TangentVector::trusted(x, egrad - xm * gtx);
}

double metric_inner(MetricKind metric, const StiefelPoint& x,
                    const TangentVector& z1, const TangentVector& z2) {
  require_anchor(x, z1, "metric_inner");
  require_anchor(x, z2, "metric_inner");
  const Matrix& a = z1.matrix();
  const Matrix& b = z2.matrix();
  const double euclid = (a.array() * b.array()).sum();
  if (metric == MetricKind::Euclidean) return euclid;
  const Matrix& xm = x.matrix();
  const Matrix xta = xm.transpose() * a;
  const Matrix xtb = xm.transpose() * b;
  return euclid - 0.5 * (xta.array() * xtb.array()).sum();
}

CayleyFactors cayley_factors(const StiefelPoint& x, const TangentVector& z) {
  require_anchor(x, z, "cayley_factors");
  const Matrix& xm = x.matrix();
  const Matrix& zm = z.matrix();
  const Index big_n = xm.rows();
  const Index n = xm.cols();
  const Matrix xtz = xm.transpose() * zm;

  CayleyFactors f;
  f.u.resize(big_n, 2 * n);
  f.u.leftCols(n) = zm - 0.5 * xm * (xtz - xtz.transpose());
  f.u.rightCols(n) = -xm;
  f.v.resize(2 * n, big_n);
  f.v.topRows(n) = xm.transpose();
  f.v.bottomRows(n) = zm.transpose();
  return f;
}

LowRankCayley::LowRankCayley(Matrix u, Matrix v)
    : u_(std::move(u)), v_(std::move(v)) {
  const Index k = u_.cols();
  const Matrix system = Matrix::Identity(k, k) - 0.5 * (v_ * u_);
  small_.compute(system);
  const double rcond = small_.rcond();
  if (!(rcond > 1e-14))
    throw RetractionSingularError(
        "Cayley system (I - VU/2) is singular to working precision (rcond " +
        std::to_string(rcond) + ")");
}

Matrix LowRankCayley::solve(const Matrix& w) const {
  return w + 0.5 * u_ * small_.solve(v_ * w);
}

Matrix LowRankCayley::apply(const Matrix& y) const {
  // (I - A/2)^{-1} (y + U (V y) / 2)
  const Matrix vy = v_ * y;
  const Matrix rhs_small = vy + 0.5 * (v_ * u_) * vy;  // V (y + U V y / 2)
  return y + 0.5 * u_ * vy + 0.5 * u_ * small_.solve(rhs_small);
}

StiefelPoint cayley_retract(const StiefelPoint& x, const TangentVector& z) {
  CayleyFactors f = cayley_factors(x, z);
  LowRankCayley cay(std::move(f.u), std::move(f.v));
  return StiefelPoint::adopt(cay.apply(x.matrix()));
}

namespace {

TangentVector submanifold_to(const StiefelPoint& phi, const TangentVector& y) {
  const Matrix& p = phi.matrix();
  const Matrix pty = p.transpose() * y.matrix();
  return TangentVector::trusted(phi, y.matrix() - p * sym(pty));
}

TangentVector differential_to(const StiefelPoint& x, const TangentVector& z,
                              const TangentVector& y,
                              const StiefelPoint& phi) {
  require_anchor(x, y, "transport_differential");
  CayleyFactors fz = cayley_factors(x, z);
  const CayleyFactors fy = cayley_factors(x, y);
  LowRankCayley cay(std::move(fz.u), std::move(fz.v));
  const Matrix p = cay.solve(x.matrix());          // (I - A_Z/2)^{-1} X
  const Matrix ayp = fy.u * (fy.v * p);             // A_Y p
  return TangentVector::trusted(phi, cay.solve(ayp));
}

}  // namespace

TangentVector transport_submanifold(const StiefelPoint& x,
                                    const TangentVector& z,
                                    const TangentVector& y) {
  require_anchor(x, y, "transport_submanifold");
  return submanifold_to(cayley_retract(x, z), y);
}

TangentVector transport_differential(const StiefelPoint& x,
                                     const TangentVector& z,
                                     const TangentVector& y) {
  return differential_to(x, z, y, cayley_retract(x, z));
}

TangentVector transport(TransportKind kind, const StiefelPoint& x,
                        const TangentVector& z, const TangentVector& y) {
  return kind == TransportKind::Submanifold ? transport_submanifold(x, z, y)
                                            : transport_differential(x, z, y);
}

TangentVector transport(TransportKind kind, const StiefelPoint& x,
                        const TangentVector& z, const TangentVector& y,
                        const StiefelPoint& retracted) {
  require_anchor(x, y, "transport");
  if (kind == TransportKind::Submanifold) return submanifold_to(retracted, y);
  return differential_to(x, z, y, retracted);
}

}  // namespace smor::stiefel

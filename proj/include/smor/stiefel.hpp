#pragma once

// Geometry of the compact Stiefel manifold St(n, N) = {X in R^{N x n} :
// X^T X = I_n}: tangent projection, Riemannian gradients for the Euclidean
// and canonical metrics, the Cayley retraction evaluated through the
// Sherman-Morrison-Woodbury identity, and the two vector transports along it.
//
// No routine in this header materializes an N x N matrix; every operation is
// O(N n^2).

#include <cstddef>
#include <cstdint>

#include "smor/linalg.hpp"

namespace smor::stiefel {

enum class MetricKind { Euclidean, Canonical };
enum class TransportKind { Submanifold, Differential };

/// Orthonormality tolerance for freshly constructed points: 1e-10 * sqrt(n).
double orthonormality_tolerance(Index n);

/// Residual above which a retracted point is re-orthonormalized.
inline constexpr double kDriftThreshold = 1e-8;

/// A point on St(n, N). Immutable after construction.
class StiefelPoint {
 public:
  /// Throws NotOnManifoldError when ||X^T X - I||_F > 1e-10 sqrt(n), or
  /// DimensionError when N < n or n == 0.
  explicit StiefelPoint(Matrix data);

  /// Adopts the output of a retraction. If the orthonormality residual exceeds
  /// kDriftThreshold the matrix is re-orthonormalized by a sign-preserving thin
  /// QR, a warning is printed and reorthonormalization_count() is bumped.
  static StiefelPoint adopt(Matrix data);

  const Matrix& matrix() const noexcept { return data_; }
  Index rows() const noexcept { return data_.rows(); }
  Index cols() const noexcept { return data_.cols(); }
  std::uint64_t checksum() const noexcept { return checksum_; }
  double residual() const { return orthonormality_residual(data_); }

 private:
  struct Trusted {};
  StiefelPoint(Matrix data, Trusted);

  Matrix data_;
  std::uint64_t checksum_ = 0;
};

/// Number of drift-triggered re-orthonormalizations since program start.
std::size_t reorthonormalization_count();

/// Exact identity check used for anchor matching: equal shape and checksum.
bool same_point(const StiefelPoint& a, const StiefelPoint& b) noexcept;

/// A tangent vector Z at an anchor X, i.e. X^T Z + Z^T X = 0.
class TangentVector {
 public:
  /// Checks the tangency residual against 1e-9 sqrt(n) max(1, ||Z||_F).
  TangentVector(StiefelPoint anchor, Matrix data);

  /// Wraps `data` without the tangency check. Used where tangency holds by
  /// construction or where transport accumulates known rounding.
  static TangentVector trusted(StiefelPoint anchor, Matrix data);
  static TangentVector zero(const StiefelPoint& anchor);

  const Matrix& matrix() const noexcept { return data_; }
  const StiefelPoint& anchor() const noexcept { return anchor_; }
  /// ||X^T Z + Z^T X||_F
  double tangency_residual() const;

 private:
  struct Trusted {};
  TangentVector(StiefelPoint anchor, Matrix data, Trusted);

  StiefelPoint anchor_;
  Matrix data_;
};

/// Thin-QR orthonormal factor of an N x n standard normal matrix drawn from a
/// mt19937_64 seeded with `seed`.
StiefelPoint random_stiefel(Index big_n, Index n, std::uint64_t seed);

/// P_X(Y) = (I - X X^T) Y + X skew(X^T Y).
TangentVector project_tangent(const StiefelPoint& x, const Matrix& y);

/// Riemannian gradient of a function with Euclidean gradient `egrad`.
TangentVector riemannian_gradient(MetricKind metric, const StiefelPoint& x,
                                  const Matrix& egrad);

/// g_e(Z1, Z2) = tr(Z1^T Z2); g_c(Z1, Z2) = tr(Z1^T (I - X X^T / 2) Z2).
double metric_inner(MetricKind metric, const StiefelPoint& x,
                    const TangentVector& z1, const TangentVector& z2);

/// Low-rank factors with U V = A_{X,Z} = (I - XX^T/2) Z X^T - X Z^T (I - XX^T/2).
struct CayleyFactors {
  Matrix u;  // N x 2n
  Matrix v;  // 2n x N
};
CayleyFactors cayley_factors(const StiefelPoint& x, const TangentVector& z);

/// Cayley transform of a rank-2n skew matrix A = U V applied through the
/// Sherman-Morrison-Woodbury identity:
///   (I - A/2)^{-1} w = w + U (I - V U / 2)^{-1} V w / 2.
/// Throws RetractionSingularError when the 2n x 2n system has a condition
/// estimate above 1e14.
class LowRankCayley {
 public:
  LowRankCayley(Matrix u, Matrix v);

  /// (I - UV/2)^{-1} w
  Matrix solve(const Matrix& w) const;
  /// (I - UV/2)^{-1} (I + UV/2) y
  Matrix apply(const Matrix& y) const;
  /// U V w
  Matrix multiply(const Matrix& w) const { return u_ * (v_ * w); }

 private:
  Matrix u_;
  Matrix v_;
  Eigen::PartialPivLU<Matrix> small_;
};

/// R_X(Z) = cay(A_{X,Z} / 2) X.
StiefelPoint cayley_retract(const StiefelPoint& x, const TangentVector& z);

/// Y - Phi sym(Phi^T Y) with Phi = R_X(Z): orthogonal projection of Y onto the
/// tangent space at the retracted point.
TangentVector transport_submanifold(const StiefelPoint& x,
                                    const TangentVector& z,
                                    const TangentVector& y);

/// Differentiated retraction DR_X(Z)[Y] =
/// (I - A_Z/2)^{-1} A_Y (I - A_Z/2)^{-1} X.
TangentVector transport_differential(const StiefelPoint& x,
                                     const TangentVector& z,
                                     const TangentVector& y);

TangentVector transport(TransportKind kind, const StiefelPoint& x,
                        const TangentVector& z, const TangentVector& y);

/// Same as above with the retracted point R_X(Z) already known.
TangentVector transport(TransportKind kind, const StiefelPoint& x,
                        const TangentVector& z, const TangentVector& y,
                        const StiefelPoint& retracted);

}  // namespace smor::stiefel

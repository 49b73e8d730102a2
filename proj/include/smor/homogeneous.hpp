#pragma once

// St(n, N) viewed as the homogeneous space O(N)/O(N-n). A section
// lambda(X) = [X, X_perp] maps each point into O(N); tangent vectors are lifted
// to the fixed horizontal space g^{hor,E} of skew matrices
//
//     [[W, -C^T],
//      [C,  0  ]],   W in Skew(n), C in R^{(N-n) x n},
//
// and mapped back through the Cayley retraction on O(N) at the identity.
// Horizontal elements are stored compactly (packed strict lower triangle of W
// plus the full C block), never as N x N matrices.

#include <cstdint>
#include <variant>

#include "smor/stiefel.hpp"

namespace smor::homogeneous {

using stiefel::StiefelPoint;
using stiefel::TangentVector;

/// Orthogonal completion [X | complement] of a Stiefel point.
struct OrthoSection {
  StiefelPoint base;
  Matrix complement;  // N x (N - n)
};

/// Compact storage of an element of g^{hor,E} (or of any matrix sharing its
/// sparsity pattern and skew/symmetric mirror structure).
class HorizontalElement {
 public:
  HorizontalElement() = default;
  HorizontalElement(Vector skew_lower, Matrix comp_block);

  static HorizontalElement zero(Index big_n, Index n);
  /// Packs an n x n matrix by reading its strict lower triangle.
  static HorizontalElement from_blocks(const Matrix& w, const Matrix& c);

  Index n() const noexcept { return comp_.cols(); }
  Index big_n() const noexcept { return comp_.rows() + comp_.cols(); }

  /// Strict lower triangle of W, column by column.
  const Vector& skew_lower() const noexcept { return lower_; }
  Vector& skew_lower() noexcept { return lower_; }
  const Matrix& comp_block() const noexcept { return comp_; }
  Matrix& comp_block() noexcept { return comp_; }

  /// Unpacks W with W(i,j) = -W(j,i), zero diagonal.
  Matrix skew_block() const;
  /// Dense N x N matrix [[W, -C^T], [C, 0]] (test path only).
  Matrix dense() const;

 private:
  Vector lower_;
  Matrix comp_;
};

/// Draws A ~ N(0,1)^{N x (N-n)}, deflates A <- A - X X^T A and keeps the thin
/// QR factor as the complement. Throws SectionDegenerateError on rank loss.
OrthoSection section_qr(const StiefelPoint& x, std::uint64_t seed);

/// Omega_X(Z) = (I - XX^T/2) Z X^T - X Z^T (I - XX^T/2), dense N x N.
Matrix lift_omega(const StiefelPoint& x, const TangentVector& z);

/// lambda^T Omega_X(Z) lambda in block form: W = skew(X^T Z), C = X_perp^T Z.
HorizontalElement lift_to_global(const OrthoSection& section,
                                 const TangentVector& z);

/// lambda(X) cay(M/2) E for the horizontal element M, through the rank-2n
/// factorization M = U' V' with U' = [[W, -I], [C, 0]], V' = [[I, 0], [0, C^T]].
StiefelPoint retract_global(const OrthoSection& section,
                            const HorizontalElement& v);

namespace pointwise {
struct Mul {};
struct Add {};
struct Scale {
  double s;
};
struct SqrtAddDelta {
  double delta;
};
}  // namespace pointwise
using PointwiseOp = std::variant<pointwise::Mul, pointwise::Add,
                                 pointwise::Scale, pointwise::SqrtAddDelta>;

/// Applies `op` entrywise to the stored entries. `b` is ignored for unary ops.
/// Mul of skew storage yields the (symmetric) Hadamard square, so the result
/// is storage-compatible but not necessarily horizontal.
HorizontalElement horizontal_pointwise(const HorizontalElement& a,
                                       const HorizontalElement& b,
                                       const PointwiseOp& op);

}  // namespace smor::homogeneous

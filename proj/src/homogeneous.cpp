#include "smor/homogeneous.hpp"

#include <cmath>

namespace smor::homogeneous {

namespace {

Index packed_size(Index n) { return n * (n - 1) / 2; }

template <class F>
HorizontalElement zip(const HorizontalElement& a, const HorizontalElement& b,
                      F f) {
  if (a.skew_lower().size() != b.skew_lower().size() ||
      a.comp_block().rows() != b.comp_block().rows() ||
      a.comp_block().cols() != b.comp_block().cols())
    throw DimensionError("horizontal_pointwise: shape mismatch");
  Vector lower = a.skew_lower().binaryExpr(b.skew_lower(), f);
  Matrix comp = a.comp_block().binaryExpr(b.comp_block(), f);
  return HorizontalElement(std::move(lower), std::move(comp));
}

template <class F>
HorizontalElement map(const HorizontalElement& a, F f) {
  return HorizontalElement(a.skew_lower().unaryExpr(f),
                           a.comp_block().unaryExpr(f));
}

}  // namespace

HorizontalElement::HorizontalElement(Vector skew_lower, Matrix comp_block)
    : lower_(std::move(skew_lower)), comp_(std::move(comp_block)) {
  if (lower_.size() != packed_size(comp_.cols()))
    throw DimensionError("horizontal element: packed skew block has " +
                         std::to_string(lower_.size()) + " entries for n = " +
                         std::to_string(comp_.cols()));
}

HorizontalElement HorizontalElement::zero(Index big_n, Index n) {
  return HorizontalElement(Vector::Zero(packed_size(n)),
                           Matrix::Zero(big_n - n, n));
}

HorizontalElement HorizontalElement::from_blocks(const Matrix& w,
                                                 const Matrix& c) {
  const Index n = w.rows();
  if (w.cols() != n || c.cols() != n)
    throw DimensionError("horizontal element: block shapes disagree");
  Vector lower(packed_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) lower(k++) = w(i, j);
  return HorizontalElement(std::move(lower), c);
}

Matrix HorizontalElement::skew_block() const {
  const Index n = comp_.cols();
  Matrix w = Matrix::Zero(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      w(i, j) = lower_(k);
      w(j, i) = -lower_(k);
      ++k;
    }
  return w;
}

Matrix HorizontalElement::dense() const {
  const Index n = comp_.cols();
  const Index big_n = this->big_n();
  Matrix m = Matrix::Zero(big_n, big_n);
  m.topLeftCorner(n, n) = skew_block();
  m.bottomLeftCorner(big_n - n, n) = comp_;
  m.topRightCorner(n, big_n - n) = -comp_.transpose();
  return m;
}

OrthoSection section_qr(const StiefelPoint& x, std::uint64_t seed) {
  const Index big_n = x.rows();
  const Index n = x.cols();
  if (big_n <= n)
    throw DimensionError("section_qr needs N > n");
  const Matrix& xm = x.matrix();
  Rng rng(seed);
  Matrix a = random_normal(big_n, big_n - n, rng);
  a -= xm * (xm.transpose() * a);

  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix& r = qr.matrixQR();
  const double scale = std::max(1.0, r.diagonal().cwiseAbs().maxCoeff());
  for (Index j = 0; j < big_n - n; ++j)
    if (std::abs(r(j, j)) < 1e-10 * scale)
      throw SectionDegenerateError(
          "deflated sample lost rank; retry section_qr with a new seed");
  Matrix q = qr.householderQ() * Matrix::Identity(big_n, big_n - n);
  return OrthoSection{x, std::move(q)};
}

Matrix lift_omega(const StiefelPoint& x, const TangentVector& z) {
  const Matrix& xm = x.matrix();
  const Matrix& zm = z.matrix();
  require_shape(zm, xm.rows(), xm.cols(), "lift_omega");
  const Matrix proj =
      Matrix::Identity(xm.rows(), xm.rows()) - 0.5 * xm * xm.transpose();
  return proj * zm * xm.transpose() - xm * zm.transpose() * proj;
}

HorizontalElement lift_to_global(const OrthoSection& section,
                                 const TangentVector& z) {
  if (!stiefel::same_point(section.base, z.anchor()))
    throw AnchorMismatchError("lift_to_global: tangent vector anchor differs");
  const Matrix w = skew(section.base.matrix().transpose() * z.matrix());
  const Matrix c = section.complement.transpose() * z.matrix();
  return HorizontalElement::from_blocks(w, c);
}

StiefelPoint retract_global(const OrthoSection& section,
                            const HorizontalElement& v) {
  const Index n = section.base.cols();
  const Index big_n = section.base.rows();
  if (v.n() != n || v.big_n() != big_n)
    throw DimensionError("retract_global: element does not match section");
  const Index m = big_n - n;
  const Matrix& c = v.comp_block();

  Matrix u(big_n, 2 * n);
  u.setZero();
  u.topLeftCorner(n, n) = v.skew_block();
  u.topRightCorner(n, n) = -Matrix::Identity(n, n);
  u.bottomLeftCorner(m, n) = c;
  Matrix vv(2 * n, big_n);
  vv.setZero();
  vv.topLeftCorner(n, n).setIdentity();
  vv.bottomRightCorner(n, m) = c.transpose();

  stiefel::LowRankCayley cay(std::move(u), std::move(vv));
  Matrix e = Matrix::Zero(big_n, n);
  e.topRows(n).setIdentity();
  const Matrix y = cay.apply(e);  // cay(M/2) E in the section frame

  Matrix out = section.base.matrix() * y.topRows(n);
  out.noalias() += section.complement * y.bottomRows(m);
  return StiefelPoint::adopt(std::move(out));
}

HorizontalElement horizontal_pointwise(const HorizontalElement& a,
                                       const HorizontalElement& b,
                                       const PointwiseOp& op) {
  return std::visit(
      [&](const auto& o) -> HorizontalElement {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, pointwise::Mul>) {
          return zip(a, b, [](double x, double y) { return x * y; });
        } else if constexpr (std::is_same_v<T, pointwise::Add>) {
          return zip(a, b, [](double x, double y) { return x + y; });
        } else if constexpr (std::is_same_v<T, pointwise::Scale>) {
          const double s = o.s;
          return map(a, [s](double x) { return s * x; });
        } else {
          const double d = o.delta;
          return map(a, [d](double x) {
            if (x + d < 0.0)
              throw DivisionDegenerateError(
                  "sqrt_add_delta: negative operand");
            return std::sqrt(x + d);
          });
        }
      },
      op);
}

}  // namespace smor::homogeneous

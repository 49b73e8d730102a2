#include "smor/reduction.hpp"

#include <cmath>
#include <iostream>
#include <memory>

namespace smor::mor {

void SnapshotSet::validate() const {
  const Index n_params = static_cast<Index>(params.size());
  if (n_params == 0 || data.cols() == 0)
    throw EmptyDataError("snapshot set is empty");
  if (data.cols() != n_params * block_cols())
    throw DimensionError("snapshot set: " + std::to_string(data.cols()) +
                         " columns for " + std::to_string(n_params) +
                         " parameters and K = " + std::to_string(steps));
  if (normalized)
    require_shape(initial_states, data.rows(), n_params,
                  "snapshot set initial states");
}

SnapshotSet normalize_snapshots(const SnapshotSet& raw) {
  if (raw.normalized)
    throw NormalizationError("snapshot set is already normalized");
  raw.validate();
  SnapshotSet out = raw;
  const Index n_params = static_cast<Index>(raw.params.size());
  out.initial_states.resize(raw.data.rows(), n_params);
  for (Index j = 0; j < n_params; ++j) {
    const Vector x0 = raw.data.col(j * raw.block_cols());
    out.initial_states.col(j) = x0;
    out.data.middleCols(j * raw.block_cols(), raw.block_cols()).colwise() -= x0;
  }
  out.normalized = true;
  return out;
}

stiefel::StiefelPoint psd_cotangent_lift(const Matrix& snapshots, Index n) {
  if (snapshots.rows() % 2 != 0)
    throw DimensionError("psd_cotangent_lift: snapshot rows must be even");
  const Index d = snapshots.rows() / 2;
  const Index k = snapshots.cols();
  if (n < 1 || n > std::min(d, 2 * k))
    throw DimensionError("psd_cotangent_lift: n must lie in [1, min(d, 2k)]");
  Matrix lifted(d, 2 * k);
  lifted.leftCols(k) = snapshots.topRows(d);
  lifted.rightCols(k) = snapshots.bottomRows(d);

  Eigen::JacobiSVD<Matrix> svd(lifted, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  if (sigma(n - 1) < 1e-12 * sigma(0))
    std::cerr << "warning: psd_cotangent_lift: sigma_" << n << " = "
              << sigma(n - 1) << " is below 1e-12 sigma_1\n";
  Matrix u = svd.matrixU().leftCols(n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) {
      if (u(i, j) != 0.0) {
        if (u(i, j) < 0.0) u.col(j) = -u.col(j);
        break;
      }
    }
  }
  return stiefel::StiefelPoint::adopt(std::move(u));
}

Autoencoder psd_autoencoder(const stiefel::StiefelPoint& x) {
  const Matrix w = x.matrix();
  const Index d = w.rows(), n = w.cols();
  Matrix a = Matrix::Zero(2 * d, 2 * n);
  a.topLeftCorner(d, n) = w;
  a.bottomRightCorner(d, n) = w;
  Autoencoder ae;
  ae.full_dim = 2 * d;
  ae.reduced_dim = 2 * n;
  ae.encode = [w, d, n](const Vector& v) {
    Vector out(2 * n);
    out.head(n).noalias() = w.transpose() * v.head(d);
    out.tail(n).noalias() = w.transpose() * v.tail(d);
    return out;
  };
  ae.decode = [w, d, n](const Vector& v) {
    Vector out(2 * d);
    out.head(d).noalias() = w * v.head(n);
    out.tail(d).noalias() = w * v.tail(n);
    return out;
  };
  ae.decode_jacobian = [a](const Vector&) { return a; };
  return ae;
}

Autoencoder network_autoencoder(const net::Network& network) {
  auto shared = std::make_shared<const net::Network>(network);
  Autoencoder ae;
  ae.full_dim = network.full_dim;
  ae.reduced_dim = network.reduced_dim;
  ae.encode = [shared](const Vector& v) -> Vector {
    return net::encode(*shared, v);
  };
  ae.decode = [shared](const Vector& v) -> Vector {
    return net::decode(*shared, v);
  };
  ae.decode_jacobian = [shared](const Vector& v) {
    return net::decoder_jacobian(*shared, v);
  };
  return ae;
}

Vector RomSpec::lift(const Vector& xi) const {
  Vector x = ae.decode(xi);
  if (x_ref) x += *x_ref;
  return x;
}

RomSpec build_rom(const Autoencoder& ae, const Vector& x0, bool use_ref) {
  if (x0.size() != ae.full_dim)
    throw DimensionError("build_rom: x0 does not match the autoencoder");
  RomSpec rom;
  rom.ae = ae;
  if (use_ref) {
    rom.x_r0 = ae.encode(Vector::Zero(ae.full_dim));
    rom.x_ref = x0 - ae.decode(rom.x_r0);
  } else {
    rom.x_r0 = ae.encode(x0);
  }
  return rom;
}

Vector reduced_vector_field(const RomSpec& rom, const integ::Field& fom_field,
                            double t, const Vector& xi) {
  const Index n2 = rom.ae.reduced_dim, d2 = rom.ae.full_dim;
  if (xi.size() != n2)
    throw DimensionError("reduced_vector_field: reduced state has wrong length");
  const Index n = n2 / 2, d = d2 / 2;
  const Vector f = fom_field(t, rom.lift(xi));
  if (f.size() != d2)
    throw DimensionError("reduced_vector_field: FOM field has wrong length");
  const Matrix jac = rom.ae.decode_jacobian(xi);  // 2d x 2n
  // jac^T [f_p; -f_q], rows split into the q and p halves of xi
  const Vector w = jac.topRows(d).transpose() * f.tail(d) -
                   jac.bottomRows(d).transpose() * f.head(d);
  Vector v(n2);
  v.head(n) = -w.tail(n);
  v.tail(n) = w.head(n);
  return v;
}

Trajectory solve_rom(const RomSpec& rom, const integ::OdeSystem& fom, double t0,
                     double t1, Index steps,
                     const integ::MidpointOptions& options) {
  integ::OdeSystem reduced;
  reduced.dim = rom.ae.reduced_dim;
  const integ::Field field = fom.field;
  reduced.field = [&rom, field](double t, const Vector& xi) {
    return reduced_vector_field(rom, field, t, xi);
  };
  return integ::implicit_midpoint(reduced, rom.x_r0, t0, t1, steps, options);
}

Trajectory reconstruct(const RomSpec& rom, const Trajectory& reduced) {
  Trajectory out;
  out.t0 = reduced.t0;
  out.t1 = reduced.t1;
  out.steps = reduced.steps;
  out.states.resize(rom.ae.full_dim, reduced.states.cols());
  for (Index k = 0; k < reduced.states.cols(); ++k)
    out.states.col(k) = rom.lift(reduced.states.col(k));
  return out;
}

namespace {

double relative_sum(const Matrix& exact, const Matrix& approx) {
  const double den = exact.squaredNorm();
  if (den == 0.0)
    throw DivisionDegenerateError("error measure: exact trajectory is zero");
  return std::sqrt((exact - approx).squaredNorm() / den);
}

}  // namespace

double reduction_error(ErrorVariant variant, const Matrix& exact,
                       const RomSpec& rom, const Matrix& reduced) {
  if (exact.cols() != reduced.cols())
    throw DimensionError("reduction_error: trajectories differ in length");
  if (variant == ErrorVariant::WithRef && !rom.x_ref)
    throw ConfigError("reduction_error: with_ref variant needs a reference state");
  Matrix approx(exact.rows(), exact.cols());
  for (Index k = 0; k < exact.cols(); ++k) {
    approx.col(k) = rom.ae.decode(reduced.col(k));
    if (variant == ErrorVariant::WithRef) approx.col(k) += *rom.x_ref;
  }
  return relative_sum(exact, approx);
}

double projection_error(ErrorVariant variant, const Matrix& exact,
                        const Autoencoder& ae,
                        const std::optional<Vector>& x_ref) {
  if (variant == ErrorVariant::WithRef && !x_ref)
    throw ConfigError("projection_error: with_ref variant needs a reference state");
  Matrix approx(exact.rows(), exact.cols());
  for (Index k = 0; k < exact.cols(); ++k) {
    if (variant == ErrorVariant::WithRef)
      approx.col(k) = *x_ref + ae.decode(ae.encode(exact.col(k) - *x_ref));
    else
      approx.col(k) = ae.decode(ae.encode(exact.col(k)));
  }
  return relative_sum(exact, approx);
}

double symplectic_residual_projection(const RomSpec& rom,
                                      const integ::Field& fom_field,
                                      const Trajectory& reduced) {
  const Index d = rom.ae.full_dim / 2, n = rom.ae.reduced_dim / 2;
  const double h = (reduced.t1 - reduced.t0) / static_cast<double>(reduced.steps);
  const Matrix j2n = poisson_matrix(n), j2d = poisson_matrix(d);
  double worst = 0.0;
  for (Index k = 0; k < reduced.steps; ++k) {
    const Vector mid =
        0.5 * (reduced.states.col(k) + reduced.states.col(k + 1));
    const double tm = reduced.time(k) + 0.5 * h;
    const Matrix jac = rom.ae.decode_jacobian(mid);
    const Vector xdot =
        jac * (reduced.states.col(k + 1) - reduced.states.col(k)) / h;
    const Vector r = xdot - fom_field(tm, rom.lift(mid));
    const Vector proj = j2n * (jac.transpose() * (j2d.transpose() * r));
    worst = std::max(worst, proj.norm());
  }
  return worst;
}

}  // namespace smor::mor

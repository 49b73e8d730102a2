#include "smor/integrators.hpp"

#include <cmath>
#include <string>

namespace smor::integ {

Matrix finite_difference_jacobian(const Field& field, double t,
                                  const Vector& x, double step) {
  const Index n = x.size();
  Matrix jac(n, n);
  Vector xp = x, xm = x;
  for (Index j = 0; j < n; ++j) {
    const double e = step * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + e;
    xm(j) = x(j) - e;
    jac.col(j) = (field(t, xp) - field(t, xm)) / (2.0 * e);
    xp(j) = xm(j) = x(j);
  }
  return jac;
}

namespace {

void check_finite(const Vector& v, Index step) {
  if (!v.allFinite())
    throw IntegrationFailureError("implicit midpoint: non-finite state at step " +
                                  std::to_string(step));
}

}  // namespace

Trajectory implicit_midpoint(const OdeSystem& sys, const Vector& x0, double t0,
                             double t1, Index steps,
                             const MidpointOptions& options) {
  if (steps < 1) throw ConfigError("implicit_midpoint: need at least one step");
  if (!(t1 > t0)) throw ConfigError("implicit_midpoint: need t1 > t0");
  if (!(options.tol > 0.0)) throw ConfigError("implicit_midpoint: tol <= 0");
  if (x0.size() != sys.dim)
    throw DimensionError("implicit_midpoint: initial state has length " +
                         std::to_string(x0.size()) + ", system dim " +
                         std::to_string(sys.dim));

  Trajectory traj;
  traj.t0 = t0;
  traj.t1 = t1;
  traj.steps = steps;
  traj.states.resize(sys.dim, steps + 1);
  traj.states.col(0) = x0;
  const double h = (t1 - t0) / static_cast<double>(steps);
  const Matrix id = Matrix::Identity(sys.dim, sys.dim);

  if (sys.linear) {
    const Matrix& m = *sys.linear;
    require_shape(m, sys.dim, sys.dim, "implicit_midpoint linear operator");
    const Eigen::PartialPivLU<Matrix> lu(id - 0.5 * h * m);
    const Matrix rhs = id + 0.5 * h * m;
    for (Index k = 0; k < steps; ++k) {
      traj.states.col(k + 1) = lu.solve(rhs * traj.states.col(k));
      check_finite(traj.states.col(k + 1), k);
    }
    return traj;
  }

  if (!sys.field) throw ConfigError("implicit_midpoint: system has no field");
  Vector x = x0;
  for (Index k = 0; k < steps; ++k) {
    const double tk = traj.time(k);
    const double tm = tk + 0.5 * h;
    Vector y = x + h * sys.field(tk, x);
    bool converged = false;
    for (int it = 0; it < options.max_newton; ++it) {
      const Vector mid = 0.5 * (x + y);
      const Vector g = y - x - h * sys.field(tm, mid);
      const Matrix jf = sys.jacobian
                            ? sys.jacobian(tm, mid)
                            : finite_difference_jacobian(sys.field, tm, mid,
                                                         options.fd_step);
      const Vector dy = (id - 0.5 * h * jf).partialPivLu().solve(g);
      y -= dy;
      if (!dy.allFinite()) break;
      if (dy.norm() < options.tol * std::max(1.0, y.norm())) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw IntegrationFailureError(
          "implicit midpoint: Newton did not converge at step " +
          std::to_string(k));
    check_finite(y, k);
    traj.states.col(k + 1) = y;
    x = std::move(y);
  }
  return traj;
}

}  // namespace smor::integ

#pragma once

// Implicit midpoint rule, x_{k+1} = x_k + h f(t_k + h/2, (x_k + x_{k+1})/2),
// solved by Newton's method (or a single cached LU solve for linear fields).

#include <functional>
#include <optional>

#include "smor/linalg.hpp"

namespace smor::integ {

using Field = std::function<Vector(double, const Vector&)>;
using FieldJacobian = std::function<Matrix(double, const Vector&)>;

struct OdeSystem {
  Index dim = 0;
  Field field;
  FieldJacobian jacobian;          // optional; finite differences otherwise
  std::optional<Matrix> linear;    // f(t, x) = M x when set
  std::function<double(const Vector&)> hamiltonian;  // optional
};

struct Trajectory {
  Matrix states;  // dim x (K + 1)
  double t0 = 0.0;
  double t1 = 1.0;
  Index steps = 0;

  double time(Index k) const {
    return t0 + static_cast<double>(k) * (t1 - t0) / static_cast<double>(steps);
  }
};

struct MidpointOptions {
  double tol = 1e-12;
  int max_newton = 50;
  double fd_step = 1e-7;
};

/// Throws IntegrationFailureError naming the step when Newton does not reach
/// ||dx|| < tol * max(1, ||x||) within max_newton iterations.
Trajectory implicit_midpoint(const OdeSystem& sys, const Vector& x0, double t0,
                             double t1, Index steps,
                             const MidpointOptions& options = {});

/// Central-difference Jacobian of `field` at (t, x).
Matrix finite_difference_jacobian(const Field& field, double t,
                                  const Vector& x, double step);

}  // namespace smor::integ

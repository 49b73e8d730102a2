#pragma once

// Full order models: the 1D linear wave equation on [-1/2, 1/2] with N+2
// nodes (boundary nodes included in the state) and the 1D sine-Gordon
// equation on [a, b] with N interior nodes and time-dependent Dirichlet data.

#include <utility>

#include "smor/integrators.hpp"

namespace smor::models {

// --- linear wave -------------------------------------------------------------

struct WaveModel {
  Index n_grid = 0;  // N; the state has 2(N+2) entries
  double mu = 1.0;
  double h = 0.0;    // 1 / (N + 1)
  Matrix k;          // (N+2) x (N+2), rows 1..N carry the -1/2 couplings
  Matrix stiffness;  // (1/h)(K + K^T)

  Index dim() const { return 2 * (n_grid + 2); }
  double node(Index i) const { return -0.5 + static_cast<double>(i) * h; }
};

WaveModel wave_build(Index n_grid, double mu);

/// q_i = h(s(xi_i)), p_i = -mu d/dxi u0(xi_i) with s(xi) = 28 |xi + 1/2|.
Vector wave_initial(const WaveModel& model);

/// [p; -(1/h)(K + K^T) q]
Vector wave_vector_field(const WaveModel& model, const Vector& x);

/// q^T K q + (h/2) p^T p
double wave_hamiltonian(const WaveModel& model, const Vector& x);

/// Linear system with the field and its matrix.
integ::OdeSystem wave_system(const WaveModel& model);

/// The cubic bump of the initial condition and its derivative in s.
double wave_bump(double s);
double wave_bump_derivative(double s);

// --- sine-Gordon -------------------------------------------------------------

enum class SgCase { SingleSoliton, Doublets };

struct SineGordonModel {
  Index n_grid = 0;
  double nu = 0.5;
  double a = -10.0;
  double b = 10.0;
  double h = 0.0;  // (b - a) / (N + 1)
  SgCase bc = SgCase::SingleSoliton;

  Index dim() const { return 2 * n_grid; }
  double node(Index i) const { return a + static_cast<double>(i) * h; }
};

SineGordonModel sg_build(Index n_grid, double nu, double a, double b,
                         SgCase bc);

/// Closed-form solution (u, u_t) at (t, xi).
std::pair<double, double> sg_exact(SgCase bc, double nu, double t, double xi);

/// Dense (1/h^2) tridiag(1, -2, 1), N x N.
Matrix sg_laplacian(const SineGordonModel& model);

/// sin(q) minus the boundary values phi(t)/h^2, psi(t)/h^2 in the end slots.
Vector sg_nonlinearity(const SineGordonModel& model, double t, const Vector& q);

/// [p; L q - f(t, q)]
Vector sg_vector_field(const SineGordonModel& model, double t, const Vector& x);
Matrix sg_jacobian(const SineGordonModel& model, const Vector& x);

/// Discrete Hamiltonian including the boundary terms.
double sg_hamiltonian(const SineGordonModel& model, double t, const Vector& x);

integ::OdeSystem sg_system(const SineGordonModel& model);

/// Exact state [u(t, xi_i); u_t(t, xi_i)] on the interior nodes.
Vector sg_exact_state(const SineGordonModel& model, double t);

/// Exact states sampled at t0 + k (t1 - t0) / K, k = 0..K.
integ::Trajectory sg_exact_trajectory(const SineGordonModel& model, double t0,
                                      double t1, Index steps);

/// max |u_tt - u_xixi + sin u| over interior grid points, second-order
/// central differences. u_grid is space x time.
double sg_residual_check(const Matrix& u_grid, double dxi, double dt);

}  // namespace smor::models

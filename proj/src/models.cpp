#include "smor/models.hpp"

#include <cmath>

namespace smor::models {

WaveModel wave_build(Index n_grid, double mu) {
  if (n_grid < 1) throw ConfigError("wave_build: N must be at least 1");
  if (!(mu > 0.0)) throw ConfigError("wave_build: mu must be positive");
  WaveModel m;
  m.n_grid = n_grid;
  m.mu = mu;
  m.h = 1.0 / static_cast<double>(n_grid + 1);
  const Index size = n_grid + 2;
  const double scale = mu * mu / m.h;

  // q^T K q = mu^2 / (4h) sum_{i=1}^{N} [(q_i - q_{i-1})^2 + (q_{i+1} - q_i)^2]
  Vector diag = Vector::Zero(size);
  for (Index i = 1; i <= n_grid; ++i) {
    diag(i - 1) += 0.25;
    diag(i) += 0.5;
    diag(i + 1) += 0.25;
  }
  m.k = Matrix::Zero(size, size);
  m.k.diagonal() = scale * diag;
  for (Index i = 1; i <= n_grid; ++i) {
    m.k(i, i - 1) = -0.5 * scale;
    m.k(i, i + 1) = -0.5 * scale;
  }
  m.stiffness = (m.k + m.k.transpose()) / m.h;
  return m;
}

double wave_bump(double s) {
  if (s >= 0.0 && s <= 1.0) return 1.0 - 1.5 * s * s + 0.75 * s * s * s;
  if (s > 1.0 && s <= 2.0) return 0.25 * std::pow(2.0 - s, 3);
  return 0.0;
}

double wave_bump_derivative(double s) {
  if (s >= 0.0 && s <= 1.0) return -3.0 * s + 2.25 * s * s;
  if (s > 1.0 && s <= 2.0) return -0.75 * (2.0 - s) * (2.0 - s);
  return 0.0;
}

Vector wave_initial(const WaveModel& model) {
  const Index size = model.n_grid + 2;
  Vector x(2 * size);
  for (Index i = 0; i < size; ++i) {
    const double r = model.node(i) + 0.5;
    const double s = 28.0 * std::abs(r);
    const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    x(i) = wave_bump(s);
    x(size + i) = -model.mu * wave_bump_derivative(s) * 28.0 * sign;
  }
  return x;
}

Vector wave_vector_field(const WaveModel& model, const Vector& x) {
  if (x.size() != model.dim())
    throw DimensionError("wave_vector_field: state has wrong length");
  const Index size = model.n_grid + 2;
  Vector out(x.size());
  out.head(size) = x.tail(size);
  out.tail(size).noalias() = -(model.stiffness * x.head(size));
  return out;
}

double wave_hamiltonian(const WaveModel& model, const Vector& x) {
  if (x.size() != model.dim())
    throw DimensionError("wave_hamiltonian: state has wrong length");
  const Index size = model.n_grid + 2;
  const auto q = x.head(size);
  const auto p = x.tail(size);
  return q.dot(model.k * q) + 0.5 * model.h * p.squaredNorm();
}

integ::OdeSystem wave_system(const WaveModel& model) {
  integ::OdeSystem sys;
  sys.dim = model.dim();
  const Index size = model.n_grid + 2;
  Matrix m = Matrix::Zero(sys.dim, sys.dim);
  m.topRightCorner(size, size).setIdentity();
  m.bottomLeftCorner(size, size) = -model.stiffness;
  sys.linear = m;
  sys.field = [model](double, const Vector& x) {
    return wave_vector_field(model, x);
  };
  sys.jacobian = [m](double, const Vector&) { return m; };
  sys.hamiltonian = [model](const Vector& x) {
    return wave_hamiltonian(model, x);
  };
  return sys;
}

// --- sine-Gordon -------------------------------------------------------------

SineGordonModel sg_build(Index n_grid, double nu, double a, double b,
                         SgCase bc) {
  if (!(std::abs(nu) < 1.0)) throw ConfigError("sine-Gordon: need |nu| < 1");
  if (!(b > a)) throw ConfigError("sine-Gordon: need b > a");
  if (n_grid < 1) throw ConfigError("sine-Gordon: N must be at least 1");
  SineGordonModel m;
  m.n_grid = n_grid;
  m.nu = nu;
  m.a = a;
  m.b = b;
  m.h = (b - a) / static_cast<double>(n_grid + 1);
  m.bc = bc;
  return m;
}

std::pair<double, double> sg_exact(SgCase bc, double nu, double t, double xi) {
  if (!(std::abs(nu) < 1.0)) throw ConfigError("sine-Gordon: need |nu| < 1");
  const double c = std::sqrt(1.0 - nu * nu);
  if (bc == SgCase::SingleSoliton) {
    const double z = (xi - nu * t) / c;
    // e^z / (1 + e^{2z}) = sech(z) / 2, evaluated without overflow
    return {4.0 * std::atan(std::exp(z)), -2.0 * nu / (c * std::cosh(z))};
  }
  const double arg = nu * t / c;
  const double sech = 1.0 / std::cosh(arg);
  const double g = nu * sech;
  const double dg = -(nu * nu / c) * sech * std::tanh(arg);
  const double s = std::sinh(xi / c);
  const double gs = g * s;
  return {4.0 * std::atan(gs), 4.0 * s * dg / (1.0 + gs * gs)};
}

Matrix sg_laplacian(const SineGordonModel& model) {
  const Index n = model.n_grid;
  const double inv = 1.0 / (model.h * model.h);
  Matrix l = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    l(i, i) = -2.0 * inv;
    if (i > 0) l(i, i - 1) = inv;
    if (i + 1 < n) l(i, i + 1) = inv;
  }
  return l;
}

namespace {

Vector apply_laplacian(const SineGordonModel& model, const Vector& q) {
  const Index n = model.n_grid;
  const double inv = 1.0 / (model.h * model.h);
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    double v = -2.0 * q(i);
    if (i > 0) v += q(i - 1);
    if (i + 1 < n) v += q(i + 1);
    out(i) = inv * v;
  }
  return out;
}

}  // namespace

Vector sg_nonlinearity(const SineGordonModel& model, double t, const Vector& q) {
  if (q.size() != model.n_grid)
    throw DimensionError("sg_nonlinearity: q has wrong length");
  Vector f = q.array().sin();
  const double inv = 1.0 / (model.h * model.h);
  f(0) -= inv * sg_exact(model.bc, model.nu, t, model.a).first;
  f(model.n_grid - 1) -= inv * sg_exact(model.bc, model.nu, t, model.b).first;
  return f;
}

Vector sg_vector_field(const SineGordonModel& model, double t, const Vector& x) {
  if (x.size() != model.dim())
    throw DimensionError("sg_vector_field: state has wrong length");
  const Index n = model.n_grid;
  const Vector q = x.head(n);
  Vector out(2 * n);
  out.head(n) = x.tail(n);
  out.tail(n) = apply_laplacian(model, q) - sg_nonlinearity(model, t, q);
  return out;
}

Matrix sg_jacobian(const SineGordonModel& model, const Vector& x) {
  const Index n = model.n_grid;
  Matrix jac = Matrix::Zero(2 * n, 2 * n);
  jac.topRightCorner(n, n).setIdentity();
  Matrix lower = sg_laplacian(model);
  lower.diagonal() -= x.head(n).array().cos().matrix();
  jac.bottomLeftCorner(n, n) = lower;
  return jac;
}

double sg_hamiltonian(const SineGordonModel& model, double t, const Vector& x) {
  if (x.size() != model.dim())
    throw DimensionError("sg_hamiltonian: state has wrong length");
  const Index n = model.n_grid;
  const double h = model.h;
  const Vector q = x.head(n);
  const auto p = x.tail(n);
  const auto [phi, dphi] = sg_exact(model.bc, model.nu, t, model.a);
  const auto [psi, dpsi] = sg_exact(model.bc, model.nu, t, model.b);
  const double inv = 1.0 / (h * h);
  double value = -0.5 * h * q.dot(apply_laplacian(model, q)) +
                 0.5 * h * p.squaredNorm();
  value += 0.5 * h *
           (-2.0 * q(0) * phi * inv + phi * phi * inv + psi * psi * inv -
            2.0 * q(n - 1) * psi * inv);
  value += 0.25 * h * (dphi * dphi + dpsi * dpsi);
  value += 0.5 * h * ((1.0 - std::cos(phi)) + (1.0 - std::cos(psi)));
  value += h * (1.0 - q.array().cos()).sum();
  return value;
}

integ::OdeSystem sg_system(const SineGordonModel& model) {
  integ::OdeSystem sys;
  sys.dim = model.dim();
  sys.field = [model](double t, const Vector& x) {
    return sg_vector_field(model, t, x);
  };
  sys.jacobian = [model](double, const Vector& x) {
    return sg_jacobian(model, x);
  };
  return sys;
}

Vector sg_exact_state(const SineGordonModel& model, double t) {
  const Index n = model.n_grid;
  Vector x(2 * n);
  for (Index i = 0; i < n; ++i) {
    const auto [u, ut] = sg_exact(model.bc, model.nu, t, model.node(i + 1));
    x(i) = u;
    x(n + i) = ut;
  }
  return x;
}

integ::Trajectory sg_exact_trajectory(const SineGordonModel& model, double t0,
                                      double t1, Index steps) {
  if (steps < 1) throw ConfigError("sg_exact_trajectory: need steps >= 1");
  integ::Trajectory traj;
  traj.t0 = t0;
  traj.t1 = t1;
  traj.steps = steps;
  traj.states.resize(model.dim(), steps + 1);
  for (Index k = 0; k <= steps; ++k)
    traj.states.col(k) = sg_exact_state(model, traj.time(k));
  return traj;
}

double sg_residual_check(const Matrix& u_grid, double dxi, double dt) {
  double worst = 0.0;
  for (Index k = 1; k + 1 < u_grid.cols(); ++k)
    for (Index i = 1; i + 1 < u_grid.rows(); ++i) {
      const double u = u_grid(i, k);
      const double utt =
          (u_grid(i, k + 1) - 2.0 * u + u_grid(i, k - 1)) / (dt * dt);
      const double uxx =
          (u_grid(i + 1, k) - 2.0 * u + u_grid(i - 1, k)) / (dxi * dxi);
      worst = std::max(worst, std::abs(utt - uxx + std::sin(u)));
    }
  return worst;
}

}  // namespace smor::models

#pragma once

// FOM -> ROM pipeline: snapshot normalization, the PSD (cotangent lift)
// baseline, ROM assembly with or without a reference state, the reduced
// vector field, reconstruction and the two error measures.

#include <functional>
#include <optional>
#include <vector>

#include "smor/integrators.hpp"
#include "smor/network.hpp"
#include "smor/stiefel.hpp"

namespace smor::mor {

using integ::Trajectory;

struct SnapshotSet {
  Matrix data;                  // 2d x (n_params (K + 1))
  std::vector<double> params;
  Index steps = 0;              // K
  double t0 = 0.0;
  double t1 = 1.0;
  bool normalized = false;
  Matrix initial_states;        // 2d x n_params

  Index block_cols() const { return steps + 1; }
  /// Throws DimensionError when the column count or x0 block is inconsistent.
  void validate() const;
};

/// Subtracts each parameter's x^0 from its block of columns.
SnapshotSet normalize_snapshots(const SnapshotSet& raw);

/// First n left singular vectors of [M1, M2] (d x 2k). Each column is signed
/// so that its first nonzero entry is positive.
stiefel::StiefelPoint psd_cotangent_lift(const Matrix& snapshots, Index n);

/// Encoder / decoder pair acting on single states.
struct Autoencoder {
  Index full_dim = 0;
  Index reduced_dim = 0;
  std::function<Vector(const Vector&)> encode;
  std::function<Vector(const Vector&)> decode;
  std::function<Matrix(const Vector&)> decode_jacobian;
};

/// A = blockdiag(X, X) and its symplectic inverse blockdiag(X^T, X^T).
Autoencoder psd_autoencoder(const stiefel::StiefelPoint& x);
/// Holds a copy of the network.
Autoencoder network_autoencoder(const net::Network& net);

struct RomSpec {
  Autoencoder ae;
  std::optional<Vector> x_ref;
  Vector x_r0;

  /// x_ref + decode(xi), or decode(xi) without a reference state.
  Vector lift(const Vector& xi) const;
};

/// With a reference state: x_r0 = encode(0), x_ref = x0 - decode(x_r0).
/// Without: x_r0 = encode(x0).
RomSpec build_rom(const Autoencoder& ae, const Vector& x0, bool use_ref);

/// v = [-Del[n:2n, :]; Del[0:n, :]] [f_p; -f_q] with Del = Jac^T and
/// f = fom_field(t, lift(xi)); equal to -J_{2n} Jac^T J_{2d} f.
Vector reduced_vector_field(const RomSpec& rom, const integ::Field& fom_field,
                            double t, const Vector& xi);

Trajectory solve_rom(const RomSpec& rom, const integ::OdeSystem& fom, double t0,
                     double t1, Index steps,
                     const integ::MidpointOptions& options = {});

Trajectory reconstruct(const RomSpec& rom, const Trajectory& reduced);

enum class ErrorVariant { WithRef, NoRef };

/// sqrt(sum_k ||x^k - lift(xi^k)||^2 / sum_k ||x^k||^2), where lift adds
/// x_ref for the WithRef variant.
double reduction_error(ErrorVariant variant, const Matrix& exact,
                       const RomSpec& rom, const Matrix& reduced);

/// NoRef: x^k against d(e(x^k)); WithRef: x^k against x_ref + d(e(x^k - x_ref)).
double projection_error(ErrorVariant variant, const Matrix& exact,
                        const Autoencoder& ae,
                        const std::optional<Vector>& x_ref);

/// max_k ||(Dd)^+ r_k|| for the midpoint residual
/// r_k = Dd(xi_m) (xi^{k+1} - xi^k) / h - f(t_m, lift(xi_m)),
/// (Dd)^+ = J_{2n} Dd^T J_{2d}^T.
double symplectic_residual_projection(const RomSpec& rom,
                                      const integ::Field& fom_field,
                                      const Trajectory& reduced);

}  // namespace smor::mor

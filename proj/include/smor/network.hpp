#pragma once

// Symplectic autoencoder: gradient modules (SympNet-style) and PSD layers with
// a Stiefel weight, hand-written forward/backward passes, and forward-mode
// Jacobians for the reduced vector field.

#include <cstdint>
#include <variant>
#include <vector>

#include "smor/kernels.hpp"
#include "smor/stiefel.hpp"

namespace smor::net {

using kernels::Activation;
using kernels::ExecPolicy;
using stiefel::StiefelPoint;

enum class Half { P, Q };
enum class PsdDirection { Reduce, Expand };
enum class LossKind { Relative, ScaledMSE };

/// kind P: [q; p] -> [q; p + K^T diag(a) act(K q + b)]
/// kind Q: [q; p] -> [q + K^T diag(a) act(K p + b); p]
struct GradientLayer {
  Half kind = Half::P;
  Matrix k;  // L x half
  Vector a;  // L
  Vector b;  // L
  Activation act = Activation::Tanh;

  Index half() const { return k.cols(); }
  Index dim() const { return 2 * k.cols(); }
  Index upscale() const { return k.rows(); }
};

/// Reduce: [q; p] -> [X^T q; X^T p]. Expand: [q; p] -> [X q; X p].
struct PsdLayer {
  StiefelPoint weight;
  PsdDirection direction = PsdDirection::Reduce;

  Index in_dim() const;
  Index out_dim() const;
};

using Layer = std::variant<GradientLayer, PsdLayer>;

Index layer_in_dim(const Layer& layer);
Index layer_out_dim(const Layer& layer);

struct Network {
  std::vector<Layer> layers;
  std::size_t encoder_len = 0;
  Index full_dim = 0;
  Index reduced_dim = 0;
  /// Bumped on every parameter change so old tapes can be detected.
  std::uint64_t version = 0;

  /// Throws DimensionError unless dims chain and there is exactly one Reduce
  /// PSD layer (last encoder layer) and one Expand PSD layer in the decoder.
  void validate() const;
};

struct TapeEntry {
  Matrix input;
  Matrix pre;  // pre-activations, gradient layers only
};

struct Tape {
  std::vector<TapeEntry> entries;
  std::size_t first = 0;  // index of the layer that produced entries[0]
  std::uint64_t version = 0;
  Index batch = 0;
};

// --- single layers -----------------------------------------------------------

Matrix gradient_layer_forward(const GradientLayer& layer, const Matrix& x,
                              Matrix* pre = nullptr,
                              ExecPolicy policy = ExecPolicy::Parallel);

struct GradientLayerBackward {
  Matrix input_grad;
  kernels::GradientModuleGrads grads;
};
GradientLayerBackward gradient_layer_backward(
    const GradientLayer& layer, const TapeEntry& entry, const Matrix& upstream,
    ExecPolicy policy = ExecPolicy::Parallel);

/// The PSD map for an arbitrary N x n matrix w (no manifold check).
Matrix psd_apply(const Matrix& w, PsdDirection direction, const Matrix& x);
Matrix psd_layer_forward(const PsdLayer& layer, const Matrix& x);

struct PsdLayerBackward {
  Matrix input_grad;
  Matrix egrad;  // Euclidean gradient w.r.t. the N x n weight
};
PsdLayerBackward psd_layer_backward(const PsdLayer& layer,
                                    const TapeEntry& entry,
                                    const Matrix& upstream);

// --- assembly ----------------------------------------------------------------

struct BuildOptions {
  bool alternate_pq = false;  // P, Q, P, ... instead of all P
  Activation act = Activation::Tanh;
  Index upscale_factor = 5;
};

/// 4 x GradientLayer(2d, 5d), PSD Reduce(2d -> 2n), 2 x GradientLayer(2n, 5n),
/// PSD Expand(2n -> 2d), 1 x GradientLayer(2d, 5d).
Network build_network(Index full_dim, Index reduced_dim, std::uint64_t seed,
                      const BuildOptions& options = {});

std::size_t parameter_count(const Network& net);

/// Gradient-layer entries flattened in layer order (K column-major, a, b).
/// PSD weights are excluded; they only move along the manifold.
Vector flatten_euclidean(const Network& net);
/// Inverse of flatten_euclidean; bumps the version.
void assign_euclidean(Network& net, const Vector& theta);

// --- passes ------------------------------------------------------------------

struct ForwardResult {
  Matrix output;
  Tape tape;
};

/// Applies layers [first, last). Records a tape when `record` is set.
ForwardResult forward_range(const Network& net, std::size_t first,
                            std::size_t last, const Matrix& x, bool record,
                            ExecPolicy policy = ExecPolicy::Parallel);

ForwardResult forward(const Network& net, const Matrix& batch,
                      ExecPolicy policy = ExecPolicy::Parallel);
Matrix encode(const Network& net, const Matrix& x);
Matrix decode(const Network& net, const Matrix& xr);

using LayerGrad = std::variant<kernels::GradientModuleGrads, Matrix>;

struct BackwardResult {
  Matrix input_grad;
  std::vector<LayerGrad> grads;  // one per layer of the tape's range
};

/// Throws StaleTapeError if the network changed after the tape was recorded or
/// the upstream shape does not match.
BackwardResult backward(const Network& net, const Tape& tape,
                        const Matrix& upstream,
                        ExecPolicy policy = ExecPolicy::Parallel);

/// Gradient-layer part of `g` in flatten_euclidean order.
Vector flatten_euclidean_gradients(const Network& net,
                                   const std::vector<LayerGrad>& g);

/// Forward-mode Jacobian of layers [first, last) at a single point x.
Matrix jacobian_range(const Network& net, std::size_t first, std::size_t last,
                      const Vector& x);
Matrix decoder_jacobian(const Network& net, const Vector& xr);
Matrix encoder_jacobian(const Network& net, const Vector& x);

// --- losses ------------------------------------------------------------------

double loss(LossKind kind, const Matrix& xb, const Matrix& yb);
/// dL/dYb
Matrix loss_backward(LossKind kind, const Matrix& xb, const Matrix& yb);

}  // namespace smor::net

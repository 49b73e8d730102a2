#pragma once

// Data-parallel inner loops. Every kernel has a serial reference path and an
// OpenMP path selected by ExecPolicy; both produce identical results (the
// parallel paths partition work without reordering any floating-point
// reduction).

#include <functional>

#include "smor/linalg.hpp"

namespace smor::kernels {

enum class ExecPolicy { Serial, Parallel };

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

/// Calls body(i) for i in [0, count). The parallel path uses a static schedule.
void parallel_for(ExecPolicy policy, Index count,
                  const std::function<void(Index)>& body);

/// Bias-corrected Adam moment update, in place:
///   m1 <- c1_old * m1 + c1_new * g
///   m2 <- c2_old * m2 + c2_new * g .* g
/// and returns -eta * m1 ./ sqrt(m2 + delta).
struct AdamCoefficients {
  double c1_old, c1_new, c2_old, c2_new, eta, delta;
};
void adam_update(ExecPolicy policy, const AdamCoefficients& c, Matrix& m1,
                 Matrix& m2, const Matrix& g, Matrix& update);

/// Pseudo second moment of the Stiefel Adam step:
///   sqrt(c_old * m1 .* m1 + c_new * g .* g + delta)
void stiefel_second_moment(ExecPolicy policy, double c_old, double c_new,
                           double delta, const Matrix& m1, const Matrix& g,
                           Matrix& out);

/// out = num ./ den
void divide(ExecPolicy policy, const Matrix& num, const Matrix& den,
            Matrix& out);

enum class Activation { Tanh, Relu, Explu };

double activate(Activation act, double x);
double activate_derivative(Activation act, double x);

/// Applies the gradient-module update column by column:
///   pre   = K src + b
///   dst  += K^T (a .* act(pre))
/// `pre` receives the pre-activations (L x batch) for the backward pass.
void gradient_module_forward(ExecPolicy policy, Activation act,
                             const Matrix& k, const Vector& a, const Vector& b,
                             Eigen::Ref<const Matrix> src,
                             Eigen::Ref<Matrix> dst, Matrix& pre);

/// Backward pass of the gradient-module update for upstream gradient `g_dst`
/// of the updated half. Accumulates into g_src and returns the parameter
/// gradients. Column blocks are reduced in a fixed order.
struct GradientModuleGrads {
  Matrix dk;
  Vector da;
  Vector db;
};
GradientModuleGrads gradient_module_backward(ExecPolicy policy, Activation act,
                                             const Matrix& k, const Vector& a,
                                             Eigen::Ref<const Matrix> src,
                                             const Matrix& pre,
                                             Eigen::Ref<const Matrix> g_dst,
                                             Eigen::Ref<Matrix> g_src);

}  // namespace smor::kernels

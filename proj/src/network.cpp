#include "smor/network.hpp"

#include <cmath>
#include <string>

namespace smor::net {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_rows(const Matrix& x, Index rows, const char* what) {
  if (x.rows() != rows)
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(rows) + " rows, got " +
                         std::to_string(x.rows()));
}

}  // namespace

Index PsdLayer::in_dim() const {
  return direction == PsdDirection::Reduce ? 2 * weight.rows()
                                           : 2 * weight.cols();
}

Index PsdLayer::out_dim() const {
  return direction == PsdDirection::Reduce ? 2 * weight.cols()
                                           : 2 * weight.rows();
}

Index layer_in_dim(const Layer& layer) {
  return std::visit(overloaded{[](const GradientLayer& g) { return g.dim(); },
                               [](const PsdLayer& p) { return p.in_dim(); }},
                    layer);
}

Index layer_out_dim(const Layer& layer) {
  return std::visit(overloaded{[](const GradientLayer& g) { return g.dim(); },
                               [](const PsdLayer& p) { return p.out_dim(); }},
                    layer);
}

void Network::validate() const {
  if (layers.empty() || encoder_len == 0 || encoder_len >= layers.size())
    throw DimensionError("network: bad encoder split");
  Index dim = full_dim;
  int reduce = 0, expand = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layer_in_dim(layers[i]) != dim)
      throw DimensionError("network: layer " + std::to_string(i) +
                           " expects " + std::to_string(layer_in_dim(layers[i])) +
                           " rows, previous layer gives " + std::to_string(dim));
    if (const auto* g = std::get_if<GradientLayer>(&layers[i])) {
      if (g->a.size() != g->upscale() || g->b.size() != g->upscale())
        throw DimensionError("network: gradient layer vector sizes");
    } else {
      const auto& p = std::get<PsdLayer>(layers[i]);
      if (p.direction == PsdDirection::Reduce) {
        if (i + 1 != encoder_len)
          throw DimensionError("network: Reduce layer must end the encoder");
        ++reduce;
      } else {
        if (i < encoder_len)
          throw DimensionError("network: Expand layer inside the encoder");
        ++expand;
      }
    }
    dim = layer_out_dim(layers[i]);
    if (i + 1 == encoder_len && dim != reduced_dim)
      throw DimensionError("network: encoder output is not the reduced dim");
  }
  if (dim != full_dim) throw DimensionError("network: output dim mismatch");
  if (reduce != 1 || expand != 1)
    throw DimensionError("network: needs exactly one Reduce and one Expand");
}

Matrix gradient_layer_forward(const GradientLayer& layer, const Matrix& x,
                              Matrix* pre, ExecPolicy policy) {
  check_rows(x, layer.dim(), "gradient_layer_forward");
  const Index h = layer.half();
  Matrix out = x;
  Matrix scratch;
  Matrix& u = pre ? *pre : scratch;
  if (layer.kind == Half::P)
    kernels::gradient_module_forward(policy, layer.act, layer.k, layer.a,
                                     layer.b, x.topRows(h), out.bottomRows(h), u);
  else
    kernels::gradient_module_forward(policy, layer.act, layer.k, layer.a,
                                     layer.b, x.bottomRows(h), out.topRows(h), u);
  return out;
}

GradientLayerBackward gradient_layer_backward(const GradientLayer& layer,
                                              const TapeEntry& entry,
                                              const Matrix& upstream,
                                              ExecPolicy policy) {
  const Index h = layer.half();
  require_shape(upstream, layer.dim(), entry.input.cols(),
                "gradient_layer_backward upstream");
  if (entry.pre.rows() != layer.upscale() ||
      entry.pre.cols() != entry.input.cols())
    throw StaleTapeError("gradient_layer_backward: tape entry does not match");
  GradientLayerBackward out;
  out.input_grad = upstream;
  if (layer.kind == Half::P)
    out.grads = kernels::gradient_module_backward(
        policy, layer.act, layer.k, layer.a, entry.input.topRows(h), entry.pre,
        upstream.bottomRows(h), out.input_grad.topRows(h));
  else
    out.grads = kernels::gradient_module_backward(
        policy, layer.act, layer.k, layer.a, entry.input.bottomRows(h),
        entry.pre, upstream.topRows(h), out.input_grad.bottomRows(h));
  return out;
}

Matrix psd_apply(const Matrix& w, PsdDirection direction, const Matrix& x) {
  const Index big = w.rows(), small = w.cols();
  if (direction == PsdDirection::Reduce) {
    check_rows(x, 2 * big, "psd reduce");
    Matrix out(2 * small, x.cols());
    out.topRows(small).noalias() = w.transpose() * x.topRows(big);
    out.bottomRows(small).noalias() = w.transpose() * x.bottomRows(big);
    return out;
  }
  check_rows(x, 2 * small, "psd expand");
  Matrix out(2 * big, x.cols());
  out.topRows(big).noalias() = w * x.topRows(small);
  out.bottomRows(big).noalias() = w * x.bottomRows(small);
  return out;
}

Matrix psd_layer_forward(const PsdLayer& layer, const Matrix& x) {
  return psd_apply(layer.weight.matrix(), layer.direction, x);
}

PsdLayerBackward psd_layer_backward(const PsdLayer& layer,
                                    const TapeEntry& entry,
                                    const Matrix& upstream) {
  require_shape(upstream, layer.out_dim(), entry.input.cols(),
                "psd_layer_backward upstream");
  if (entry.input.rows() != layer.in_dim())
    throw StaleTapeError("psd_layer_backward: tape entry does not match");
  const Matrix& w = layer.weight.matrix();
  const Index big = w.rows(), small = w.cols();
  const Matrix& x = entry.input;
  PsdLayerBackward out;
  if (layer.direction == PsdDirection::Expand) {
    out.egrad = upstream.topRows(big) * x.topRows(small).transpose() +
                upstream.bottomRows(big) * x.bottomRows(small).transpose();
    out.input_grad = psd_apply(w, PsdDirection::Reduce, upstream);
  } else {
    out.egrad = x.topRows(big) * upstream.topRows(small).transpose() +
                x.bottomRows(big) * upstream.bottomRows(small).transpose();
    out.input_grad = psd_apply(w, PsdDirection::Expand, upstream);
  }
  return out;
}

namespace {

GradientLayer init_gradient_layer(Index half, Index upscale, Half kind,
                                  Activation act, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(upscale + half));
  std::uniform_real_distribution<double> dist(-bound, bound);
  GradientLayer g;
  g.kind = kind;
  g.act = act;
  g.k.resize(upscale, half);
  for (Index j = 0; j < half; ++j)
    for (Index i = 0; i < upscale; ++i) g.k(i, j) = dist(rng);
  g.a.resize(upscale);
  for (Index i = 0; i < upscale; ++i)
    g.a(i) = dist(rng) / static_cast<double>(upscale);
  g.b = Vector::Zero(upscale);
  return g;
}

}  // namespace

Network build_network(Index full_dim, Index reduced_dim, std::uint64_t seed,
                      const BuildOptions& options) {
  if (full_dim % 2 != 0 || reduced_dim % 2 != 0 || reduced_dim < 2)
    throw DimensionError("build_network: dimensions must be even and positive");
  const Index d = full_dim / 2, n = reduced_dim / 2;
  if (n > d) throw DimensionError("build_network: reduced dim exceeds full dim");

  Rng rng(seed);
  Network net;
  net.full_dim = full_dim;
  net.reduced_dim = reduced_dim;
  int count = 0;
  auto next_kind = [&] {
    const bool q = options.alternate_pq && (count++ % 2 == 1);
    return q ? Half::Q : Half::P;
  };
  auto gradient = [&](Index half) {
    net.layers.emplace_back(init_gradient_layer(
        half, options.upscale_factor * half, next_kind(), options.act, rng));
  };
  for (int i = 0; i < 4; ++i) gradient(d);
  net.layers.emplace_back(
      PsdLayer{stiefel::random_stiefel(d, n, rng()), PsdDirection::Reduce});
  net.encoder_len = net.layers.size();
  for (int i = 0; i < 2; ++i) gradient(n);
  net.layers.emplace_back(
      PsdLayer{stiefel::random_stiefel(d, n, rng()), PsdDirection::Expand});
  gradient(d);
  net.validate();
  return net;
}

std::size_t parameter_count(const Network& net) {
  std::size_t total = 0;
  for (const auto& layer : net.layers)
    std::visit(overloaded{[&](const GradientLayer& g) {
                            total += static_cast<std::size_t>(
                                g.k.size() + g.a.size() + g.b.size());
                          },
                          [&](const PsdLayer& p) {
                            total += static_cast<std::size_t>(
                                p.weight.matrix().size());
                          }},
               layer);
  return total;
}

Vector flatten_euclidean(const Network& net) {
  std::vector<double> out;
  for (const auto& layer : net.layers)
    if (const auto* g = std::get_if<GradientLayer>(&layer)) {
      out.insert(out.end(), g->k.data(), g->k.data() + g->k.size());
      out.insert(out.end(), g->a.data(), g->a.data() + g->a.size());
      out.insert(out.end(), g->b.data(), g->b.data() + g->b.size());
    }
  return Eigen::Map<Vector>(out.data(), static_cast<Index>(out.size()));
}

void assign_euclidean(Network& net, const Vector& theta) {
  Index pos = 0;
  auto take = [&](double* dst, Index count) {
    if (pos + count > theta.size())
      throw DimensionError("assign_euclidean: parameter vector too short");
    std::copy(theta.data() + pos, theta.data() + pos + count, dst);
    pos += count;
  };
  for (auto& layer : net.layers)
    if (auto* g = std::get_if<GradientLayer>(&layer)) {
      take(g->k.data(), g->k.size());
      take(g->a.data(), g->a.size());
      take(g->b.data(), g->b.size());
    }
  if (pos != theta.size())
    throw DimensionError("assign_euclidean: parameter vector too long");
  ++net.version;
}

ForwardResult forward_range(const Network& net, std::size_t first,
                            std::size_t last, const Matrix& x, bool record,
                            ExecPolicy policy) {
  if (first > last || last > net.layers.size())
    throw DimensionError("forward_range: bad layer range");
  ForwardResult res;
  res.tape.first = first;
  res.tape.version = net.version;
  res.tape.batch = x.cols();
  Matrix cur = x;
  for (std::size_t i = first; i < last; ++i) {
    TapeEntry entry;
    Matrix next = std::visit(
        overloaded{[&](const GradientLayer& g) {
                     return gradient_layer_forward(g, cur, &entry.pre, policy);
                   },
                   [&](const PsdLayer& p) { return psd_layer_forward(p, cur); }},
        net.layers[i]);
    if (record) {
      entry.input = std::move(cur);
      res.tape.entries.push_back(std::move(entry));
    }
    cur = std::move(next);
  }
  res.output = std::move(cur);
  return res;
}

ForwardResult forward(const Network& net, const Matrix& batch,
                      ExecPolicy policy) {
  check_rows(batch, net.full_dim, "forward");
  return forward_range(net, 0, net.layers.size(), batch, true, policy);
}

Matrix encode(const Network& net, const Matrix& x) {
  check_rows(x, net.full_dim, "encode");
  return forward_range(net, 0, net.encoder_len, x, false).output;
}

Matrix decode(const Network& net, const Matrix& xr) {
  check_rows(xr, net.reduced_dim, "decode");
  return forward_range(net, net.encoder_len, net.layers.size(), xr, false)
      .output;
}

BackwardResult backward(const Network& net, const Tape& tape,
                        const Matrix& upstream, ExecPolicy policy) {
  if (tape.version != net.version)
    throw StaleTapeError("backward: network parameters changed after forward");
  const std::size_t count = tape.entries.size();
  if (tape.first + count > net.layers.size())
    throw StaleTapeError("backward: tape does not fit the network");
  if (upstream.cols() != tape.batch)
    throw StaleTapeError("backward: upstream batch differs from the tape");
  BackwardResult res;
  res.grads.resize(count);
  Matrix g = upstream;
  for (std::size_t r = count; r-- > 0;) {
    const Layer& layer = net.layers[tape.first + r];
    const TapeEntry& entry = tape.entries[r];
    if (entry.input.cols() != tape.batch ||
        entry.input.rows() != layer_in_dim(layer))
      throw StaleTapeError("backward: tape entry shape mismatch");
    if (const auto* gl = std::get_if<GradientLayer>(&layer)) {
      auto b = gradient_layer_backward(*gl, entry, g, policy);
      res.grads[r] = std::move(b.grads);
      g = std::move(b.input_grad);
    } else {
      auto b = psd_layer_backward(std::get<PsdLayer>(layer), entry, g);
      res.grads[r] = std::move(b.egrad);
      g = std::move(b.input_grad);
    }
  }
  res.input_grad = std::move(g);
  return res;
}

Vector flatten_euclidean_gradients(const Network& net,
                                   const std::vector<LayerGrad>& g) {
  if (g.size() != net.layers.size())
    throw DimensionError("flatten_euclidean_gradients: need all layers");
  std::vector<double> out;
  for (const auto& entry : g)
    if (const auto* m = std::get_if<kernels::GradientModuleGrads>(&entry)) {
      out.insert(out.end(), m->dk.data(), m->dk.data() + m->dk.size());
      out.insert(out.end(), m->da.data(), m->da.data() + m->da.size());
      out.insert(out.end(), m->db.data(), m->db.data() + m->db.size());
    }
  return Eigen::Map<Vector>(out.data(), static_cast<Index>(out.size()));
}

Matrix jacobian_range(const Network& net, std::size_t first, std::size_t last,
                      const Vector& x) {
  if (first > last || last > net.layers.size())
    throw DimensionError("jacobian_range: bad layer range");
  Vector cur = x;
  Matrix tan = Matrix::Identity(x.size(), x.size());
  for (std::size_t i = first; i < last; ++i) {
    const Layer& layer = net.layers[i];
    check_rows(cur, layer_in_dim(layer), "jacobian_range");
    if (const auto* g = std::get_if<GradientLayer>(&layer)) {
      const Index h = g->half();
      const bool p_kind = g->kind == Half::P;
      const Index src = p_kind ? 0 : h, dst = p_kind ? h : 0;
      const Vector u = g->k * cur.segment(src, h) + g->b;
      Vector s(u.size()), ds(u.size());
      for (Index l = 0; l < u.size(); ++l) {
        s(l) = kernels::activate(g->act, u(l));
        ds(l) = kernels::activate_derivative(g->act, u(l));
      }
      const Matrix kt = g->k * tan.middleRows(src, h);
      tan.middleRows(dst, h) +=
          g->k.transpose() * (g->a.cwiseProduct(ds)).asDiagonal() * kt;
      cur.segment(dst, h) += g->k.transpose() * g->a.cwiseProduct(s);
    } else {
      const auto& p = std::get<PsdLayer>(layer);
      tan = psd_layer_forward(p, tan);
      cur = psd_layer_forward(p, cur);
    }
  }
  return tan;
}

Matrix decoder_jacobian(const Network& net, const Vector& xr) {
  if (xr.size() != net.reduced_dim)
    throw DimensionError("decoder_jacobian: point has wrong length");
  return jacobian_range(net, net.encoder_len, net.layers.size(), xr);
}

Matrix encoder_jacobian(const Network& net, const Vector& x) {
  if (x.size() != net.full_dim)
    throw DimensionError("encoder_jacobian: point has wrong length");
  return jacobian_range(net, 0, net.encoder_len, x);
}

double loss(LossKind kind, const Matrix& xb, const Matrix& yb) {
  require_shape(yb, xb.rows(), xb.cols(), "loss");
  if (kind == LossKind::ScaledMSE)
    return (xb - yb).squaredNorm() / static_cast<double>(xb.size());
  const double nx = xb.norm();
  if (nx == 0.0)
    throw DivisionDegenerateError("relative loss: input batch has zero norm");
  return (xb - yb).norm() / nx;
}

Matrix loss_backward(LossKind kind, const Matrix& xb, const Matrix& yb) {
  require_shape(yb, xb.rows(), xb.cols(), "loss_backward");
  if (kind == LossKind::ScaledMSE)
    return (yb - xb) * (2.0 / static_cast<double>(xb.size()));
  const double nx = xb.norm();
  if (nx == 0.0)
    throw DivisionDegenerateError("relative loss: input batch has zero norm");
  const double nr = (xb - yb).norm();
  if (nr == 0.0) return Matrix::Zero(xb.rows(), xb.cols());
  return (yb - xb) / (nr * nx);
}

}  // namespace smor::net

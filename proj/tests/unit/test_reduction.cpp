#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "smor/models.hpp"
#include "smor/reduction.hpp"

using namespace smor;
using namespace smor::mor;

namespace {

SnapshotSet small_set() {
  SnapshotSet s;
  Rng rng(5);
  s.data = random_normal(6, 8, rng);
  s.params = {0.1, 0.2};
  s.steps = 3;
  return s;
}

// Autoencoder with d = n and identity maps.
Autoencoder identity_ae(Index dim) {
  Autoencoder ae;
  ae.full_dim = ae.reduced_dim = dim;
  ae.encode = [](const Vector& x) { return x; };
  ae.decode = [](const Vector& x) { return x; };
  ae.decode_jacobian = [dim](const Vector&) { return Matrix(Matrix::Identity(dim, dim)); };
  return ae;
}

}  // namespace

TEST_CASE("normalization") {
  const auto raw = small_set();
  const auto norm = normalize_snapshots(raw);
  CHECK(norm.normalized);
  CHECK(norm.data.col(0).norm() == 0.0);
  CHECK(norm.data.col(4).norm() == 0.0);
  CHECK((norm.initial_states.col(1) - raw.data.col(4)).norm() == 0.0);
  Matrix back = norm.data;
  for (Index j = 0; j < 2; ++j)
    for (Index k = 0; k < 4; ++k) back.col(4 * j + k) += norm.initial_states.col(j);
  // (x - x0) + x0 is exact only up to one rounding per entry
  CHECK((back - raw.data).cwiseAbs().maxCoeff() <=
        4 * std::numeric_limits<double>::epsilon() * raw.data.cwiseAbs().maxCoeff());
  CHECK_THROWS_AS(normalize_snapshots(norm), NormalizationError);
  SnapshotSet bad = raw;
  bad.steps = 2;
  CHECK_THROWS_AS(bad.validate(), DimensionError);
}

TEST_CASE("cotangent lift on a rank-one example") {
  Matrix m = Matrix::Zero(6, 4);
  m.row(0) << 1.0, -2.0, 0.5, 3.0;
  const auto x = psd_cotangent_lift(m, 1);
  CHECK(x.matrix()(0, 0) == doctest::Approx(1.0));
  const auto ae = psd_autoencoder(x);
  for (Index j = 0; j < 4; ++j)
    CHECK((ae.decode(ae.encode(m.col(j))) - m.col(j)).norm() < 1e-14);
}

TEST_CASE("cotangent lift against a full SVD") {
  Rng rng(2);
  const Matrix m = random_normal(8, 3, rng);
  Matrix rearranged(4, 6);
  rearranged << m.topRows(4), m.bottomRows(4);
  Eigen::BDCSVD<Matrix> svd(rearranged, Eigen::ComputeFullU);
  const auto x = psd_cotangent_lift(m, 2);
  for (Index j = 0; j < 2; ++j) {
    const Vector u = svd.matrixU().col(j);
    CHECK(std::abs(std::abs(u.dot(x.matrix().col(j))) - 1.0) < 1e-12);
    // sign convention: first nonzero entry positive
    CHECK(x.matrix()(0, j) > 0.0);
  }
}

TEST_CASE("PSD projection error is non-increasing in n") {
  Rng rng(3);
  const Matrix m = random_normal(12, 10, rng);
  double prev = 2.0;
  for (Index n = 1; n <= 6; ++n) {
    const auto ae = psd_autoencoder(psd_cotangent_lift(m, n));
    const double e = projection_error(ErrorVariant::NoRef, m, ae, std::nullopt);
    CHECK(e <= prev + 1e-14);
    prev = e;
  }
  CHECK(prev < 1e-12);
}

TEST_CASE("PSD projection error against a dense projector") {
  Rng rng(4);
  const Matrix m = random_normal(8, 5, rng);
  const auto x = psd_cotangent_lift(m, 2);
  Matrix a = Matrix::Zero(8, 4);
  a.topLeftCorner(4, 2) = x.matrix();
  a.bottomRightCorner(4, 2) = x.matrix();
  const Matrix resid = m - a * a.transpose() * m;
  const double expect = resid.norm() / m.norm();
  const double got = projection_error(ErrorVariant::NoRef, m, psd_autoencoder(x),
                                      std::nullopt);
  CHECK(got == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("reference state reproduces x0") {
  const auto net = net::build_network(8, 4, 3);
  const auto ae = network_autoencoder(net);
  Rng rng(1);
  const Vector x0 = random_normal(8, 1, rng);
  const auto rom = build_rom(ae, x0, true);
  REQUIRE(rom.x_ref);
  CHECK((rom.lift(rom.x_r0) - x0).norm() < 1e-10);
  const auto psd = psd_autoencoder(stiefel::random_stiefel(4, 2, 1));
  CHECK((build_rom(psd, x0, true).x_ref.value() - x0).norm() == 0.0);
  CHECK_FALSE(build_rom(psd, x0, false).x_ref.has_value());
}

TEST_CASE("reduced field equals the dense Poisson formula") {
  const auto net = net::build_network(6, 4, 2);
  const auto rom = build_rom(network_autoencoder(net), Vector::Ones(6), true);
  Rng rng(6);
  const Matrix mfield = random_normal(6, 6, rng);
  const integ::Field field = [&](double, const Vector& x) -> Vector { return mfield * x; };
  const Vector xi = random_normal(4, 1, rng);
  const Matrix jac = net::decoder_jacobian(net, xi);
  const Vector expect =
      -poisson_matrix(2) * jac.transpose() * poisson_matrix(3) * field(0.0, rom.lift(xi));
  CHECK((reduced_vector_field(rom, field, 0.0, xi) - expect).norm() <
        1e-11 * std::max(1.0, expect.norm()));
  const integ::Field zero = [](double, const Vector&) -> Vector { return Vector::Zero(6); };
  CHECK(reduced_vector_field(rom, zero, 0.0, xi).norm() == 0.0);
}

TEST_CASE("square PSD ROM reproduces the FOM") {
  const auto m = models::wave_build(6, 0.5);
  const auto sys = models::wave_system(m);
  const Vector x0 = models::wave_initial(m);
  const auto fom = integ::implicit_midpoint(sys, x0, 0.0, 1.0, 40);
  const Index d = m.n_grid + 2;
  const auto x = psd_cotangent_lift(fom.states, d);
  const auto rom = build_rom(psd_autoencoder(x), x0, false);
  const auto red = solve_rom(rom, sys, 0.0, 1.0, 40);
  const auto rec = reconstruct(rom, red);
  CHECK((rec.states - fom.states).norm() / fom.states.norm() < 1e-8);
  CHECK(reduction_error(ErrorVariant::NoRef, fom.states, rom, red.states) < 1e-8);
  CHECK(symplectic_residual_projection(rom, sys.field, red) < 1e-6);
}

TEST_CASE("error measures by hand") {
  // two steps, 2-d states
  Matrix exact(2, 2);
  exact << 3.0, 0.0, 4.0, 1.0;  // columns (3,4), (0,1): sum of squares 26
  RomSpec rom;
  rom.ae = identity_ae(2);
  Matrix reduced(2, 2);
  reduced << 3.0, 1.0, 4.0, 1.0;  // error only in column 1: (1, 0)
  CHECK(reduction_error(ErrorVariant::NoRef, exact, rom, reduced) ==
        doctest::Approx(std::sqrt(1.0 / 26.0)).epsilon(1e-14));
  rom.x_ref = Vector::Constant(2, 0.5);
  // lift adds 0.5: column diffs (0.5, 0.5), (1.5, 0.5) -> 0.5 + 2.5 = 3
  CHECK(reduction_error(ErrorVariant::WithRef, exact, rom, reduced) ==
        doctest::Approx(std::sqrt(3.0 / 26.0)).epsilon(1e-14));
  CHECK(reduction_error(ErrorVariant::NoRef, exact, rom, exact) == 0.0);
  CHECK(reduction_error(ErrorVariant::NoRef, exact, rom, Matrix::Zero(2, 2)) == 1.0);
  CHECK(projection_error(ErrorVariant::WithRef, exact, rom.ae, rom.x_ref) == 0.0);
  CHECK_THROWS_AS(reduction_error(ErrorVariant::NoRef, Matrix::Zero(2, 2), rom, reduced),
                  DivisionDegenerateError);
}

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "specnet/spectral.hpp"

using namespace specnet;

namespace {

Vector<double> from_list(std::initializer_list<double> v) {
  Vector<double> out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Inverse of the stacked-real layout, valid for odd M (no Nyquist bin).
Vector<double> reconstruct(const RdftResult<double>& r, Index m) {
  const Index f_count = r.omega.size();
  Vector<double> x = Vector<double>::Constant(m, r.dc);
  for (Index t = 0; t < m; ++t)
    for (Index f = 0; f < f_count; ++f) {
      const double phase = 2.0 * std::numbers::pi * double(f + 1) * double(t) / double(m);
      x[t] += 2.0 * (r.coeffs[f] * std::cos(phase) - r.coeffs[f_count + f] * std::sin(phase));
    }
  return x;
}

}  // namespace

TEST_SUITE_BEGIN("spectral");

TEST_CASE("rdft matches an FFT oracle on a frozen series") {
  // Reference values from numpy.fft.rfft(x)/M on the same series, M=7, dt=0.5.
  auto r = rdft<double>(from_list({0.3, -1.2, 2.4, 0.7, -0.9, 1.5, -0.4}), 0.5);
  REQUIRE(r.omega.size() == 3);
  CHECK(r.coeffs[0] == doctest::Approx(-0.19788879311758797).epsilon(1e-12));
  CHECK(r.coeffs[1] == doctest::Approx(-0.426063292980154).epsilon(1e-12));
  CHECK(r.coeffs[2] == doctest::Approx(0.6025235146691705).epsilon(1e-12));
  CHECK(r.coeffs[3] == doctest::Approx(-0.1351691310824729).epsilon(1e-12));
  CHECK(r.coeffs[4] == doctest::Approx(0.34590972384287266).epsilon(1e-12));
  CHECK(r.coeffs[5] == doctest::Approx(-0.07273276199652069).epsilon(1e-12));
  CHECK(r.dc == doctest::Approx(0.34285714285714275).epsilon(1e-14));
  CHECK(r.omega[0] == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
  CHECK(r.omega[1] == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK(r.omega[2] == doctest::Approx(6.0 / 7.0).epsilon(1e-14));
}

TEST_CASE("odd-length series round-trips through the stacked layout") {
  Rng rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Index m : {3, 5, 9, 21, 63}) {
    Vector<double> x(m);
    for (Index t = 0; t < m; ++t) x[t] = g(rng);
    auto r = rdft<double>(x, 0.25);
    CHECK((reconstruct(r, m) - x).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("Parseval holds, band-limited for even lengths") {
  Rng rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Index m = 3; m <= 64; ++m) {
    const Index f_count = (m - 1) / 2;
    // Build the signal from random coefficients on the represented bins so
    // even lengths carry no Nyquist energy.
    RdftResult<double> seed;
    seed.coeffs = Vector<double>(2 * f_count);
    seed.omega = Vector<double>(f_count);
    for (Index i = 0; i < 2 * f_count; ++i) seed.coeffs[i] = g(rng);
    seed.dc = g(rng);
    Vector<double> x = reconstruct(seed, m);
    auto r = rdft<double>(x, 1.0);
    const double time_power = x.squaredNorm() / double(m);
    const double freq_power = r.dc * r.dc + 2.0 * r.coeffs.squaredNorm();
    CHECK(std::abs(time_power - freq_power) < 1e-9 * std::max(1.0, time_power));
  }
}

TEST_CASE("rdft is linear") {
  Rng rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  const Index m = 16;
  Vector<double> x(m), y(m);
  for (Index t = 0; t < m; ++t) {
    x[t] = g(rng);
    y[t] = g(rng);
  }
  auto rx = rdft<double>(x, 2.0);
  auto ry = rdft<double>(y, 2.0);
  auto rz = rdft<double>((1.7 * x - 0.3 * y).eval(), 2.0);
  CHECK((rz.coeffs - (1.7 * rx.coeffs - 0.3 * ry.coeffs)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(rz.dc == doctest::Approx(1.7 * rx.dc - 0.3 * ry.dc).epsilon(1e-12));
}

TEST_CASE("spectral derivative equals the sampled analytic derivative") {
  const Index m = 24;
  const double dt = 0.5;
  for (Index f : {0, 1, 3, 7}) {
    const double omega = double(f + 1) / (double(m) * dt);
    Vector<double> x(m), dx(m);
    for (Index t = 0; t < m; ++t) {
      const double arg = 2.0 * std::numbers::pi * omega * double(t) * dt;
      x[t] = std::cos(arg) + 0.4 * std::sin(arg);
      dx[t] = 2.0 * std::numbers::pi * omega * (-std::sin(arg) + 0.4 * std::cos(arg));
    }
    auto rx = rdft<double>(x, dt);
    auto rdx = rdft<double>(dx, dt);
    CHECK((rdft_derivative<double>(rx.coeffs, rx.omega) - rdx.coeffs).cwiseAbs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("derivative of a constant is zero everywhere including DC") {
  auto r = rdft<double>(Vector<double>::Constant(11, 3.4).eval(), 1.0);
  CHECK(r.coeffs.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rdft_derivative<double>(r.coeffs, r.omega).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.dc == doctest::Approx(3.4));
}

TEST_CASE("build_spectral_set lays out bins, DC row, and regressors") {
  TimeSeriesSet<double> ts;
  ts.dt = 0.5;
  ts.gene_names = {"G1", "G2"};
  ts.input_names = {"light"};
  Rng rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    Matrix<double> x(7, 2), u(7, 1);
    for (Index t = 0; t < 7; ++t) {
      x(t, 0) = g(rng);
      x(t, 1) = g(rng);
      u(t, 0) = (t % 2 == 0) ? 1.0 : 0.0;
    }
    ts.replicates.push_back(x);
    ts.inputs.push_back(u);
  }
  auto sp = build_spectral_set(ts);
  REQUIRE(sp.n_freq == 6);  // F = 3 at M = 7
  REQUIRE(sp.n_rows() == 7);
  REQUIRE(sp.n_genes == 2);
  REQUIRE(sp.n_inputs == 1);
  REQUIRE(sp.n_regressors() == 4);
  REQUIRE(sp.X.size() == 2);

  for (int k = 0; k < 2; ++k) {
    for (Index i = 0; i < 2; ++i) {
      auto r = rdft<double>(ts.replicates[k].col(i), ts.dt);
      CHECK((sp.X[k].col(i).head(6) - r.coeffs).cwiseAbs().maxCoeff() < 1e-14);
      CHECK(sp.X[k](6, i) == doctest::Approx(ts.replicates[k].col(i).mean()).epsilon(1e-14));
      CHECK(sp.Xdot[k](6, i) == 0.0);
      CHECK((sp.Xdot[k].col(i).head(6) - rdft_derivative<double>(r.coeffs, r.omega))
                .cwiseAbs()
                .maxCoeff() < 1e-14);
    }
    // regressor block: [gene coefficients | input coefficients | const]
    CHECK((sp.R[k].leftCols(2) - sp.X[k]).cwiseAbs().maxCoeff() == 0.0);
    auto ru = rdft<double>(ts.inputs[k].col(0), ts.dt);
    CHECK((sp.R[k].col(2).head(6) - ru.coeffs).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(sp.R[k](6, 2) == doctest::Approx(ru.dc).epsilon(1e-14));
    CHECK(sp.R[k].col(3).head(6).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sp.R[k](6, 3) == 1.0);
  }
  CHECK(sp.omega[0] == doctest::Approx(1.0 / (7.0 * 0.5)).epsilon(1e-14));
}

TEST_CASE("input validation rejects malformed series") {
  CHECK_THROWS_AS(rdft<double>(Vector<double>::Zero(2).eval(), 1.0), DataError);
  CHECK_THROWS_AS(rdft<double>(Vector<double>::Zero(5).eval(), 0.0), DataError);
  Vector<double> bad = Vector<double>::Zero(5);
  bad[2] = std::nan("");
  CHECK_THROWS_AS(rdft<double>(bad, 1.0), DataError);

  TimeSeriesSet<double> ts;
  CHECK_THROWS_AS(ts.validate(), DataError);
  ts.replicates.push_back(Matrix<double>::Zero(5, 2));
  ts.inputs.push_back(Matrix<double>::Zero(5, 0));
  ts.dt = 1.0;
  CHECK_NOTHROW(ts.validate());
  ts.replicates.push_back(Matrix<double>::Zero(6, 2));
  ts.inputs.push_back(Matrix<double>::Zero(6, 0));
  CHECK_THROWS_AS(ts.validate(), DataError);  // replicates must share M
}

TEST_SUITE_END();

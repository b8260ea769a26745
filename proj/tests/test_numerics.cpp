#include <cmath>
#include <vector>

#include "doctest.h"
#include "specnet/numerics.hpp"

using namespace specnet;

namespace {

// Exhaustive active-set search: try every support, keep feasible stationary
// candidates, return the best residual. Independent of the library solver.
NnlsResult<double> nnls_enumerate(const Matrix<double>& a, const Vector<double>& b) {
  const Index n = a.cols();
  Vector<double> best = Vector<double>::Zero(n);
  double best_resid = b.norm();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j)
      if (mask & (1u << j)) cols.push_back(j);
    Matrix<double> sub(a.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Index>(c)) = a.col(cols[c]);
    Vector<double> coef = sub.colPivHouseholderQr().solve(b);
    if ((coef.array() < 0.0).any()) continue;
    Vector<double> full = Vector<double>::Zero(n);
    for (std::size_t c = 0; c < cols.size(); ++c) full[cols[c]] = coef[static_cast<Index>(c)];
    const double resid = (a * full - b).norm();
    if (resid < best_resid - 1e-14) {
      best_resid = resid;
      best = full;
    }
  }
  return {best, best_resid};
}

}  // namespace

TEST_SUITE_BEGIN("numerics");

TEST_CASE("nnls reproduces a reference solver on frozen problems") {
  // Reference values from scipy.optimize.nnls on the same systems.
  Matrix<double> a1(4, 3);
  a1 << 1.0, 0.5, -0.2, 0.3, -1.1, 0.8, 0.9, 0.4, 0.6, -0.5, 0.7, 1.2;
  Vector<double> b1(4);
  b1 << 0.8, -0.3, 1.1, 0.2;
  auto r1 = nnls(a1, b1);
  CHECK(r1.solution[0] == doctest::Approx(0.6996593913540233).epsilon(1e-10));
  CHECK(r1.solution[1] == doctest::Approx(0.5523996187709382).epsilon(1e-10));
  CHECK(r1.solution[2] == doctest::Approx(0.1849811394959624).epsilon(1e-10));
  CHECK(r1.residual_norm == doctest::Approx(0.21073894631902335).epsilon(1e-10));

  // Here the unconstrained optimum is heavily negative, so the active set binds.
  Matrix<double> a2(4, 3);
  a2 << 0.8, 0.6, 0.1, 0.2, 0.9, -0.7, 0.4, -0.3, 0.5, 1.0, 0.2, 0.3;
  Vector<double> b2(4);
  b2 << -0.5, 0.6, -0.8, 0.4;
  auto r2 = nnls(a2, b2);
  CHECK(r2.solution[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r2.solution[1] == doctest::Approx(0.430769230769231).epsilon(1e-10));
  CHECK(r2.solution[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r2.residual_norm == doctest::Approx(1.0810963096640518).epsilon(1e-10));
}

TEST_CASE("nnls matches exhaustive enumeration on random problems") {
  Rng rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    Matrix<double> a(4, 3);
    Vector<double> b(4);
    for (Index i = 0; i < 4; ++i) {
      b[i] = g(rng);
      for (Index j = 0; j < 3; ++j) a(i, j) = g(rng);
    }
    auto lib = nnls(a, b);
    auto ref = nnls_enumerate(a, b);
    CHECK(std::abs(lib.residual_norm - ref.residual_norm) < 1e-8);
    CHECK((lib.solution - ref.solution).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(lib.solution.minCoeff() >= 0.0);
  }
}

TEST_CASE("nnls satisfies the KKT conditions") {
  Rng rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    Matrix<double> a(6, 4);
    Vector<double> b(6);
    for (Index i = 0; i < 6; ++i) {
      b[i] = g(rng);
      for (Index j = 0; j < 4; ++j) a(i, j) = g(rng);
    }
    auto r = nnls(a, b);
    Vector<double> grad = a.transpose() * (a * r.solution - b);
    for (Index j = 0; j < 4; ++j) {
      if (r.solution[j] > 1e-10)
        CHECK(std::abs(grad[j]) < 1e-8);  // active coordinates are stationary
      else
        CHECK(grad[j] > -1e-8);  // inactive ones cannot improve by growing
    }
  }
}

TEST_CASE("cholesky factors SPD matrices and flags indefinite ones") {
  Rng rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix<double> m(5, 5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) m(i, j) = g(rng);
  Matrix<double> spd = m * m.transpose() + 5.0 * Matrix<double>::Identity(5, 5);
  auto llt = chol_factor(spd);
  Matrix<double> l = llt.matrixL();
  CHECK((l * l.transpose() - spd).cwiseAbs().maxCoeff() < 1e-10);

  Matrix<double> indef = Matrix<double>::Identity(3, 3);
  indef(1, 1) = -2.0;
  CHECK_THROWS_AS(chol_factor(indef), NumericalError);
}

TEST_CASE("precision-form gaussian draws have the right mean and covariance") {
  Matrix<double> precision(2, 2);
  precision << 4.0, 1.2, 1.2, 2.0;
  Vector<double> linear(2);
  linear << 1.0, -0.5;
  const Matrix<double> cov = precision.inverse();
  const Vector<double> mean = cov * linear;

  Rng rng(2024);
  const int n = 40000;
  Vector<double> acc = Vector<double>::Zero(2);
  Matrix<double> acc2 = Matrix<double>::Zero(2, 2);
  for (int s = 0; s < n; ++s) {
    Vector<double> x = sample_gaussian_precision(precision, linear, rng);
    acc += x;
    acc2 += x * x.transpose();
  }
  Vector<double> emp_mean = acc / double(n);
  Matrix<double> emp_cov = acc2 / double(n) - emp_mean * emp_mean.transpose();
  CHECK((emp_mean - mean).cwiseAbs().maxCoeff() < 0.02);
  CHECK((emp_cov - cov).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("gamma draws follow the shape-rate convention") {
  Rng rng(8);
  const double shape = 3.0, rate = 2.0;
  const int n = 60000;
  double acc = 0.0, acc2 = 0.0;
  for (int s = 0; s < n; ++s) {
    const double x = sample_gamma(shape, rate, rng);
    CHECK(x > 0.0);
    acc += x;
    acc2 += x * x;
  }
  const double mean = acc / n;
  const double var = acc2 / n - mean * mean;
  CHECK(mean == doctest::Approx(shape / rate).epsilon(0.02));
  CHECK(var == doctest::Approx(shape / (rate * rate)).epsilon(0.05));
}

TEST_SUITE_END();

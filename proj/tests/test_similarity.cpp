#include <cmath>
#include <set>

#include "doctest.h"
#include "specnet/similarity.hpp"
#include "specnet/simulator.hpp"

using namespace specnet;

namespace {

Matrix<double> random_h(Index n, double slab_prob, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix<double> h = Matrix<double>::Constant(n, n, 0.005);
  for (Index i = 0; i < n; ++i) {
    h(i, i) = 1.0;
    for (Index j = 0; j < n; ++j)
      if (i != j && unif(rng) < slab_prob) h(i, j) = 1.0;
  }
  return h;
}

}  // namespace

TEST_SUITE_BEGIN("similarity");

TEST_CASE("pair_index enumerates the upper triangle without gaps") {
  const Index n = 7;
  std::set<Index> seen;
  Index expected = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const Index r = pair_index(i, j, n);
      CHECK(r == expected);  // row-major pair order
      seen.insert(r);
      ++expected;
    }
  CHECK(static_cast<Index>(seen.size()) == n * (n - 1) / 2);
}

TEST_CASE("design rows are elementwise products of structure rows") {
  Rng rng(3);
  const Index n = 6;
  Matrix<double> h = random_h(n, 0.4, rng);
  Matrix<double> design = build_design(h);
  REQUIRE(design.rows() == n * (n - 1) / 2);
  REQUIRE(design.cols() == n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      for (Index l = 0; l < n; ++l)
        CHECK(design(pair_index(i, j, n), l) == h(i, l) * h(j, l));

  // spike entries stay in the design rather than being rounded to zero
  CHECK(design.minCoeff() > 0.0);
}

TEST_CASE("predictions are the design-weight product") {
  Rng rng(9);
  const Index n = 5;
  Matrix<double> h = random_h(n, 0.5, rng);
  Vector<double> beta(n);
  for (Index l = 0; l < n; ++l) beta[l] = 0.1 * double(l + 1);
  Vector<double> pred = similarity_predictions(h, beta);
  Vector<double> oracle = Vector<double>::Zero(n * (n - 1) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      for (Index l = 0; l < n; ++l)
        oracle[pair_index(i, j, n)] += h(i, l) * h(j, l) * beta[l];
  CHECK((pred - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("seq_log_factor equals a from-scratch candidate evaluation") {
  Rng rng(21);
  const Index n = 6;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    Matrix<double> h = random_h(n, 0.4, rng);
    Vector<double> beta(n);
    for (Index l = 0; l < n; ++l) beta[l] = std::abs(g(rng));
    Matrix<double> s(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) {
        s(i, j) = std::abs(g(rng));
        s(j, i) = s(i, j);
      }
    auto sim = SimilarityData<double>::from_matrix(s);
    const double sigma = 0.3 + std::abs(g(rng));

    std::uniform_int_distribution<Index> pick(0, n - 1);
    Index i = pick(rng), j = pick(rng);
    if (i == j) j = (j + 1) % n;
    for (double candidate : {1.0, 0.005}) {
      Matrix<double> hc = h;
      hc(i, j) = candidate;
      const double rss = (sim.s_bar - similarity_predictions(hc, beta)).squaredNorm();
      const double oracle = -rss / (2.0 * sigma * sigma);
      CHECK(seq_log_factor(sim, h, i, j, candidate, beta, sigma) ==
            doctest::Approx(oracle).epsilon(1e-10));
    }
  }
}

TEST_CASE("weight refit recovers generating weights on a clean design") {
  Rng rng(15);
  const Index n = 6;
  Matrix<double> h = random_h(n, 0.6, rng);
  Vector<double> beta_true(n);
  for (Index l = 0; l < n; ++l) beta_true[l] = 0.15 * double(l + 1);
  Matrix<double> design = build_design(h);
  Eigen::JacobiSVD<Matrix<double>> svd(design);
  REQUIRE(svd.singularValues().minCoeff() > 1e-6);  // identifiable configuration

  Matrix<double> s = Matrix<double>::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      double v = 0.0;
      for (Index l = 0; l < n; ++l) v += h(i, l) * h(j, l) * beta_true[l];
      s(i, j) = v;
      s(j, i) = v;
    }
  auto sim = SimilarityData<double>::from_matrix(s);
  Vector<double> beta_hat = update_beta(sim, h);
  CHECK((beta_hat - beta_true).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("sigma_seq conditional matches the closed form draw for draw") {
  Hyperparameters<double> hyper;
  Rng setup(27);
  const Index n = 5;
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    Matrix<double> h = random_h(n, 0.5, setup);
    Vector<double> beta(n);
    for (Index l = 0; l < n; ++l) beta[l] = std::abs(g(setup));
    Matrix<double> s(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) {
        s(i, j) = std::abs(g(setup));
        s(j, i) = s(i, j);
      }
    auto sim = SimilarityData<double>::from_matrix(s);

    Rng r1(3000 + rep), r2(3000 + rep);
    const double drawn = sample_sigma_seq<double>(sim, h, beta, hyper, r1);
    const double rss = (sim.s_bar - similarity_predictions(h, beta)).squaredNorm();
    const double shape = hyper.d_seq.first + double(n * (n - 1) / 2) / 2.0;
    const double rate = hyper.d_seq.second + rss / 2.0;
    const double expect = 1.0 / std::sqrt(std::max(sample_gamma(shape, rate, r2), 1e-290));
    CHECK(drawn == expect);
  }
}

TEST_CASE("simulated similarity counts shared regulators") {
  Matrix<double> h_true(4, 4);
  h_true << 1, 0, 1, 0,
            1, 1, 0, 0,
            0, 1, 1, 1,
            0, 0, 0, 1;
  auto sim = simulate_similarity<double>(h_true, 0.1, 0.6, 77);
  CHECK(sim.S.rows() == 4);
  CHECK((sim.S - sim.S.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // genes 0 and 1 share only regulator 0, so s_01 is beta_0 alone
  auto sim_b = simulate_similarity<double>(h_true, 0.1, 0.6, 77);
  CHECK(sim.S(0, 1) == sim_b.S(0, 1));  // deterministic in the seed
  CHECK(sim.S(0, 1) >= 0.1);
  CHECK(sim.S(0, 1) <= 0.6);
  // genes 0 and 3 share no regulators at all
  CHECK(sim.S(0, 3) == 0.0);
  // genes 1 and 2 share regulator 1 only
  CHECK(sim.S(1, 2) >= 0.1);
  CHECK(sim.S(1, 2) <= 0.6);
  // genes 2 and 3 share regulator 3
  CHECK(sim.S(2, 3) >= 0.1);
  CHECK(sim.S(2, 3) <= 0.6);
}

TEST_SUITE_END();

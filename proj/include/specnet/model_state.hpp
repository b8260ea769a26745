#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "specnet/common.hpp"

namespace specnet {

// Prior constants. Pairs are (shape, rate) for the Gamma priors and
// (alpha, beta) for the Beta prior on the sparsity weight.
template <class Scalar>
struct Hyperparameters {
  std::pair<Scalar, Scalar> a_w{Scalar(1), Scalar(1)};          // sparsity w
  std::pair<Scalar, Scalar> b_tau{Scalar(5), Scalar(50)};       // hypervariance tau^-2
  std::pair<Scalar, Scalar> c_sigma{Scalar(0.001), Scalar(0.001)};  // noise sigma_D^-2
  std::pair<Scalar, Scalar> d_seq{Scalar(10), Scalar(0.001)};   // similarity noise sigma_seq^-2
  Scalar v0 = Scalar(0.005);                                    // spike scale

  void validate() const {
    auto pos_pair = [](const std::pair<Scalar, Scalar>& p) {
      return p.first > Scalar(0) && p.second > Scalar(0);
    };
    if (!pos_pair(a_w) || !pos_pair(b_tau) || !pos_pair(c_sigma) || !pos_pair(d_seq))
      throw DataError("hyperparameter pairs must be strictly positive");
    if (!(v0 > Scalar(0) && v0 < Scalar(1)))
      throw DataError("spike scale must lie in (0,1)");
  }
};

// One Gibbs state. B stacks A^T over C^T over b^T, so column i holds every
// coefficient of target gene i. H and tau2 are laid out transposed to B:
// row i of H selects the regressors of target i.
template <class Scalar>
struct NetworkState {
  Matrix<Scalar> B;      // (N+P+1) x N
  Matrix<Scalar> H;      // N x (N+P+1), entries in {v0, 1}
  Matrix<Scalar> tau2;   // N x (N+P+1), positive
  Scalar w = Scalar(0.5);
  Scalar sigma_D = Scalar(1);
  Vector<Scalar> beta;   // length N, non-negative similarity weights
  Scalar sigma_seq = Scalar(1);

  Index n_genes() const { return H.rows(); }
  Index n_regressors() const { return H.cols(); }
  Index n_inputs() const { return H.cols() - H.rows() - 1; }
};

// Pairwise similarity scores. Only the upper triangle is used; pairs are
// flattened in lexicographic (i,j), i<j order.
template <class Scalar>
struct SimilarityData {
  Matrix<Scalar> S;
  Vector<Scalar> s_bar;  // length N(N-1)/2

  static SimilarityData from_matrix(const Matrix<Scalar>& s) {
    if (s.rows() != s.cols()) throw DataError("similarity matrix must be square");
    if (!s.allFinite()) throw DataError("similarity matrix has non-finite values");
    if (!s.isApprox(s.transpose(), Scalar(1e-10)))
      throw DataError("similarity matrix must be symmetric");
    SimilarityData out;
    out.S = s;
    const Index n = s.rows();
    out.s_bar = Vector<Scalar>(n * (n - 1) / 2);
    Index k = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) out.s_bar[k++] = s(i, j);
    return out;
  }

  Index n_genes() const { return S.rows(); }
  Index n_pairs() const { return s_bar.size(); }
};

struct ChainConfig {
  long n_samples = 5000;
  long burn_in = 4000;
  long n_average = 1000;
  std::uint64_t seed = 0;
  bool use_similarity = false;
  bool random_scan = false;       // H scan order; fixed row-major by default
  bool reflect_decay = true;      // a_ii <- -|a_ii| after each draw

  void validate() const {
    if (n_samples <= 0 || burn_in < 0 || n_average <= 0)
      throw DataError("chain lengths must be positive");
    if (burn_in >= n_samples) throw DataError("burn-in must be shorter than the chain");
    if (n_average > n_samples - burn_in)
      throw DataError("averaging window exceeds the post-burn-in span");
  }
};

namespace detail {

// Gamma draws with tiny shape underflow to zero; the inverse square root
// must stay finite, so the draw is floored at a denormal-safe level.
template <class Scalar>
Scalar floored_gamma_draw(Scalar shape, Scalar rate, Rng& rng) {
  std::gamma_distribution<Scalar> g(shape, Scalar(1) / rate);
  return std::max(g(rng), Scalar(1e-290));
}

}  // namespace detail

template <class Scalar>
NetworkState<Scalar> init_state(Index n_genes, Index n_inputs,
                                const Hyperparameters<Scalar>& hyper, Rng& rng) {
  if (n_genes < 2) throw DataError("need at least 2 genes");
  if (n_inputs < 0) throw DataError("negative input count");
  hyper.validate();
  const Index d = n_genes + n_inputs + 1;
  NetworkState<Scalar> st;
  st.B = Matrix<Scalar>::Zero(d, n_genes);
  st.H = Matrix<Scalar>::Constant(n_genes, d, hyper.v0);
  for (Index i = 0; i < n_genes; ++i) st.H(i, i) = Scalar(1);
  st.H.rightCols(n_inputs + 1).setOnes();  // inputs and intercept always active
  st.tau2 = Matrix<Scalar>(n_genes, d);
  for (Index i = 0; i < n_genes; ++i)
    for (Index j = 0; j < d; ++j)
      st.tau2(i, j) =
          Scalar(1) / detail::floored_gamma_draw(hyper.b_tau.first, hyper.b_tau.second, rng);
  const Scalar xa = detail::floored_gamma_draw(hyper.a_w.first, Scalar(1), rng);
  const Scalar xb = detail::floored_gamma_draw(hyper.a_w.second, Scalar(1), rng);
  st.w = std::clamp(xa / (xa + xb), Scalar(1e-12), Scalar(1) - Scalar(1e-12));
  st.sigma_D =
      Scalar(1) / std::sqrt(detail::floored_gamma_draw(hyper.c_sigma.first, hyper.c_sigma.second, rng));
  st.beta = Vector<Scalar>::Zero(n_genes);
  st.sigma_seq =
      Scalar(1) / std::sqrt(detail::floored_gamma_draw(hyper.d_seq.first, hyper.d_seq.second, rng));
  return st;
}

// Invariant check run by tests after every sweep: h_ii = 1, decay entries
// non-positive, H two-valued, tau2 positive, beta non-negative.
template <class Scalar>
void validate_state(const NetworkState<Scalar>& st, const Hyperparameters<Scalar>& hyper) {
  const Index n = st.n_genes();
  const Index d = st.n_regressors();
  if (st.B.rows() != d || st.B.cols() != n || st.tau2.rows() != n || st.tau2.cols() != d)
    throw DataError("state shapes are inconsistent");
  for (Index i = 0; i < n; ++i) {
    if (st.H(i, i) != Scalar(1)) throw DataError("diagonal structure entry must stay 1");
    if (st.B(i, i) > Scalar(0)) throw DataError("decay entry must stay non-positive");
    for (Index j = 0; j < d; ++j) {
      const Scalar h = st.H(i, j);
      if (h != Scalar(1) && h != hyper.v0)
        throw DataError("structure entries must be the spike scale or 1");
      if (!(st.tau2(i, j) > Scalar(0))) throw DataError("hypervariance must be positive");
    }
  }
  if (!(st.w > Scalar(0) && st.w < Scalar(1))) throw DataError("sparsity weight out of (0,1)");
  if (!(st.sigma_D > Scalar(0)) || !(st.sigma_seq > Scalar(0)))
    throw DataError("noise scales must be positive");
  for (Index l = 0; l < st.beta.size(); ++l)
    if (st.beta[l] < Scalar(0)) throw DataError("similarity weights must be non-negative");
}

}  // namespace specnet

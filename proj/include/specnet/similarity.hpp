#pragma once

#include <cmath>

#include "specnet/common.hpp"
#include "specnet/model_state.hpp"
#include "specnet/numerics.hpp"

namespace specnet {

// Flattened index of pair (i,j), i<j, in lexicographic order.
inline Index pair_index(Index i, Index j, Index n) {
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

// Additive-clustering design: row (i,j) holds the elementwise products
// h_il*h_jl over the gene-gene block. Spike entries enter as v0, not zero,
// so absent features still contribute v0^2 * beta_l.
template <class Scalar>
Matrix<Scalar> build_design(const Matrix<Scalar>& h_genes) {
  const Index n = h_genes.rows();
  if (h_genes.cols() != n) throw DataError("gene block of H must be square");
  Matrix<Scalar> design(n * (n - 1) / 2, n);
  Index row = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      design.row(row++) = h_genes.row(i).cwiseProduct(h_genes.row(j));
  return design;
}

// Model-side pair predictions for the current structure and weights.
template <class Scalar>
Vector<Scalar> similarity_predictions(const Matrix<Scalar>& h_genes, const Vector<Scalar>& beta) {
  return build_design(h_genes) * beta;
}

// Point estimate of the feature weights: the sampler substitutes the NNLS
// minimizer for an exact conditional draw.
template <class Scalar>
Vector<Scalar> update_beta(const SimilarityData<Scalar>& sim, const Matrix<Scalar>& h_genes) {
  if (sim.n_genes() != h_genes.rows()) throw DataError("similarity size does not match H");
  return nnls<Scalar>(build_design(h_genes), sim.s_bar).solution;
}

template <class Scalar>
Scalar sample_sigma_seq(const SimilarityData<Scalar>& sim, const Matrix<Scalar>& h_genes,
                        const Vector<Scalar>& beta, const Hyperparameters<Scalar>& hyper,
                        Rng& rng) {
  const Vector<Scalar> resid = sim.s_bar - similarity_predictions(h_genes, beta);
  const Scalar shape = hyper.d_seq.first + Scalar(sim.n_pairs()) / Scalar(2);
  const Scalar rate = hyper.d_seq.second + resid.squaredNorm() / Scalar(2);
  const Scalar draw = std::max(sample_gamma(shape, rate, rng), Scalar(1e-290));
  return Scalar(1) / std::sqrt(draw);
}

// Log-likelihood of the scores with entry (i,j) set to the candidate value.
// Only the pairs containing gene i depend on row i of H, so the quadratic
// form is adjusted on those rows instead of rebuilding the design.
template <class Scalar>
Scalar seq_log_factor(const SimilarityData<Scalar>& sim, const Matrix<Scalar>& h_genes,
                      Index i, Index j, Scalar candidate, const Vector<Scalar>& beta,
                      Scalar sigma_seq) {
  const Index n = h_genes.rows();
  if (i == j || i < 0 || j < 0 || i >= n || j >= n) throw DataError("invalid structure entry");
  Vector<Scalar> pred = similarity_predictions(h_genes, beta);
  Scalar rss = (sim.s_bar - pred).squaredNorm();
  const Scalar delta_h = candidate - h_genes(i, j);
  for (Index q = 0; q < n; ++q) {
    if (q == i) continue;
    const Index row = q < i ? pair_index(q, i, n) : pair_index(i, q, n);
    const Scalar old_term = sim.s_bar[row] - pred[row];
    const Scalar new_term = old_term - delta_h * h_genes(q, j) * beta[j];
    rss += new_term * new_term - old_term * old_term;
  }
  return -rss / (Scalar(2) * sigma_seq * sigma_seq);
}

}  // namespace specnet

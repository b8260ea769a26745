#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "specnet/common.hpp"
#include "specnet/model_state.hpp"
#include "specnet/numerics.hpp"
#include "specnet/similarity.hpp"
#include "specnet/spectral.hpp"

namespace specnet {

// Sufficient statistics of the frequency-domain regression, shared by every
// target because the replicates enter through the same regressor matrices.
template <class Scalar>
struct CoefficientPosterior {
  Matrix<Scalar> eta;  // (N+P+1) x N, sum of R_k^T Xdot_k
  Matrix<Scalar> psi;  // (N+P+1) x (N+P+1), sum of R_k^T R_k
};

template <class Scalar>
CoefficientPosterior<Scalar> accumulate_sufficient_stats(const SpectralSet<Scalar>& spectral) {
  if (spectral.n_replicates() == 0) throw DataError("spectral set has no replicates");
  const Index d = spectral.n_regressors();
  CoefficientPosterior<Scalar> stats;
  stats.eta = Matrix<Scalar>::Zero(d, spectral.n_genes);
  stats.psi = Matrix<Scalar>::Zero(d, d);
  for (Index k = 0; k < spectral.n_replicates(); ++k) {
    if (spectral.R[k].cols() != d || spectral.Xdot[k].cols() != spectral.n_genes)
      throw DataError("replicate shapes disagree");
    stats.eta += spectral.R[k].transpose() * spectral.Xdot[k];
    stats.psi += spectral.R[k].transpose() * spectral.R[k];
  }
  return stats;
}

// One coefficient column per target: the joint Gaussian factorizes over
// targets because the likelihood precision is block diagonal (I x Psi).
template <class Scalar>
void sample_B(const CoefficientPosterior<Scalar>& stats, NetworkState<Scalar>& state, Rng& rng,
              bool reflect_decay = true) {
  const Index n = state.n_genes();
  const Scalar inv_var = Scalar(1) / (state.sigma_D * state.sigma_D);
  for (Index i = 0; i < n; ++i) {
    Matrix<Scalar> precision = stats.psi * inv_var;
    for (Index j = 0; j < state.n_regressors(); ++j)
      precision(j, j) += Scalar(1) / (state.H(i, j) * state.tau2(i, j));
    state.B.col(i) = sample_gaussian_precision<Scalar>(precision, stats.eta.col(i) * inv_var, rng);
    if (reflect_decay) state.B(i, i) = -std::abs(state.B(i, i));
  }
}

template <class Scalar>
void sample_tau2(NetworkState<Scalar>& state, const Hyperparameters<Scalar>& hyper, Rng& rng) {
  const Index n = state.n_genes();
  const Index d = state.n_regressors();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) {
      const Scalar b = state.B(j, i);
      const Scalar shape = hyper.b_tau.first + Scalar(0.5);
      const Scalar rate = hyper.b_tau.second + b * b / (Scalar(2) * state.H(i, j));
      state.tau2(i, j) = Scalar(1) / std::max(sample_gamma(shape, rate, rng), Scalar(1e-290));
    }
}

namespace detail {

template <class Scalar>
Scalar log_sigmoid_prob(Scalar log_odds) {
  if (log_odds >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-log_odds));
  const Scalar e = std::exp(log_odds);
  return e / (Scalar(1) + e);
}

}  // namespace detail

// Two-point draw of every gene-gene off-diagonal entry, scanned in a fixed
// order with each entry conditioned on the latest H. The similarity factor
// couples entries, which is why the scan cannot vectorize.
template <class Scalar>
void sample_H(NetworkState<Scalar>& state, const Hyperparameters<Scalar>& hyper,
              const std::optional<SimilarityData<Scalar>>& sim, Rng& rng,
              bool random_scan = false) {
  const Index n = state.n_genes();
  const Scalar v0 = hyper.v0;
  const Scalar log_w_odds = std::log(state.w) - std::log1p(-state.w);
  const Scalar half_log_v0 = Scalar(0.5) * std::log(v0);
  std::uniform_real_distribution<Scalar> unif(Scalar(0), Scalar(1));

  const bool with_seq = sim.has_value() && state.beta.size() == n;
  Vector<Scalar> pred;
  if (with_seq) pred = similarity_predictions<Scalar>(state.H.leftCols(n), state.beta);

  std::vector<std::pair<Index, Index>> order;
  order.reserve(n * (n - 1));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) order.emplace_back(i, j);
  if (random_scan) {
    for (std::size_t k = order.size(); k > 1; --k) {
      std::uniform_int_distribution<std::size_t> pick(0, k - 1);
      std::swap(order[k - 1], order[pick(rng)]);
    }
  }

  for (auto [i, j] : order) {
    const Scalar b = state.B(j, i);
    const Scalar b2_over_tau = b * b / state.tau2(i, j);
    // log m_1 - log m_v0 with the sigma_seq^{-D/2} prefactors cancelling
    Scalar log_odds = log_w_odds - b2_over_tau / Scalar(2) + half_log_v0 +
                      b2_over_tau / (Scalar(2) * v0);
    if (with_seq) {
      const Scalar inv_two_var = Scalar(1) / (Scalar(2) * state.sigma_seq * state.sigma_seq);
      const Scalar h_cur = state.H(i, j);
      Scalar diff = Scalar(0);  // rss(v0 candidate) - rss(slab candidate)
      for (Index q = 0; q < n; ++q) {
        if (q == i) continue;
        const Index row = q < i ? pair_index(q, i, n) : pair_index(i, q, n);
        const Scalar step = state.H(q, j) * state.beta[j];
        const Scalar r = sim->s_bar[row] - pred[row];
        const Scalar r1 = r - (Scalar(1) - h_cur) * step;
        const Scalar rv = r - (v0 - h_cur) * step;
        diff += rv * rv - r1 * r1;
      }
      log_odds += diff * inv_two_var;
    }
    const Scalar p_slab = detail::log_sigmoid_prob(log_odds);
    const Scalar h_new = unif(rng) < p_slab ? Scalar(1) : v0;
    if (with_seq && h_new != state.H(i, j)) {
      const Scalar delta = h_new - state.H(i, j);
      for (Index q = 0; q < n; ++q) {
        if (q == i) continue;
        const Index row = q < i ? pair_index(q, i, n) : pair_index(i, q, n);
        pred[row] += delta * state.H(q, j) * state.beta[j];
      }
    }
    state.H(i, j) = h_new;
  }
}

template <class Scalar>
void sample_w(NetworkState<Scalar>& state, const Hyperparameters<Scalar>& hyper, Rng& rng) {
  const Index n = state.n_genes();
  Index ones = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && state.H(i, j) == Scalar(1)) ++ones;
  const Index spikes = n * (n - 1) - ones;
  const Scalar xa =
      std::max(sample_gamma(hyper.a_w.first + Scalar(ones), Scalar(1), rng), Scalar(1e-290));
  const Scalar xb =
      std::max(sample_gamma(hyper.a_w.second + Scalar(spikes), Scalar(1), rng), Scalar(1e-290));
  state.w = std::clamp(xa / (xa + xb), Scalar(1e-12), Scalar(1) - Scalar(1e-12));
}

template <class Scalar>
void sample_sigma_D(NetworkState<Scalar>& state, const SpectralSet<Scalar>& spectral,
                    const Hyperparameters<Scalar>& hyper, Rng& rng) {
  Scalar rss = Scalar(0);
  Index count = 0;
  for (Index k = 0; k < spectral.n_replicates(); ++k) {
    rss += (spectral.Xdot[k] - spectral.R[k] * state.B).squaredNorm();
    count += spectral.Xdot[k].size();
  }
  const Scalar shape = hyper.c_sigma.first + Scalar(count) / Scalar(2);
  const Scalar rate = hyper.c_sigma.second + rss / Scalar(2);
  state.sigma_D = Scalar(1) / std::sqrt(std::max(sample_gamma(shape, rate, rng), Scalar(1e-290)));
}

// Geweke convergence score: difference of early and late segment means,
// scaled by spectral-density estimates of each segment's variance so the
// autocorrelation of the chain does not deflate the denominator.
template <class Scalar>
Scalar geweke_z(const std::vector<Scalar>& trace) {
  const std::size_t n = trace.size();
  if (n < 20) throw DataError("geweke needs at least 20 samples");
  const std::size_t na = std::max<std::size_t>(1, n / 10);
  const std::size_t nb = n / 2;

  auto segment_stats = [](const Scalar* begin, std::size_t len, Scalar& mean, Scalar& s0) {
    mean = Scalar(0);
    for (std::size_t t = 0; t < len; ++t) mean += begin[t];
    mean /= Scalar(len);
    const std::size_t lag_max = static_cast<std::size_t>(std::sqrt(Scalar(len)));
    auto gamma = [&](std::size_t lag) {
      Scalar acc = Scalar(0);
      for (std::size_t t = lag; t < len; ++t)
        acc += (begin[t] - mean) * (begin[t - lag] - mean);
      return acc / Scalar(len);
    };
    s0 = gamma(0);
    for (std::size_t l = 1; l <= lag_max && l < len; ++l)
      s0 += Scalar(2) * (Scalar(1) - Scalar(l) / Scalar(lag_max + 1)) * gamma(l);
    s0 = std::max(s0, Scalar(0));
  };

  Scalar mean_a, s0_a, mean_b, s0_b;
  segment_stats(trace.data(), na, mean_a, s0_a);
  segment_stats(trace.data() + (n - nb), nb, mean_b, s0_b);
  const Scalar var = s0_a / Scalar(na) + s0_b / Scalar(nb);
  if (var <= Scalar(0)) {
    if (mean_a == mean_b) return Scalar(0);  // constant chain counts as converged
    return mean_a > mean_b ? std::numeric_limits<Scalar>::infinity()
                           : -std::numeric_limits<Scalar>::infinity();
  }
  return (mean_a - mean_b) / std::sqrt(var);
}

template <class Scalar>
struct ChainTrace {
  std::vector<Scalar> w;          // full-chain scalar traces
  std::vector<Scalar> sigma_D;
  std::vector<Scalar> sigma_seq;
  std::vector<std::vector<Scalar>> h_trailing;  // per gene-gene entry, last n_average sweeps
  long iterations = 0;
};

template <class Scalar>
struct PosteriorSummary {
  Matrix<Scalar> edge_prob;     // N x N; off-diagonal from trailing samples, diagonal 1
  Matrix<Scalar> B_mean;        // trailing average of coefficients
  Matrix<Scalar> geweke_edges;  // z per gene-gene entry trace
  Scalar geweke_w = Scalar(0);
  Scalar geweke_sigma_D = Scalar(0);
  Scalar geweke_sigma_seq = Scalar(0);
  long averaged_samples = 0;
};

template <class Scalar>
std::pair<PosteriorSummary<Scalar>, ChainTrace<Scalar>> run_chain(
    const SpectralSet<Scalar>& spectral, const Hyperparameters<Scalar>& hyper,
    const ChainConfig& config, const std::optional<SimilarityData<Scalar>>& sim = {}) {
  config.validate();
  hyper.validate();
  const Index n = spectral.n_genes;
  if (sim.has_value() && sim->n_genes() != n)
    throw DataError("similarity matrix size does not match the gene set");

  Rng rng(config.seed);
  NetworkState<Scalar> state = init_state<Scalar>(n, spectral.n_inputs, hyper, rng);
  CoefficientPosterior<Scalar> stats = accumulate_sufficient_stats(spectral);
  const std::optional<SimilarityData<Scalar>>& sim_used =
      config.use_similarity ? sim : std::optional<SimilarityData<Scalar>>{};
  if (config.use_similarity && !sim.has_value())
    throw DataError("similarity requested but no similarity data given");

  ChainTrace<Scalar> trace;
  trace.w.reserve(config.n_samples);
  trace.sigma_D.reserve(config.n_samples);
  trace.h_trailing.assign(n * n, {});
  for (auto& t : trace.h_trailing) t.reserve(config.n_average);

  Matrix<Scalar> h_ones_sum = Matrix<Scalar>::Zero(n, n);
  Matrix<Scalar> b_sum = Matrix<Scalar>::Zero(state.B.rows(), state.B.cols());
  const long avg_start = config.n_samples - config.n_average;

  for (long it = 0; it < config.n_samples; ++it) {
    sample_B(stats, state, rng, config.reflect_decay);
    sample_tau2(state, hyper, rng);
    sample_H(state, hyper, sim_used, rng, config.random_scan);
    sample_w(state, hyper, rng);
    sample_sigma_D(state, spectral, hyper, rng);
    if (sim_used.has_value()) {
      state.sigma_seq =
          sample_sigma_seq<Scalar>(*sim_used, state.H.leftCols(n), state.beta, hyper, rng);
      state.beta = update_beta<Scalar>(*sim_used, state.H.leftCols(n));
      trace.sigma_seq.push_back(state.sigma_seq);
    }
    trace.w.push_back(state.w);
    trace.sigma_D.push_back(state.sigma_D);
    if (it >= avg_start) {
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          const Scalar one = state.H(i, j) == Scalar(1) ? Scalar(1) : Scalar(0);
          h_ones_sum(i, j) += one;
          trace.h_trailing[i * n + j].push_back(one);
        }
      b_sum += state.B;
    }
    ++trace.iterations;
  }

  PosteriorSummary<Scalar> summary;
  summary.averaged_samples = config.n_average;
  summary.edge_prob = h_ones_sum / Scalar(config.n_average);
  summary.edge_prob.diagonal().setOnes();  // decay presence, not a sampled edge
  summary.B_mean = b_sum / Scalar(config.n_average);
  // Diagnostics work on the averaging window; windows too short for the
  // Geweke estimator report NaN rather than a fabricated score.
  auto safe_geweke = [](const std::vector<Scalar>& t) {
    return t.size() >= 20 ? geweke_z(t) : std::numeric_limits<Scalar>::quiet_NaN();
  };
  auto trailing = [&](const std::vector<Scalar>& full) {
    const std::size_t keep = std::min<std::size_t>(full.size(), config.n_average);
    return std::vector<Scalar>(full.end() - keep, full.end());
  };
  summary.geweke_edges = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      summary.geweke_edges(i, j) = safe_geweke(trace.h_trailing[i * n + j]);
  summary.geweke_w = safe_geweke(trailing(trace.w));
  summary.geweke_sigma_D = safe_geweke(trailing(trace.sigma_D));
  summary.geweke_sigma_seq =
      trace.sigma_seq.empty() ? Scalar(0) : safe_geweke(trailing(trace.sigma_seq));
  return {std::move(summary), std::move(trace)};
}

}  // namespace specnet

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "specnet/common.hpp"
#include "specnet/model_state.hpp"
#include "specnet/spectral.hpp"

namespace specnet {

template <class Scalar>
struct GroundTruth {
  Matrix<Scalar> A_true;   // N x N, strictly negative diagonal
  Matrix<Scalar> C_true;   // N x 1, input coupling
  Vector<Scalar> b_true;   // basal rates
  Matrix<Scalar> H_true;   // binary adjacency; diagonal 1 (decay always present)
  std::vector<std::pair<Scalar, Scalar>> photoperiods;  // metadata of simulated runs
  std::vector<std::vector<Index>> knockout_lists;

  Index n_genes() const { return A_true.rows(); }
};

// Random sparse stable network. Decay rates are log-uniform over decay_range
// so time scales spread evenly; edge weights are uniform over weight_range
// with random sign. Unstable draws (any eigenvalue with positive real part)
// are rejected so the forced oscillation dominates the free response.
template <class Scalar>
GroundTruth<Scalar> generate_network(Index n_genes, Scalar edge_density,
                                     std::pair<Scalar, Scalar> decay_range,
                                     std::pair<Scalar, Scalar> weight_range,
                                     std::uint64_t seed) {
  if (n_genes < 2) throw DataError("need at least 2 genes");
  if (!(edge_density > Scalar(0) && edge_density <= Scalar(1)))
    throw DataError("edge density must lie in (0,1]");
  if (!(decay_range.first > Scalar(0) && decay_range.second >= decay_range.first))
    throw DataError("invalid decay range");
  if (!(weight_range.first > Scalar(0) && weight_range.second >= weight_range.first))
    throw DataError("invalid weight range");

  Rng rng(seed);
  std::uniform_real_distribution<Scalar> unif(Scalar(0), Scalar(1));
  std::uniform_real_distribution<Scalar> log_decay(std::log(decay_range.first),
                                                   std::log(decay_range.second));
  std::uniform_real_distribution<Scalar> weight(weight_range.first, weight_range.second);

  for (int attempt = 0; attempt < 100; ++attempt) {
    GroundTruth<Scalar> gt;
    gt.A_true = Matrix<Scalar>::Zero(n_genes, n_genes);
    gt.H_true = Matrix<Scalar>::Zero(n_genes, n_genes);
    for (Index i = 0; i < n_genes; ++i) {
      gt.A_true(i, i) = -std::exp(log_decay(rng));
      gt.H_true(i, i) = Scalar(1);
    }
    for (Index i = 0; i < n_genes; ++i)
      for (Index j = 0; j < n_genes; ++j) {
        if (i == j) continue;
        if (unif(rng) < edge_density) {
          const Scalar sign = unif(rng) < Scalar(0.5) ? Scalar(-1) : Scalar(1);
          gt.A_true(i, j) = sign * weight(rng);
          gt.H_true(i, j) = Scalar(1);
        }
      }
    // Every gene senses the input so the forced response excites the whole
    // network; sign variation decorrelates the per-gene phases.
    gt.C_true = Matrix<Scalar>(n_genes, 1);
    for (Index i = 0; i < n_genes; ++i) {
      const Scalar sign = unif(rng) < Scalar(0.5) ? Scalar(-1) : Scalar(1);
      gt.C_true(i, 0) = sign * weight(rng);
    }
    gt.b_true = Vector<Scalar>(n_genes);
    for (Index i = 0; i < n_genes; ++i) gt.b_true[i] = weight(rng);

    const auto eigenvalues = gt.A_true.eigenvalues();
    bool stable = true;
    for (Index i = 0; i < n_genes; ++i)
      if (eigenvalues[i].real() > Scalar(0)) stable = false;
    if (stable) return gt;
  }
  throw NumericalError("no stable network found within 100 attempts");
}

namespace detail {

// Closed-form propagation of dx/dt = A x + c over a duration: the matrix
// exponential of the augmented system gives both the homogeneous map and
// the forced offset in one call.
template <class Scalar>
std::pair<Matrix<Scalar>, Vector<Scalar>> affine_step(const Matrix<Scalar>& a,
                                                      const Vector<Scalar>& c, Scalar duration) {
  const Index n = a.rows();
  Matrix<Scalar> aug = Matrix<Scalar>::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = a;
  aug.topRightCorner(n, 1) = c;
  Matrix<Scalar> e = (aug * duration).exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, 1)};
}

}  // namespace detail

// Trajectory under a periodic binary input. The initial point is the exact
// periodic state of the forced cycle (solved from the one-cycle affine map),
// and one further pre-run cycle is discarded, so the sampled window is free
// of transients to machine precision. Knocked-out genes keep only their
// decay: regulatory inputs, basal rate, and input coupling are removed, and
// their outgoing column is zeroed.
template <class Scalar>
TimeSeriesSet<Scalar> simulate(const GroundTruth<Scalar>& gt,
                               std::pair<Scalar, Scalar> photoperiod, Index n_cycles,
                               Index samples_per_run, const std::vector<Index>& knockouts = {}) {
  const Index n = gt.n_genes();
  if (samples_per_run < 3) throw DataError("need at least 3 samples");
  if (n_cycles < 1) throw DataError("need at least one cycle");
  const Scalar on = photoperiod.first, off = photoperiod.second;
  if (!(on > Scalar(0)) || !(off > Scalar(0))) throw DataError("photoperiod phases must be positive");

  Matrix<Scalar> a = gt.A_true;
  Vector<Scalar> b = gt.b_true;
  Matrix<Scalar> c_in = gt.C_true;
  for (Index g : knockouts) {
    if (g < 0 || g >= n) throw DataError("knockout index out of range");
    a.row(g).setZero();
    a.col(g).setZero();
    a(g, g) = gt.A_true(g, g);
    b[g] = Scalar(0);
    c_in(g, 0) = Scalar(0);
  }

  const Scalar period = on + off;
  const Vector<Scalar> c_on = b + c_in.col(0);
  const Vector<Scalar> c_off = b;

  auto [phi_on, psi_on] = detail::affine_step(a, c_on, on);
  auto [phi_off, psi_off] = detail::affine_step(a, c_off, off);
  Matrix<Scalar> phi_cycle = phi_off * phi_on;
  Vector<Scalar> psi_cycle = phi_off * psi_on + psi_off;

  // Periodic fixed point of the cycle map, then one discarded pre-run cycle.
  Matrix<Scalar> lhs = Matrix<Scalar>::Identity(n, n) - phi_cycle;
  Vector<Scalar> x = lhs.partialPivLu().solve(psi_cycle);
  x = phi_cycle * x + psi_cycle;

  const Scalar total = Scalar(n_cycles) * period;
  const Scalar dt = total / Scalar(samples_per_run);
  Matrix<Scalar> traj(samples_per_run, n);
  Matrix<Scalar> input(samples_per_run, 1);

  Scalar t = Scalar(0);  // time within the sampled window; input on at phase 0
  for (Index s = 0; s < samples_per_run; ++s) {
    const Scalar target = Scalar(s) * dt;
    while (t < target) {
      const Scalar phase = t - std::floor(t / period) * period;
      const bool lit = phase < on;
      const Scalar next_switch = lit ? (t - phase) + on : (t - phase) + period;
      const Scalar step = std::min(target, next_switch) - t;
      if (step > Scalar(0)) {
        auto [phi, psi] = detail::affine_step(a, lit ? c_on : c_off, step);
        x = phi * x + psi;
      }
      t = std::min(target, next_switch);
    }
    const Scalar phase = target - std::floor(target / period) * period;
    traj.row(s) = x.transpose();
    input(s, 0) = phase < on ? Scalar(1) : Scalar(0);
  }

  TimeSeriesSet<Scalar> ts;
  ts.replicates.push_back(std::move(traj));
  ts.inputs.push_back(std::move(input));
  ts.dt = dt;
  ts.gene_names.reserve(n);
  for (Index i = 0; i < n; ++i) ts.gene_names.push_back("G" + std::to_string(i + 1));
  ts.input_names = {"light"};
  return ts;
}

// White noise scaled per gene and replicate to variance = signal variance / snr.
template <class Scalar>
TimeSeriesSet<Scalar> add_noise(const TimeSeriesSet<Scalar>& ts, Scalar snr, std::uint64_t seed) {
  if (!(snr > Scalar(0))) throw DataError("snr must be positive");
  TimeSeriesSet<Scalar> out = ts;
  Rng rng(seed);
  std::normal_distribution<Scalar> std_normal(Scalar(0), Scalar(1));
  for (auto& rep : out.replicates) {
    for (Index g = 0; g < rep.cols(); ++g) {
      const Scalar mean = rep.col(g).mean();
      const Scalar var = (rep.col(g).array() - mean).square().sum() / Scalar(rep.rows());
      if (var <= Scalar(0)) continue;
      const Scalar sd = std::sqrt(var / snr);
      for (Index t = 0; t < rep.rows(); ++t) rep(t, g) += sd * std_normal(rng);
    }
  }
  return out;
}

// Noiseless additive-clustering scores from the true binary adjacency.
template <class Scalar>
SimilarityData<Scalar> simulate_similarity(const Matrix<Scalar>& h_true, Scalar beta_low,
                                           Scalar beta_high, std::uint64_t seed) {
  if (!(beta_low < beta_high)) throw DataError("similarity weight range is empty");
  const Index n = h_true.rows();
  if (h_true.cols() != n) throw DataError("adjacency must be square");
  Rng rng(seed);
  std::uniform_real_distribution<Scalar> unif(beta_low, beta_high);
  Vector<Scalar> beta(n);
  for (Index l = 0; l < n; ++l) beta[l] = unif(rng);
  Matrix<Scalar> s = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      Scalar acc = Scalar(0);
      for (Index l = 0; l < n; ++l)
        if (h_true(i, l) != Scalar(0) && h_true(j, l) != Scalar(0)) acc += beta[l];
      s(i, j) = s(j, i) = acc;
    }
  return SimilarityData<Scalar>::from_matrix(s);
}

}  // namespace specnet

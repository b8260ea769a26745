#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "specnet/common.hpp"

namespace specnet {

// Cholesky with one retry: ill-conditioned precision matrices get diagonal
// jitter 1e-8*trace/n once, because replicate-poor data can leave the
// likelihood term rank-deficient when the prior term is extremely wide.
template <class Scalar>
Eigen::LLT<Matrix<Scalar>> chol_factor(const Matrix<Scalar>& spd) {
  Eigen::LLT<Matrix<Scalar>> llt(spd);
  if (llt.info() == Eigen::Success) return llt;
  const Index n = spd.rows();
  const Scalar jitter = Scalar(1e-8) * spd.trace() / Scalar(n);
  Matrix<Scalar> bumped = spd;
  bumped.diagonal().array() += jitter;
  llt.compute(bumped);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Cholesky factorization failed on an ill-conditioned system");
  return llt;
}

// Draw from N(precision^-1 * linear_term, precision^-1) without forming the
// covariance: solve for the mean, then back-substitute a standard normal
// vector through L^T.
template <class Scalar>
Vector<Scalar> sample_gaussian_precision(const Matrix<Scalar>& precision,
                                         const Vector<Scalar>& linear_term, Rng& rng) {
  if (precision.rows() != precision.cols() || precision.rows() != linear_term.size())
    throw DataError("precision and linear term shapes disagree");
  if (!precision.allFinite() || !linear_term.allFinite())
    throw DataError("non-finite Gaussian parameters");
  auto llt = chol_factor(precision);
  Vector<Scalar> mean = llt.solve(linear_term);
  std::normal_distribution<Scalar> std_normal(Scalar(0), Scalar(1));
  Vector<Scalar> z(linear_term.size());
  for (Index i = 0; i < z.size(); ++i) z[i] = std_normal(rng);
  return mean + llt.matrixU().solve(z);
}

// Shape-rate Gamma draw (mean = shape/rate).
template <class Scalar>
Scalar sample_gamma(Scalar shape, Scalar rate, Rng& rng) {
  if (!(shape > Scalar(0)) || !(rate > Scalar(0)))
    throw DataError("gamma parameters must be positive");
  std::gamma_distribution<Scalar> g(shape, Scalar(1) / rate);
  return g(rng);
}

template <class Scalar>
struct NnlsResult {
  Vector<Scalar> solution;
  Scalar residual_norm = Scalar(0);
};

// Lawson-Hanson active set. The passive set grows by the most violated
// dual coordinate; inner feasibility steps clip at the boundary, so the
// objective strictly decreases and the loop terminates.
template <class Scalar>
NnlsResult<Scalar> nnls(const Matrix<Scalar>& design, const Vector<Scalar>& target) {
  const Index m = design.rows();
  const Index n = design.cols();
  if (m < 1 || n < 1 || target.size() != m) throw DataError("nnls shape mismatch");
  if (!design.allFinite() || !target.allFinite()) throw DataError("nnls non-finite input");

  Vector<Scalar> x = Vector<Scalar>::Zero(n);
  std::vector<bool> passive(n, false);
  Vector<Scalar> resid = target;
  const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), design.cwiseAbs().maxCoeff()) *
                     std::max(Scalar(1), target.cwiseAbs().maxCoeff());

  auto solve_passive = [&](Vector<Scalar>& z) {
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    z = Vector<Scalar>::Zero(n);
    if (idx.empty()) return;
    Matrix<Scalar> sub(m, static_cast<Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(static_cast<Index>(c)) = design.col(idx[c]);
    Vector<Scalar> sol =
        sub.colPivHouseholderQr().solve(target);
    for (std::size_t c = 0; c < idx.size(); ++c) z[idx[c]] = sol[static_cast<Index>(c)];
  };

  for (Index outer = 0; outer < 3 * n + 30; ++outer) {
    Vector<Scalar> grad = design.transpose() * resid;
    Index best = -1;
    Scalar best_val = tol;
    for (Index j = 0; j < n; ++j)
      if (!passive[j] && grad[j] > best_val) {
        best_val = grad[j];
        best = j;
      }
    if (best < 0) break;
    passive[best] = true;

    Vector<Scalar> z;
    solve_passive(z);
    for (Index inner = 0; inner < 3 * n + 30; ++inner) {
      bool feasible = true;
      for (Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= Scalar(0)) feasible = false;
      if (feasible) break;
      Scalar alpha = std::numeric_limits<Scalar>::max();
      for (Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= Scalar(0))
          alpha = std::min(alpha, x[j] / (x[j] - z[j]));
      for (Index j = 0; j < n; ++j)
        if (passive[j]) x[j] += alpha * (z[j] - x[j]);
      for (Index j = 0; j < n; ++j)
        if (passive[j] && x[j] <= tol) {
          passive[j] = false;
          x[j] = Scalar(0);
        }
      solve_passive(z);
    }
    for (Index j = 0; j < n; ++j) x[j] = passive[j] ? std::max(z[j], Scalar(0)) : Scalar(0);
    resid = target - design * x;
  }
  NnlsResult<Scalar> out;
  out.solution = x;
  out.residual_norm = resid.norm();
  return out;
}

}  // namespace specnet

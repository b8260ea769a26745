#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "specnet/common.hpp"
#include "specnet/spectral.hpp"

namespace specnet {

template <class Scalar>
using PrCurve = std::vector<std::pair<Scalar, Scalar>>;  // (recall, precision)

// Ranked off-diagonal edges, one curve point per distinct score. Ties are
// broken by lexicographic pair order so the curve is seed-independent.
template <class Scalar>
PrCurve<Scalar> pr_curve(const Matrix<Scalar>& scores, const Matrix<Scalar>& truth) {
  const Index n = scores.rows();
  if (scores.cols() != n || truth.rows() != n || truth.cols() != n)
    throw DataError("score and truth shapes disagree");
  std::vector<std::tuple<Scalar, Index, Index>> items;
  Index positives = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      items.emplace_back(scores(i, j), i, j);
      if (truth(i, j) != Scalar(0)) ++positives;
    }
  if (positives == 0) throw DataError("truth has no positive edges");
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });

  PrCurve<Scalar> curve;
  Index tp = 0, fp = 0;
  std::size_t k = 0;
  while (k < items.size()) {
    const Scalar s = std::get<0>(items[k]);
    while (k < items.size() && std::get<0>(items[k]) == s) {
      if (truth(std::get<1>(items[k]), std::get<2>(items[k])) != Scalar(0))
        ++tp;
      else
        ++fp;
      ++k;
    }
    curve.emplace_back(Scalar(tp) / Scalar(positives), Scalar(tp) / Scalar(tp + fp));
  }
  return curve;
}

// Trapezoidal area over recall, anchored at (0, precision of the top block).
template <class Scalar>
Scalar aupr(const PrCurve<Scalar>& curve) {
  if (curve.empty()) throw DataError("empty precision-recall curve");
  Scalar area = Scalar(0);
  Scalar prev_r = Scalar(0), prev_p = curve.front().second;
  for (const auto& [r, p] : curve) {
    area += (r - prev_r) * (p + prev_p) / Scalar(2);
    prev_r = r;
    prev_p = p;
  }
  return area;
}

template <class Scalar>
struct ThresholdEdge {
  Index regulator;
  Index target;
  Scalar probability;
  bool bidirectional;
};

// Edges j -> i wherever p_ij passes the threshold; pairs passing in both
// directions are flagged bidirectional on both entries.
template <class Scalar>
std::vector<ThresholdEdge<Scalar>> threshold_network(const Matrix<Scalar>& prob, Scalar threshold) {
  if (!(threshold >= Scalar(0) && threshold <= Scalar(1)))
    throw DataError("threshold must lie in [0,1]");
  const Index n = prob.rows();
  std::vector<ThresholdEdge<Scalar>> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j || prob(i, j) < threshold) continue;
      edges.push_back({j, i, prob(i, j), prob(j, i) >= threshold});
    }
  return edges;
}

// L1 path on the same frequency-domain regression the sampler uses. The
// score of edge j->i is the largest normalized penalty at which coefficient
// (j,i) first becomes nonzero; decay, input, and intercept columns are
// never penalized.
template <class Scalar>
Matrix<Scalar> lasso_baseline(const SpectralSet<Scalar>& spectral, Index n_lambdas = 50) {
  const Index n = spectral.n_genes;
  const Index d = spectral.n_regressors();
  if (n_lambdas < 2) throw DataError("need at least 2 penalty levels");
  Index rows_total = 0;
  for (Index k = 0; k < spectral.n_replicates(); ++k) rows_total += spectral.R[k].rows();
  Matrix<Scalar> x_all(rows_total, d);
  Matrix<Scalar> y_all(rows_total, n);
  Index at = 0;
  for (Index k = 0; k < spectral.n_replicates(); ++k) {
    x_all.middleRows(at, spectral.R[k].rows()) = spectral.R[k];
    y_all.middleRows(at, spectral.R[k].rows()) = spectral.Xdot[k];
    at += spectral.R[k].rows();
  }
  const Vector<Scalar> col_sq = x_all.colwise().squaredNorm();

  Matrix<Scalar> scores = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    std::vector<bool> penalized(d, false);
    std::vector<Index> free_cols;
    for (Index j = 0; j < d; ++j) {
      penalized[j] = j < n && j != i;
      if (!penalized[j]) free_cols.push_back(j);
    }
    // lambda_max comes from the residual of the unpenalized-only fit: the
    // smallest penalty at which every penalized coefficient stays zero.
    Matrix<Scalar> free_design(rows_total, static_cast<Index>(free_cols.size()));
    for (std::size_t c = 0; c < free_cols.size(); ++c)
      free_design.col(static_cast<Index>(c)) = x_all.col(free_cols[c]);
    Vector<Scalar> free_fit = free_design.colPivHouseholderQr().solve(y_all.col(i));
    Vector<Scalar> resid = y_all.col(i) - free_design * free_fit;
    Scalar lambda_max = Scalar(0);
    for (Index j = 0; j < d; ++j)
      if (penalized[j]) lambda_max = std::max(lambda_max, std::abs(x_all.col(j).dot(resid)));
    if (!(lambda_max > Scalar(0)))
      throw DataError("degenerate regression: penalized columns carry no signal");

    Vector<Scalar> coef = Vector<Scalar>::Zero(d);
    for (Index li = 0; li < n_lambdas; ++li) {
      const Scalar frac = std::pow(Scalar(10), Scalar(-3) * Scalar(li) / Scalar(n_lambdas - 1));
      const Scalar lambda = lambda_max * frac;
      for (int sweep = 0; sweep < 500; ++sweep) {
        Scalar max_move = Scalar(0);
        for (Index j = 0; j < d; ++j) {
          if (col_sq[j] <= Scalar(0)) continue;
          const Scalar old = coef[j];
          const Scalar rho = x_all.col(j).dot(y_all.col(i) - x_all * coef) + col_sq[j] * old;
          Scalar updated;
          if (penalized[j]) {
            const Scalar mag = std::max(std::abs(rho) - lambda, Scalar(0));
            updated = (rho > Scalar(0) ? mag : -mag) / col_sq[j];
          } else {
            updated = rho / col_sq[j];
          }
          coef[j] = updated;
          max_move = std::max(max_move, std::abs(updated - old));
        }
        if (max_move < Scalar(1e-9)) break;
      }
      for (Index j = 0; j < n; ++j)
        if (penalized[j] && coef[j] != Scalar(0) && scores(i, j) == Scalar(0))
          scores(i, j) = frac;
    }
  }
  return scores;
}

}  // namespace specnet

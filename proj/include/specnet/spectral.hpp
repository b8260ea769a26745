#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "specnet/common.hpp"

namespace specnet {

// Uniformly sampled replicate trajectories plus the input signals that drove
// them. All replicates must share the grid: same M, N, P and dt.
template <class Scalar>
struct TimeSeriesSet {
  std::vector<Matrix<Scalar>> replicates;  // each M x N
  std::vector<Matrix<Scalar>> inputs;      // each M x P, same replicate order
  Scalar dt = Scalar(1);
  std::vector<std::string> gene_names;
  std::vector<std::string> input_names;

  Index n_replicates() const { return static_cast<Index>(replicates.size()); }
  Index n_samples() const { return replicates.empty() ? 0 : replicates.front().rows(); }
  Index n_genes() const { return replicates.empty() ? 0 : replicates.front().cols(); }
  Index n_inputs() const { return inputs.empty() ? 0 : inputs.front().cols(); }

  void validate() const {
    if (replicates.empty()) throw DataError("time series set has no replicates");
    if (inputs.size() != replicates.size())
      throw DataError("input list does not match replicate list");
    const Index m = replicates.front().rows();
    const Index n = replicates.front().cols();
    const Index p = inputs.front().cols();
    if (m < 3) throw DataError("need at least 3 samples per replicate");
    if (!(dt > Scalar(0))) throw DataError("sampling interval must be positive");
    for (std::size_t k = 0; k < replicates.size(); ++k) {
      if (replicates[k].rows() != m || replicates[k].cols() != n)
        throw DataError("replicate " + std::to_string(k) + " has mismatched shape");
      if (inputs[k].rows() != m || inputs[k].cols() != p)
        throw DataError("input block " + std::to_string(k) + " has mismatched shape");
      if (!replicates[k].allFinite() || !inputs[k].allFinite())
        throw DataError("non-finite value in replicate " + std::to_string(k));
    }
  }
};

// Stacked-real DFT of one signal: re parts of bins 1..F over im parts, with
// the DC (mean) carried separately. F = floor((M-1)/2), so the Nyquist bin of
// even-length series is dropped and the layout stays derivative-safe.
template <class Scalar>
struct RdftResult {
  Vector<Scalar> coeffs;  // length 2F
  Vector<Scalar> omega;   // length F, cycles per time unit
  Scalar dc = Scalar(0);
};

// Forward transform with 1/M scaling, so dc equals the signal mean and the
// regression is identical on both sides of the derivative identity.
template <class Scalar>
RdftResult<Scalar> rdft(const Vector<Scalar>& series, Scalar dt) {
  const Index m = series.size();
  if (m < 3) throw DataError("rdft needs at least 3 samples");
  if (!series.allFinite()) throw DataError("rdft input has non-finite values");
  if (!(dt > Scalar(0))) throw DataError("rdft needs a positive sampling interval");
  const Index f_count = (m - 1) / 2;
  RdftResult<Scalar> out;
  out.coeffs = Vector<Scalar>::Zero(2 * f_count);
  out.omega = Vector<Scalar>(f_count);
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  for (Index f = 0; f < f_count; ++f) {
    const Scalar base = two_pi * Scalar(f + 1) / Scalar(m);
    Scalar re = 0, im = 0;
    for (Index t = 0; t < m; ++t) {
      re += series[t] * std::cos(base * Scalar(t));
      im -= series[t] * std::sin(base * Scalar(t));
    }
    out.coeffs[f] = re / Scalar(m);
    out.coeffs[f_count + f] = im / Scalar(m);
    out.omega[f] = Scalar(f + 1) / (Scalar(m) * dt);
  }
  out.dc = series.mean();
  return out;
}

// Analytic spectral derivative: multiplying by 2*pi*i*omega swaps the real
// and imaginary blocks as (re, im) -> (-2*pi*omega*im, +2*pi*omega*re).
template <class Scalar>
Vector<Scalar> rdft_derivative(const Vector<Scalar>& coeffs, const Vector<Scalar>& omega) {
  const Index f_count = omega.size();
  if (coeffs.size() != 2 * f_count)
    throw DataError("rdft layout does not match the frequency grid");
  Vector<Scalar> d(2 * f_count);
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  for (Index f = 0; f < f_count; ++f) {
    const Scalar s = two_pi * omega[f];
    d[f] = -s * coeffs[f_count + f];
    d[f_count + f] = s * coeffs[f];
  }
  return d;
}

// Frequency-domain view of a dataset. Each matrix has 2F+1 rows: the stacked
// bins followed by one DC row that carries the zero-frequency balance, where
// the basal rate becomes estimable through the constant regressor column.
template <class Scalar>
struct SpectralSet {
  std::vector<Matrix<Scalar>> X;     // (2F+1) x N per replicate
  std::vector<Matrix<Scalar>> Xdot;  // same shape, analytic derivative (DC row zero)
  std::vector<Matrix<Scalar>> R;     // (2F+1) x (N+P+1), [X | inputs | const]
  Vector<Scalar> omega;              // length F, shared across replicates
  Index n_freq = 0;                  // 2F, stacked coefficients per signal
  Index n_genes = 0;
  Index n_inputs = 0;

  Index n_replicates() const { return static_cast<Index>(X.size()); }
  Index n_rows() const { return n_freq + 1; }
  Index n_regressors() const { return n_genes + n_inputs + 1; }
};

template <class Scalar>
SpectralSet<Scalar> build_spectral_set(const TimeSeriesSet<Scalar>& ts) {
  ts.validate();
  const Index n = ts.n_genes();
  const Index p = ts.n_inputs();
  const Index m = ts.n_samples();
  const Index f_count = (m - 1) / 2;
  SpectralSet<Scalar> out;
  out.n_freq = 2 * f_count;
  out.n_genes = n;
  out.n_inputs = p;
  const Index rows = 2 * f_count + 1;
  for (Index k = 0; k < ts.n_replicates(); ++k) {
    Matrix<Scalar> x = Matrix<Scalar>::Zero(rows, n);
    Matrix<Scalar> xdot = Matrix<Scalar>::Zero(rows, n);
    Matrix<Scalar> r = Matrix<Scalar>::Zero(rows, n + p + 1);
    for (Index i = 0; i < n; ++i) {
      auto spec = rdft<Scalar>(ts.replicates[k].col(i), ts.dt);
      x.col(i).head(2 * f_count) = spec.coeffs;
      x(rows - 1, i) = spec.dc;
      xdot.col(i).head(2 * f_count) = rdft_derivative<Scalar>(spec.coeffs, spec.omega);
      if (k == 0 && i == 0) out.omega = spec.omega;
    }
    for (Index j = 0; j < p; ++j) {
      auto spec = rdft<Scalar>(ts.inputs[k].col(j), ts.dt);
      r.col(n + j).head(2 * f_count) = spec.coeffs;
      r(rows - 1, n + j) = spec.dc;
    }
    r.leftCols(n) = x;
    // Constant regressor: no oscillatory content, unit DC (the mean of an
    // all-ones signal under 1/M scaling).
    r(rows - 1, n + p) = Scalar(1);
    out.X.push_back(std::move(x));
    out.Xdot.push_back(std::move(xdot));
    out.R.push_back(std::move(r));
  }
  return out;
}

}  // namespace specnet

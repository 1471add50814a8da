/* Copyright 2026 The kernelfuse Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef KERNELFUSE_KERNEL_GRAPH_HPP
#define KERNELFUSE_KERNEL_GRAPH_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kernelfuse/error.hpp"
#include "kernelfuse/random.hpp"

namespace kernelfuse {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Row n is the feature vector of frame n in one view.
template <typename Scalar>
using FeatureMatrix = Matrix<Scalar>;

// Kernel entries at or below this value do not count as graph edges.
inline constexpr double kEdgeThreshold = 1e-12;

// Row sums of every Markov matrix stay within this distance of one.
inline constexpr double kStochasticTolerance = 1e-12;

/// Squared Euclidean distances between all pairs of frames.
template <typename Scalar>
struct DistanceMatrix {
  Matrix<Scalar> d2;

  Eigen::Index size() const { return d2.rows(); }
};

/// Gaussian affinities exp(-d2 / epsilon) together with the bandwidth that produced them.
/// Entries lie in [0, 1]; very distant pairs may underflow to exactly zero.
template <typename Scalar>
struct AffinityKernel {
  Matrix<Scalar> k;
  Scalar epsilon{0};

  Eigen::Index size() const { return k.rows(); }
};

/// Row-stochastic transition matrix of a random walk on the data graph.
template <typename Scalar>
struct MarkovMatrix {
  Matrix<Scalar> m;

  Eigen::Index size() const { return m.rows(); }
};

enum class EigenMethod { direct, symmetrized };

inline const char* to_string(EigenMethod method) {
  return method == EigenMethod::direct ? "direct" : "symmetrized";
}

inline EigenMethod eigen_method_from_string(const std::string& name) {
  if (name == "direct") return EigenMethod::direct;
  if (name == "symmetrized") return EigenMethod::symmetrized;
  throw UsageError("unknown eigen method '" + name + "' (expected direct or symmetrized)");
}

/// Leading nontrivial eigenpair of a Markov matrix.
///
/// `method` records the decomposition that actually produced the vector; it
/// differs from the requested one when the direct route met a complex
/// eigenvalue and fell back to M * M^T (`complex_fallback` is then set).
/// `residual` is measured against the decomposed matrix (M for direct,
/// M * M^T for symmetrized).
template <typename Scalar>
struct SpectralResult {
  Scalar eigenvalue{0};
  Vector<Scalar> vector;
  Scalar residual{0};
  EigenMethod method{EigenMethod::direct};
  bool complex_fallback{false};
};

/// Throws DataError unless x has at least two rows, one column and only finite entries.
template <typename Derived>
void validate_features(const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() < 2) {
    throw DataError("feature matrix needs at least 2 frames, got " + std::to_string(x.rows()));
  }
  if (x.cols() < 1) throw DataError("feature matrix has no columns");
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    if (!x.row(n).allFinite()) {
      throw DataError("feature matrix has a non-finite entry in row " + std::to_string(n));
    }
  }
}

/// d2(n, m) = sum_l (x(n, l) - x(m, l))^2. Each pair is evaluated directly (no
/// Gram-matrix shortcut), so the result is exactly symmetric and identical rows
/// give exactly zero.
template <typename Derived>
DistanceMatrix<typename Derived::Scalar> pairwise_sq_dists(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  validate_features(x);
  const Eigen::Index n = x.rows();
  // One column per frame keeps each feature vector contiguous.
  const Matrix<Scalar> points = x.transpose();
  DistanceMatrix<Scalar> out{Matrix<Scalar>::Zero(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Scalar d = (points.col(i) - points.col(j)).squaredNorm();
      out.d2(i, j) = d;
      out.d2(j, i) = d;
    }
  }
  return out;
}

template <typename Scalar>
AffinityKernel<Scalar> build_affinity(const DistanceMatrix<Scalar>& d, Scalar epsilon) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw DataError("kernel bandwidth must be positive and finite, got " + std::to_string(epsilon));
  }
  AffinityKernel<Scalar> out{(-d.d2.array() / epsilon).exp().matrix(), epsilon};
  out.k.diagonal().setOnes();
  return out;
}

namespace detail {

template <typename Scalar>
MarkovMatrix<Scalar> normalize_rows(Matrix<Scalar> a) {
  const Vector<Scalar> sums = a.rowwise().sum();
  for (Eigen::Index n = 0; n < sums.size(); ++n) {
    if (!(sums(n) > 0)) {
      throw NumericalError("row " + std::to_string(n) + " has no mass and cannot be normalized");
    }
  }
  a.array().colwise() /= sums.array();
  return MarkovMatrix<Scalar>{std::move(a)};
}

template <typename Scalar>
void check_same_size(const MarkovMatrix<Scalar>& a, const MarkovMatrix<Scalar>& b) {
  if (a.size() != b.size() || a.m.cols() != b.m.cols()) {
    throw DataError("Markov matrices differ in size: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
}

}  // namespace detail

/// M = D^-1 K with D the diagonal of row sums.
template <typename Scalar>
MarkovMatrix<Scalar> row_normalize(const AffinityKernel<Scalar>& k) {
  return detail::normalize_rows<Scalar>(k.k);
}

/// Alternating-diffusion fusion M = Mv * Mw.
template <typename Scalar>
MarkovMatrix<Scalar> fuse_alternating(const MarkovMatrix<Scalar>& mv, const MarkovMatrix<Scalar>& mw) {
  detail::check_same_size(mv, mw);
  return MarkovMatrix<Scalar>{mv.m * mw.m};
}

/// Entrywise product, rows renormalized to sum to one.
template <typename Scalar>
MarkovMatrix<Scalar> fuse_hadamard(const MarkovMatrix<Scalar>& mv, const MarkovMatrix<Scalar>& mw) {
  detail::check_same_size(mv, mw);
  return detail::normalize_rows<Scalar>(mv.m.cwiseProduct(mw.m));
}

/// (Mv + Mw) / 2.
template <typename Scalar>
MarkovMatrix<Scalar> fuse_sum(const MarkovMatrix<Scalar>& mv, const MarkovMatrix<Scalar>& mw) {
  detail::check_same_size(mv, mw);
  return MarkovMatrix<Scalar>{(mv.m + mw.m) / Scalar(2)};
}

/// Largest deviation of a row sum from one, or infinity if any entry is negative or non-finite.
template <typename Derived>
double stochastic_defect(const Eigen::MatrixBase<Derived>& m) {
  if (!m.allFinite() || (m.array() < 0).any()) return std::numeric_limits<double>::infinity();
  return static_cast<double>((m.rowwise().sum().array() - 1).abs().maxCoeff());
}

template <typename Scalar>
bool is_row_stochastic(const MarkovMatrix<Scalar>& m, double tol = kStochasticTolerance) {
  return m.size() > 0 && stochastic_defect(m.m) <= tol;
}

namespace detail {

// Flip so the entry of largest magnitude is positive; makes results reproducible.
template <typename Scalar>
void canonical_sign(Vector<Scalar>& v) {
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  if (v(i) < 0) v = -v;
}

template <typename Scalar>
SpectralResult<Scalar> symmetrized_eigenvector(const Matrix<Scalar>& m) {
  const Eigen::Index n = m.rows();
  const Matrix<Scalar> s = m * m.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(s);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition of M*M^T failed");
  // Eigenvalues come out ascending.
  SpectralResult<Scalar> out;
  out.eigenvalue = es.eigenvalues()(n - 2);
  out.vector = es.eigenvectors().col(n - 2).normalized();
  canonical_sign(out.vector);
  out.residual = (s * out.vector - out.eigenvalue * out.vector).norm();
  out.method = EigenMethod::symmetrized;
  return out;
}

// Inverse iteration at a known real eigenvalue. When the eigenvalue coincides
// with the trivial one, the constant direction is projected out so the
// iterate stays in the same eigenspace but away from the all-ones vector.
template <typename Scalar>
bool inverse_iteration(const Matrix<Scalar>& m, Scalar lambda, bool project_ones, Scalar tol,
                       Vector<Scalar>& v, Scalar& residual) {
  const Eigen::Index n = m.rows();
  const Scalar shift = lambda + Scalar(1e-10) * std::max<Scalar>(Scalar(1), std::abs(lambda));
  Matrix<Scalar> a = m;
  a.diagonal().array() -= shift;
  const Eigen::PartialPivLU<Matrix<Scalar>> lu(a);
  v = Vector<Scalar>::LinSpaced(n, Scalar(-1), Scalar(1));
  v += Vector<Scalar>::Ones(n) * Scalar(0.25);
  v.normalize();
  for (int iter = 0; iter < 30; ++iter) {
    v = lu.solve(v);
    if (project_ones) v.array() -= v.mean();
    const Scalar norm = v.norm();
    if (!(norm > 0) || !std::isfinite(norm)) return false;
    v /= norm;
    residual = (m * v - lambda * v).norm();
    if (residual < tol) return true;
  }
  return false;
}

// Eigenvalues from the dense real Schur form, vector by inverse iteration.
template <typename Scalar, typename Fallback>
SpectralResult<Scalar> dense_leading_nontrivial(const Matrix<Scalar>& m, Scalar tol, Fallback complex_fallback) {
  const Eigen::Index n = m.rows();
  Eigen::EigenSolver<Matrix<Scalar>> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigenvalue computation did not converge");
  const auto& values = es.eigenvalues();

  Eigen::Index trivial = 0;
  (values.array() - std::complex<Scalar>(1, 0)).abs().minCoeff(&trivial);
  Eigen::Index second = -1;
  Scalar best = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == trivial) continue;
    if (std::abs(values(i)) > best) {
      best = std::abs(values(i));
      second = i;
    }
  }
  const std::complex<Scalar> lambda = values(second);
  const Scalar imag_tol = Scalar(1e-10) * std::max<Scalar>(Scalar(1), std::abs(lambda));
  if (std::abs(lambda.imag()) > imag_tol) return complex_fallback();

  const bool on_trivial = std::abs(lambda.real() - values(trivial).real()) < Scalar(1e-9);
  SpectralResult<Scalar> out;
  out.eigenvalue = lambda.real();
  out.method = EigenMethod::direct;
  Vector<Scalar> v;
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  // A tighter target than the contract so the vector is not just barely inside it.
  if (!inverse_iteration(m, out.eigenvalue, on_trivial, tol * Scalar(1e-3), v, residual) &&
      residual >= tol) {
    Eigen::EigenSolver<Matrix<Scalar>> full(m, /*computeEigenvectors=*/true);
    if (full.info() != Eigen::Success) throw NumericalError("dense eigenvector computation failed");
    Eigen::Index pick = 0;
    (full.eigenvalues().array() - lambda).abs().minCoeff(&pick);
    v = full.eigenvectors().col(pick).real();
    if (on_trivial) v.array() -= v.mean();
    v.normalize();
    residual = (m * v - out.eigenvalue * v).norm();
    if (!(residual < tol)) {
      throw NumericalError("eigenvector residual " + std::to_string(static_cast<double>(residual)) +
                           " exceeds tolerance " + std::to_string(static_cast<double>(tol)));
    }
  }
  canonical_sign(v);
  out.vector = std::move(v);
  out.residual = residual;
  return out;
}

// True when the directed graph of nonzero entries is strongly connected,
// i.e. the matrix is irreducible and lambda = 1 is a simple eigenvalue.
template <typename Scalar>
bool irreducible(const Matrix<Scalar>& m) {
  const Eigen::Index n = m.rows();
  for (bool transpose : {false, true}) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index reached = 1;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar entry = transpose ? m(j, i) : m(i, j);
        if (entry > 0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          ++reached;
          stack.push_back(j);
        }
      }
    }
    if (reached != n) return false;
  }
  return true;
}

template <typename Scalar>
struct KrylovPair {
  std::complex<Scalar> eigenvalue;
  Vector<Scalar> vector;  // empty for a complex eigenvalue
  Scalar residual{0};
};

// Second-largest-magnitude eigenpair by Arnoldi with full
// reorthogonalisation. The basis grows until every Ritz value at least as
// large as the wanted one has converged; no restarts. Returns nothing if
// that does not happen within max_dim vectors or if lambda_2 sits on 1.
template <typename Scalar>
std::optional<KrylovPair<Scalar>> arnoldi_second(const Matrix<Scalar>& m, Scalar tol, Eigen::Index max_dim) {
  using Complex = std::complex<Scalar>;
  const Eigen::Index n = m.rows();
  max_dim = std::min(max_dim, n);
  Matrix<Scalar> basis(n, max_dim + 1);
  Matrix<Scalar> h = Matrix<Scalar>::Zero(max_dim + 1, max_dim);

  Rng rng(0x6b65726e656cULL);
  for (Eigen::Index i = 0; i < n; ++i) basis(i, 0) = static_cast<Scalar>(rng.normal());
  basis.col(0).normalize();

  const Scalar ritz_tol = tol * Scalar(1e-3);
  Eigen::Index next_check = 20;
  for (Eigen::Index j = 0; j < max_dim; ++j) {
    Vector<Scalar> w = m * basis.col(j);
    const auto q = basis.leftCols(j + 1);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector<Scalar> c = q.transpose() * w;
      w.noalias() -= q * c;
      h.col(j).head(j + 1) += c;
    }
    const Scalar beta = w.norm();
    h(j + 1, j) = beta;
    const Eigen::Index k = j + 1;
    const bool breakdown = beta <= std::numeric_limits<Scalar>::epsilon() * Scalar(n);
    if (!breakdown) basis.col(j + 1) = w / beta;
    if (!(breakdown || k == max_dim || k == next_check)) continue;
    next_check = k + std::max<Eigen::Index>(10, k / 2);
    if (k < 2) return std::nullopt;

    Eigen::EigenSolver<Matrix<Scalar>> es(h.topLeftCorner(k, k));
    if (es.info() != Eigen::Success) return std::nullopt;
    const auto theta = es.eigenvalues();
    const auto y = es.eigenvectors();
    const Scalar b = breakdown ? Scalar(0) : beta;
    Eigen::Index trivial = 0;
    (theta.array() - Complex(1, 0)).abs().minCoeff(&trivial);
    Eigen::Index second = -1;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (i != trivial && (second < 0 || std::abs(theta(i)) > std::abs(theta(second)))) second = i;
    }
    const auto ritz_residual = [&](Eigen::Index i) { return b * std::abs(y(k - 1, i)) / y.col(i).norm(); };
    bool converged = ritz_residual(trivial) < ritz_tol && ritz_residual(second) < ritz_tol;
    for (Eigen::Index i = 0; i < k && converged; ++i) {
      if (std::abs(theta(i)) >= std::abs(theta(second)) && ritz_residual(i) >= ritz_tol) converged = false;
    }
    if (!converged) {
      if (breakdown) return std::nullopt;
      continue;
    }
    if (std::abs(theta(trivial) - Complex(1, 0)) > Scalar(1e-8)) return std::nullopt;

    KrylovPair<Scalar> out;
    out.eigenvalue = theta(second);
    const Complex lambda = theta(second);
    if (std::abs(lambda.imag()) > Scalar(1e-10) * std::max<Scalar>(Scalar(1), std::abs(lambda))) return out;
    if (std::abs(lambda.real() - Scalar(1)) < Scalar(1e-9)) return std::nullopt;
    // Rotate the Ritz vector so its largest entry is real before dropping the imaginary part.
    Eigen::Matrix<Complex, Eigen::Dynamic, 1> yc = y.col(second);
    Eigen::Index big = 0;
    yc.cwiseAbs().maxCoeff(&big);
    yc *= std::conj(yc(big)) / std::abs(yc(big));
    out.vector = (basis.leftCols(k) * yc.real()).normalized();
    out.residual = (m * out.vector - lambda.real() * out.vector).norm();
    if (!(out.residual < tol)) return std::nullopt;
    return out;
  }
  return std::nullopt;
}

// Below this size the dense decomposition is cheap enough to use directly.
inline constexpr Eigen::Index kKrylovMinSize = 128;
inline constexpr Eigen::Index kKrylovMaxDim = 300;

}  // namespace detail

/// Eigenvector of the second-largest-magnitude eigenvalue of a Markov matrix
/// (the trivial lambda = 1 pair excluded).
///
/// The direct route runs Arnoldi on M when M is irreducible and large enough
/// to make that worthwhile. Otherwise, or if Arnoldi does not settle, all
/// eigenvalues come from a dense real Schur decomposition and the vector from
/// inverse iteration, falling back to the full eigenvector matrix. A complex
/// second eigenvalue switches to the second eigenvector of M * M^T.
template <typename Scalar>
SpectralResult<Scalar> leading_nontrivial_eigenvector(const MarkovMatrix<Scalar>& mk,
                                                      EigenMethod method = EigenMethod::direct) {
  const Matrix<Scalar>& m = mk.m;
  const Eigen::Index n = m.rows();
  if (n < 2 || m.cols() != n) throw DataError("eigendecomposition needs a square matrix with N >= 2");
  if (method == EigenMethod::symmetrized) return detail::symmetrized_eigenvector(m);

  const Scalar tol = Scalar(1e-8) * static_cast<Scalar>(n);
  const auto complex_fallback = [&] {
    auto out = detail::symmetrized_eigenvector(m);
    out.complex_fallback = true;
    return out;
  };

  if (n >= detail::kKrylovMinSize && detail::irreducible(m)) {
    if (auto pair = detail::arnoldi_second(m, tol, detail::kKrylovMaxDim)) {
      if (pair->vector.size() == 0) return complex_fallback();
      SpectralResult<Scalar> out;
      out.eigenvalue = pair->eigenvalue.real();
      out.vector = std::move(pair->vector);
      out.residual = pair->residual;
      out.method = EigenMethod::direct;
      detail::canonical_sign(out.vector);
      return out;
    }
  }
  return detail::dense_leading_nontrivial(m, tol, complex_fallback);
}

}  // namespace kernelfuse

#endif  // KERNELFUSE_KERNEL_GRAPH_HPP

#pragma once

#include "xxz/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace xxz {

// Full spectrum of a dense real symmetric matrix.
// energies ascending; vectors column k is the eigenvector of energies[k].
template <typename Scalar>
struct EigenDecomposition {
  VectorX<Scalar> energies;
  MatrixX<Scalar> vectors;
  Index dim() const { return energies.size(); }
};

enum class VerifyMode { off, sample, full };

struct SolverOptions {
  double residual_tol = 1e-8;  // per-column residual bound, relative to ||H||_F
  double ortho_tol = 1e-10;    // max-norm bound on V^T V - I
  VerifyMode verify = VerifyMode::full;
  Index sample_size = 48;      // columns checked in sample mode
};

namespace detail {

template <typename Scalar>
void verify_decomposition(const MatrixX<Scalar>& h, const EigenDecomposition<Scalar>& d,
                          const SolverOptions& options) {
  const Index dim = d.dim();
  const Scalar scale = h.norm();  // Frobenius
  if (options.verify == VerifyMode::full) {
    const Scalar ortho =
        (d.vectors.transpose() * d.vectors - MatrixX<Scalar>::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (ortho > options.ortho_tol)
      throw EigensolverError("eigenvectors not orthonormal to tolerance", dim);
    const MatrixX<Scalar> r = h * d.vectors - d.vectors * d.energies.asDiagonal();
    if (r.colwise().norm().maxCoeff() > options.residual_tol * scale)
      throw EigensolverError("eigenpair residual exceeds tolerance", dim);
  } else if (options.verify == VerifyMode::sample) {
    const Index n_sample = std::min(options.sample_size, dim);
    std::vector<Index> cols(static_cast<std::size_t>(n_sample));
    for (Index i = 0; i < n_sample; ++i)
      cols[static_cast<std::size_t>(i)] = (n_sample == 1) ? 0 : i * (dim - 1) / (n_sample - 1);
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    MatrixX<Scalar> sub(dim, static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const Index k = cols[i];
      const auto v = d.vectors.col(k);
      if ((h * v - d.energies[k] * v).norm() > options.residual_tol * scale)
        throw EigensolverError("eigenpair residual exceeds tolerance", dim);
      sub.col(static_cast<Index>(i)) = v;
    }
    const Index ns = sub.cols();
    const Scalar ortho = (sub.transpose() * sub - MatrixX<Scalar>::Identity(ns, ns)).cwiseAbs().maxCoeff();
    if (ortho > options.ortho_tol)
      throw EigensolverError("sampled eigenvectors not orthonormal to tolerance", dim);
  }
}

}  // namespace detail

// Householder tridiagonalization + implicitly shifted QL with accumulated
// transformations, as provided by Eigen's SelfAdjointEigenSolver. Deterministic
// for a fixed input. Throws EigensolverError on non-convergence or when the
// requested verification fails.
template <typename Scalar>
EigenDecomposition<Scalar> diagonalize(const MatrixX<Scalar>& hamiltonian,
                                       const SolverOptions& options = {}) {
  const Index dim = hamiltonian.rows();
  if (dim < 1 || hamiltonian.cols() != dim)
    throw std::invalid_argument("diagonalize: matrix must be square and non-empty");
  if ((hamiltonian - hamiltonian.transpose()).cwiseAbs().maxCoeff() != Scalar(0))
    throw std::invalid_argument("diagonalize: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(hamiltonian);
  if (solver.info() != Eigen::Success)
    throw EigensolverError("eigensolver failed to converge", dim);

  EigenDecomposition<Scalar> d{solver.eigenvalues(), solver.eigenvectors()};
  detail::verify_decomposition(hamiltonian, d, options);
  return d;
}

// M_nm = sum_a V_an d_a V_am: a product-basis-diagonal observable expressed in
// the eigenbasis. Symmetric up to rounding.
template <typename Scalar>
MatrixX<Scalar> rotate_diagonal_observable(const EigenDecomposition<Scalar>& decomposition,
                                           const VectorX<Scalar>& diagonal) {
  if (diagonal.size() != decomposition.dim())
    throw std::invalid_argument("rotate_diagonal_observable: diagonal length mismatch");
  return decomposition.vectors.transpose() * (diagonal.asDiagonal() * decomposition.vectors);
}

}  // namespace xxz

#pragma once

#include "xxz/basis.hpp"
#include "xxz/core.hpp"
#include "xxz/disorder.hpp"

#include <stdexcept>

namespace xxz {

struct CouplingParams {
  double disorder = 1.0;    // W > 0; local fields set the energy unit
  double anisotropy = 1.1;  // Delta
  int length = 0;
  bool periodic = true;
};

// Dense sector Hamiltonian: diagonal (Delta/W) sum_j s_j s_{j+1} + sum_j h_j s_j,
// off-diagonal 1/(2W) between configurations differing by one adjacent exchange.
// Assembled row by row, so symmetry is bit-exact.
template <typename Scalar = double>
MatrixX<Scalar> build_hamiltonian(const CouplingParams& params, const DisorderRealization& realization,
                                  const SectorBasis& basis) {
  const int length = params.length;
  if (!(params.disorder > 0)) throw std::invalid_argument("build_hamiltonian: disorder strength must be positive");
  if (basis.length() != length || static_cast<int>(realization.fields.size()) != length)
    throw std::invalid_argument("build_hamiltonian: length mismatch between params, fields and basis");

  const Index dim = basis.size();
  const Scalar hop = Scalar(1) / Scalar(2 * params.disorder);
  const Scalar ising = Scalar(params.anisotropy / params.disorder);
  const int n_bonds = params.periodic ? length : length - 1;

  MatrixX<Scalar> h = MatrixX<Scalar>::Zero(dim, dim);
  for (Index a = 0; a < dim; ++a) {
    const std::uint32_t bits = basis.bits(a);
    Scalar diag = 0;
    for (int j = 0; j < n_bonds; ++j) {
      const int j2 = (j + 1) % length;
      const bool up_j = (bits >> j) & 1u;
      const bool up_j2 = (bits >> j2) & 1u;
      if (up_j == up_j2) {
        diag += ising * Scalar(0.25);
      } else {
        diag -= ising * Scalar(0.25);
        const std::uint32_t flipped = bits ^ ((std::uint32_t{1} << j) | (std::uint32_t{1} << j2));
        h(a, basis.index_of({flipped, length})) += hop;
      }
    }
    for (int j = 0; j < length; ++j)
      diag += Scalar(realization.fields[static_cast<std::size_t>(j)]) *
              (((bits >> j) & 1u) ? Scalar(0.5) : Scalar(-0.5));
    h(a, a) += diag;
  }
  return h;
}

// The probe operator S^z_site is diagonal in the product basis.
template <typename Scalar = double>
VectorX<Scalar> sz_diagonal(const SectorBasis& basis, int site) {
  if (site < 0 || site >= basis.length()) throw std::invalid_argument("sz_diagonal: site out of range");
  VectorX<Scalar> d(basis.size());
  for (Index k = 0; k < basis.size(); ++k)
    d[k] = ((basis.bits(k) >> site) & 1u) ? Scalar(0.5) : Scalar(-0.5);
  return d;
}

}  // namespace xxz

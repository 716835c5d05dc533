#include "xxz/spectrum.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include "xxz/basis.hpp"
#include "xxz/disorder.hpp"
#include "xxz/model.hpp"

#include <algorithm>
#include <cstring>
#include <random>

using namespace xxz;

namespace {

Matrix random_symmetric(Index dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) a(i, j) = gauss(rng);
  return 0.5 * (a + a.transpose()).eval();
}

}  // namespace

TEST_CASE("one-dimensional input") {
  Matrix h(1, 1);
  h << 3.0;
  const auto d = diagonalize(h);
  CHECK(d.energies[0] == 3.0);
  CHECK(std::abs(d.vectors(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("diagonal input sorts and permutes") {
  Vector diag(4);
  diag << 2.0, -1.0, 0.5, 7.0;
  const Matrix h = diag.asDiagonal();
  const auto d = diagonalize(h);
  Vector sorted = diag;
  std::sort(sorted.data(), sorted.data() + 4);
  for (Index k = 0; k < 4; ++k) {
    CHECK(d.energies[k] == doctest::Approx(sorted[k]).epsilon(1e-15));
    Index hits = 0;
    for (Index a = 0; a < 4; ++a)
      if (std::abs(d.vectors(a, k)) > 0.5) ++hits;
    CHECK(hits == 1);  // permutation of identity columns
  }
}

TEST_CASE("two-by-two closed form") {
  const double a = 0.3, b = -1.2, c = 0.45;
  Matrix h(2, 2);
  h << a, c, c, b;
  const auto d = diagonalize(h);
  const auto [lo, hi] = oracle::two_by_two_eigenvalues(a, b, c);
  CHECK(d.energies[0] == doctest::Approx(lo).epsilon(1e-14));
  CHECK(d.energies[1] == doctest::Approx(hi).epsilon(1e-14));
}

TEST_CASE("input validation") {
  Matrix h(2, 3);
  CHECK_THROWS_AS(diagonalize(h), std::invalid_argument);
  Matrix asym(2, 2);
  asym << 0, 1, 0, 0;
  CHECK_THROWS_AS(diagonalize(asym), std::invalid_argument);
  CHECK_THROWS_AS(diagonalize(Matrix{}), std::invalid_argument);
}

TEST_CASE("contract invariants on a random matrix") {
  const Matrix h = random_symmetric(200, 7);
  const auto d = diagonalize(h);  // full verification runs inside
  for (Index k = 1; k < 200; ++k) CHECK(d.energies[k] >= d.energies[k - 1]);
  CHECK((d.vectors.transpose() * d.vectors - Matrix::Identity(200, 200)).cwiseAbs().maxCoeff() <=
        1e-10);
  const Matrix r = h * d.vectors - d.vectors * d.energies.asDiagonal();
  CHECK(r.colwise().norm().maxCoeff() <= 1e-8 * h.norm());
  CHECK(std::abs(d.energies.sum() - h.trace()) <= 1e-8 * h.norm());
}

TEST_CASE("spectrum invariant under basis permutation") {
  const Matrix h = random_symmetric(60, 11);
  std::vector<int> perm(60);
  for (int i = 0; i < 60; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  Matrix p = Matrix::Zero(60, 60);
  for (int i = 0; i < 60; ++i) p(perm[i], i) = 1.0;
  const Matrix h2 = p.transpose() * h * p;
  const Matrix h2_sym = 0.5 * (h2 + h2.transpose());  // exact symmetry after the similarity
  const auto d1 = diagonalize(h);
  const auto d2 = diagonalize(h2_sym);
  for (Index k = 0; k < 60; ++k)
    CHECK(std::abs(d1.energies[k] - d2.energies[k]) <= 1e-10 * h.norm());
}

TEST_CASE("deterministic output for identical input") {
  const Matrix h = random_symmetric(80, 3);
  const auto a = diagonalize(h);
  const auto b = diagonalize(h);
  CHECK(std::memcmp(a.energies.data(), b.energies.data(), sizeof(double) * 80) == 0);
  CHECK(std::memcmp(a.vectors.data(), b.vectors.data(), sizeof(double) * 80 * 80) == 0);
}

TEST_CASE("verification catches impossible tolerances") {
  const Matrix h = random_symmetric(40, 9);
  SolverOptions opts;
  opts.residual_tol = 1e-300;
  CHECK_THROWS_AS(diagonalize(h, opts), EigensolverError);
  SolverOptions sample_opts;
  sample_opts.verify = VerifyMode::sample;
  sample_opts.residual_tol = 1e-300;
  CHECK_THROWS_AS(diagonalize(h, sample_opts), EigensolverError);
  SolverOptions off;
  off.verify = VerifyMode::off;
  off.residual_tol = 1e-300;
  CHECK_NOTHROW(diagonalize(h, off));
}

TEST_CASE("rotated observable: identity rotation and trace invariance") {
  Vector diag(3);
  diag << 0.5, -0.5, 0.5;
  EigenDecomposition<double> identity{Vector::Zero(3), Matrix::Identity(3, 3)};
  const Matrix m = rotate_diagonal_observable(identity, diag);
  CHECK((m - Matrix(diag.asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

  const Matrix h = random_symmetric(120, 13);
  const auto d = diagonalize(h);
  Vector pm(120);
  for (Index i = 0; i < 120; ++i) pm[i] = (i % 2 == 0) ? 0.5 : -0.5;
  const Matrix rotated = rotate_diagonal_observable(d, pm);
  CHECK(std::abs(rotated.trace() - pm.sum()) <= 1e-10);
  CHECK((rotated - rotated.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  Vector wrong(3);
  CHECK_THROWS_AS(rotate_diagonal_observable(d, wrong), std::invalid_argument);
}

TEST_CASE("spin observable carries exactly 1/4 weight per row") {
  const SectorBasis basis(8, 0);
  const Matrix h = build_hamiltonian({1.2, 1.1, 8, true}, sample_disorder(31, 8), basis);
  const auto d = diagonalize(h);
  const Matrix m = rotate_diagonal_observable(d, sz_diagonal(basis, 0));
  for (Index n = 0; n < basis.size(); ++n) {
    long double row = 0;
    for (Index k = 0; k < basis.size(); ++k) row += m(n, k) * m(n, k);
    CHECK(std::abs(static_cast<double>(row) - 0.25) <= 1e-10);
  }
}

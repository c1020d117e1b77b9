#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "weaksim/algebra.hpp"

// Shared helpers for the unit and acceptance suites: small fixed operators,
// seeded random states/operators, and complex comparisons.

namespace wstest {

using weaksim::Cplx;
using weaksim::Ket;
using weaksim::Op;

inline Op pauli_x() {
  return Op(2, {Cplx(0, 0), Cplx(1, 0), Cplx(1, 0), Cplx(0, 0)});
}

inline Op pauli_y() {
  return Op(2, {Cplx(0, 0), Cplx(0, -1), Cplx(0, 1), Cplx(0, 0)});
}

inline Op pauli_z() {
  return Op(2, {Cplx(1, 0), Cplx(0, 0), Cplx(0, 0), Cplx(-1, 0)});
}

// (1, 1)/sqrt(2): the +1 eigenstate of sigma_x.
inline Ket plus_x() {
  const double r = 1.0 / std::sqrt(2.0);
  return Ket({Cplx(r, 0), Cplx(r, 0)});
}

// (1, -1)/sqrt(2).
inline Ket minus_x() {
  const double r = 1.0 / std::sqrt(2.0);
  return Ket({Cplx(r, 0), Cplx(-r, 0)});
}

inline Ket random_ket(int dim, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Cplx> amps(static_cast<size_t>(dim));
  for (Cplx& a : amps) a = Cplx(gauss(rng), gauss(rng));
  return Ket(std::move(amps)).normalized();
}

inline Op random_hermitian(int dim, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Cplx> e(static_cast<size_t>(dim) * dim);
  for (int r = 0; r < dim; ++r) {
    e[static_cast<size_t>(r) * dim + r] = Cplx(gauss(rng), 0.0);
    for (int c = r + 1; c < dim; ++c) {
      const Cplx v(gauss(rng), gauss(rng));
      e[static_cast<size_t>(r) * dim + c] = v;
      e[static_cast<size_t>(c) * dim + r] = std::conj(v);
    }
  }
  return Op(dim, std::move(e));
}

// Gram-Schmidt on random complex vectors.
inline std::vector<Ket> random_orthonormal_basis(int dim, std::mt19937& rng) {
  std::vector<Ket> basis;
  basis.reserve(static_cast<size_t>(dim));
  while (static_cast<int>(basis.size()) < dim) {
    Ket v = random_ket(dim, rng);
    std::vector<Cplx> amps = v.amps();
    for (const Ket& b : basis) {
      const Cplx ov = weaksim::inner(b, v);
      for (int i = 0; i < dim; ++i) amps[static_cast<size_t>(i)] -= ov * b[i];
    }
    Ket reduced{amps};
    if (reduced.norm() < 1e-6) continue;  // retry near-dependent draws
    basis.push_back(reduced.normalized());
  }
  return basis;
}

inline bool approx_cplx(const Cplx& a, const Cplx& b, double tol) {
  return std::abs(a - b) <= tol;
}

}  // namespace wstest

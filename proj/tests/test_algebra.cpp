#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "weaksim/algebra.hpp"

using namespace weaksim;
using wstest::approx_cplx;

TEST_CASE("inner products on basis and superposition states", "[algebra]") {
  const Ket e0 = Ket::basis(2, 0);
  const Ket e1 = Ket::basis(2, 1);
  CHECK(approx_cplx(inner(e0, e0), Cplx(1, 0), 1e-15));
  CHECK(approx_cplx(inner(e0, e1), Cplx(0, 0), 1e-15));
  // <(1,1)/sqrt2 | (1,0)> = 1/sqrt2
  CHECK(approx_cplx(inner(wstest::plus_x(), e0), Cplx(1.0 / std::sqrt(2.0), 0),
                    1e-15));
}

TEST_CASE("inner is conjugate-symmetric and reproduces the norm", "[algebra]") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 8);
    const Ket a = wstest::random_ket(dim, rng);
    const Ket b = wstest::random_ket(dim, rng);
    CHECK(std::abs(inner(a, b) - std::conj(inner(b, a))) < 1e-14);
    CHECK(std::abs(inner(a, a).real() - a.norm_squared()) < 1e-12);
    CHECK(std::abs(inner(a, a).imag()) < 1e-14);
  }
}

TEST_CASE("inner rejects dimension mismatch", "[algebra][errors]") {
  CHECK_THROWS_AS(inner(Ket::basis(2, 0), Ket::basis(3, 0)), ContractViolation);
}

TEST_CASE("apply: identity, sigma_z, projector action", "[algebra]") {
  const Ket v({Cplx(0.3, 0.1), Cplx(-0.2, 0.7)});
  const Ket iv = apply(Op::identity(2), v);
  CHECK(approx_cplx(iv[0], v[0], 1e-15));
  CHECK(approx_cplx(iv[1], v[1], 1e-15));

  // sigma_z (1,1)/sqrt2 = (1,-1)/sqrt2: the S|in> of the derailment demo.
  const Ket flipped = apply(wstest::pauli_z(), wstest::plus_x());
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(approx_cplx(flipped[0], Cplx(r, 0), 1e-15));
  CHECK(approx_cplx(flipped[1], Cplx(-r, 0), 1e-15));

  const Op pi0 = projector_onto(Ket::basis(2, 0));
  const Ket projected = apply(pi0, v);
  CHECK(approx_cplx(projected[0], v[0], 1e-15));
  CHECK(approx_cplx(projected[1], Cplx(0, 0), 1e-15));
}

TEST_CASE("apply is linear", "[algebra][property]") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 5);
    const Op m = wstest::random_hermitian(dim, rng);
    const Ket a = wstest::random_ket(dim, rng);
    const Ket b = wstest::random_ket(dim, rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Cplx alpha(gauss(rng), gauss(rng));
    const Cplx beta(gauss(rng), gauss(rng));
    const Ket lhs = apply(m, alpha * a + beta * b);
    const Ket rhs = alpha * apply(m, a) + beta * apply(m, b);
    CHECK((lhs - rhs).norm() < 1e-12);
  }
}

TEST_CASE("tensor products follow the system-major convention", "[algebra]") {
  const JointKet basis00 = tensor_ket(Ket::basis(2, 0), Ket::basis(2, 0));
  CHECK(approx_cplx(basis00.at(0, 0), Cplx(1, 0), 1e-15));
  CHECK(approx_cplx(basis00.at(0, 1), Cplx(0, 0), 1e-15));
  CHECK(approx_cplx(basis00.at(1, 0), Cplx(0, 0), 1e-15));
  CHECK(approx_cplx(basis00.at(1, 1), Cplx(0, 0), 1e-15));

  CHECK(max_abs_diff(tensor_op(Op::identity(2), Op::identity(2)),
                     Op::identity(4)) == 0.0);

  // (1,1)/sqrt2 (x) (0,1) = (0, 1/sqrt2, 0, 1/sqrt2)
  const JointKet jk = tensor_ket(wstest::plus_x(), Ket::basis(2, 1));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(approx_cplx(jk.amps()[0], Cplx(0, 0), 1e-15));
  CHECK(approx_cplx(jk.amps()[1], Cplx(r, 0), 1e-15));
  CHECK(approx_cplx(jk.amps()[2], Cplx(0, 0), 1e-15));
  CHECK(approx_cplx(jk.amps()[3], Cplx(r, 0), 1e-15));
}

TEST_CASE("tensor round trip recovers both factors", "[algebra][property]") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int ds = 2 + static_cast<int>(rng() % 4);
    const int dm = 2 + static_cast<int>(rng() % 6);
    const Ket s = wstest::random_ket(ds, rng);
    const Ket m = wstest::random_ket(dm, rng);
    const JointKet joint = tensor_ket(s, m);
    const auto [s2, m2] = joint.split_product();
    CHECK(fidelity(s, s2) >= 1.0 - 1e-12);
    CHECK(fidelity(m, m2) >= 1.0 - 1e-12);
    CHECK(fidelity(tensor_ket(s2, m2).as_ket(), joint.as_ket()) >=
          1.0 - 1e-12);
  }
}

TEST_CASE("projector_onto builds verified projectors", "[algebra]") {
  const Op p0 = projector_onto(Ket({Cplx(1, 0), Cplx(0, 0)}));
  CHECK(approx_cplx(p0.at(0, 0), Cplx(1, 0), 1e-15));
  CHECK(approx_cplx(p0.at(1, 1), Cplx(0, 0), 1e-15));

  // Unnormalized input is normalized first: |(1,1)> -> [[.5,.5],[.5,.5]]
  const Op pp = projector_onto(Ket({Cplx(1, 0), Cplx(1, 0)}));
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      CHECK(approx_cplx(pp.at(r, c), Cplx(0.5, 0), 1e-15));
    }
  }
  CHECK(pp.is_projector());

  CHECK_THROWS_AS(projector_onto(Ket({Cplx(0, 0), Cplx(0, 0)})),
                  DegenerateState);
}

TEST_CASE("projector_onto satisfies projector laws on random states",
          "[algebra][property]") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 6);
    const Op pi = projector_onto(wstest::random_ket(dim, rng));
    CHECK(max_abs_diff(matmul(pi, pi), pi) < 1e-12);
    CHECK(max_abs_diff(adjoint(pi), pi) < 1e-12);
    CHECK(pi.projector_flag() == TriFlag::kTrue);
  }
}

TEST_CASE("structural flags are verified tri-state", "[algebra]") {
  const Op sx = wstest::pauli_x();
  CHECK(sx.hermitian_flag() == TriFlag::kTrue);
  CHECK(sx.unitary_flag() == TriFlag::kTrue);
  CHECK(sx.projector_flag() == TriFlag::kFalse);

  const Op raw = Op::unchecked(2, {Cplx(0, 0), Cplx(1, 0), Cplx(1, 0), Cplx(0, 0)});
  CHECK(raw.hermitian_flag() == TriFlag::kUnchecked);
  CHECK(raw.verified().hermitian_flag() == TriFlag::kTrue);

  const Op skew = Op(2, {Cplx(0, 0), Cplx(1, 0), Cplx(-1, 0), Cplx(0, 0)});
  CHECK(skew.hermitian_flag() == TriFlag::kFalse);
}

TEST_CASE("kets reject non-finite amplitudes", "[algebra][errors]") {
  CHECK_THROWS_AS(Ket({Cplx(std::nan(""), 0)}), ContractViolation);
  CHECK_THROWS_AS(Ket({Cplx(0, std::numeric_limits<double>::infinity())}),
                  ContractViolation);
  CHECK_THROWS_AS(Ket(std::vector<Cplx>{}), ContractViolation);
}

TEST_CASE("eigensystem of sigma_z and projectors", "[algebra]") {
  const Eigensystem ez = hermitian_eigensystem(wstest::pauli_z());
  REQUIRE(ez.eigenvalues.size() == 2);
  CHECK(ez.eigenvalues[0] == Catch::Approx(-1.0).margin(1e-12));
  CHECK(ez.eigenvalues[1] == Catch::Approx(1.0).margin(1e-12));
  CHECK(fidelity(ez.eigenvectors[0], Ket::basis(2, 1)) >= 1.0 - 1e-12);
  CHECK(fidelity(ez.eigenvectors[1], Ket::basis(2, 0)) >= 1.0 - 1e-12);

  std::mt19937 rng(23);
  const Op pi = projector_onto(wstest::random_ket(5, rng));
  for (double lambda : hermitian_eigensystem(pi).eigenvalues) {
    CHECK((std::abs(lambda) < 1e-10 || std::abs(lambda - 1.0) < 1e-10));
  }
}

TEST_CASE("eigensystem of sigma_x", "[algebra]") {
  const Eigensystem ex = hermitian_eigensystem(wstest::pauli_x());
  CHECK(ex.eigenvalues[0] == Catch::Approx(-1.0).margin(1e-12));
  CHECK(ex.eigenvalues[1] == Catch::Approx(1.0).margin(1e-12));
  CHECK(fidelity(ex.eigenvectors[0], wstest::minus_x()) >= 1.0 - 1e-12);
  CHECK(fidelity(ex.eigenvectors[1], wstest::plus_x()) >= 1.0 - 1e-12);
}

TEST_CASE("eigensystem reconstructs random Hermitian matrices",
          "[algebra][property]") {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 16);
    const Op m = wstest::random_hermitian(dim, rng);
    const Eigensystem es = hermitian_eigensystem(m);

    Op rebuilt = Op::zero(dim);
    for (int k = 0; k < dim; ++k) {
      rebuilt = rebuilt + Cplx(es.eigenvalues[static_cast<size_t>(k)], 0.0) *
                              projector_onto(es.eigenvectors[static_cast<size_t>(k)]);
    }
    CHECK(max_abs_diff(rebuilt, m) < 1e-10);

    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        const Cplx ov = inner(es.eigenvectors[static_cast<size_t>(i)],
                              es.eigenvectors[static_cast<size_t>(j)]);
        CHECK(std::abs(ov - (i == j ? Cplx(1, 0) : Cplx(0, 0))) < 1e-10);
      }
    }
  }
}

TEST_CASE("eigensystem requires a verified hermitian flag", "[algebra][errors]") {
  const Op skew = Op(2, {Cplx(0, 0), Cplx(1, 0), Cplx(-1, 0), Cplx(0, 0)});
  CHECK_THROWS_AS(hermitian_eigensystem(skew), ContractViolation);
  const Op raw = Op::unchecked(2, {Cplx(1, 0), Cplx(0, 0), Cplx(0, 0), Cplx(1, 0)});
  CHECK_THROWS_AS(hermitian_eigensystem(raw), ContractViolation);
}

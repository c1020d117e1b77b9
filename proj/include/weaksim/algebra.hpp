#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "weaksim/constants.hpp"
#include "weaksim/errors.hpp"

namespace weaksim {

using Cplx = std::complex<double>;

// Structural flags on operators are tri-state: a flag is only kTrue or kFalse
// after the corresponding check actually ran.
enum class TriFlag { kUnchecked, kTrue, kFalse };

/// Finite-dimensional complex state vector. Amplitudes are validated to be
/// finite at construction and never mutated afterwards.
class Ket {
 public:
  explicit Ket(std::vector<Cplx> amps, std::string label = {});

  static Ket basis(int dim, int index, std::string label = {});
  static Ket zero(int dim);

  int dim() const { return static_cast<int>(amps_.size()); }
  const std::vector<Cplx>& amps() const { return amps_; }
  const Cplx& operator[](int i) const { return amps_[static_cast<size_t>(i)]; }
  const std::string& label() const { return label_; }

  double norm_squared() const;
  double norm() const;
  /// Unit-norm copy; throws DegenerateState for a zero vector.
  Ket normalized() const;

 private:
  std::vector<Cplx> amps_;
  std::string label_;
};

/// Square complex matrix with verified structural flags. The default
/// constructor path runs all three checks eagerly, so flags are kTrue/kFalse;
/// Op::unchecked() skips them (flags stay kUnchecked).
class Op {
 public:
  Op(int dim, std::vector<Cplx> entries_row_major);
  static Op unchecked(int dim, std::vector<Cplx> entries_row_major);
  static Op identity(int dim);
  static Op zero(int dim);

  int dim() const { return dim_; }
  const Cplx& at(int r, int c) const {
    return entries_[static_cast<size_t>(r) * dim_ + c];
  }
  const std::vector<Cplx>& entries() const { return entries_; }

  TriFlag hermitian_flag() const { return hermitian_; }
  TriFlag unitary_flag() const { return unitary_; }
  TriFlag projector_flag() const { return projector_; }
  bool is_hermitian() const { return hermitian_ == TriFlag::kTrue; }
  bool is_unitary() const { return unitary_ == TriFlag::kTrue; }
  bool is_projector() const { return projector_ == TriFlag::kTrue; }

  /// Copy with all structural flags (re)verified.
  Op verified() const { return Op(dim_, entries_); }

 private:
  Op(int dim, std::vector<Cplx> entries, bool run_checks);

  int dim_;
  std::vector<Cplx> entries_;
  TriFlag hermitian_ = TriFlag::kUnchecked;
  TriFlag unitary_ = TriFlag::kUnchecked;
  TriFlag projector_ = TriFlag::kUnchecked;
};

/// Joint system (x) meter state, system-major: index = s * meter_dim + m.
class JointKet {
 public:
  JointKet(int sys_dim, int meter_dim, std::vector<Cplx> amps);

  int sys_dim() const { return sys_dim_; }
  int meter_dim() const { return meter_dim_; }
  const std::vector<Cplx>& amps() const { return amps_; }
  const Cplx& at(int s, int m) const {
    return amps_[static_cast<size_t>(s) * meter_dim_ + m];
  }

  double norm_squared() const;
  double norm() const;
  /// Flat view of the joint state as a Ket of dimension sys_dim * meter_dim.
  Ket as_ket() const { return Ket(amps_); }

  /// Rank-1 factor extraction: recovers (system, meter) factors of a product
  /// state, each normalized, up to a global phase. Throws DegenerateState for
  /// a zero state. Factors of an entangled state will not reproduce it; use
  /// fidelity(tensor_ket(s, m).as_ket(), as_ket()) to check.
  std::pair<Ket, Ket> split_product() const;

 private:
  int sys_dim_;
  int meter_dim_;
  std::vector<Cplx> amps_;
};

struct Eigensystem {
  std::vector<double> eigenvalues;   // ascending
  std::vector<Ket> eigenvectors;     // orthonormal, aligned with eigenvalues
};

// -- Core operations --------------------------------------------------------

/// <a|b> with the conjugation on the first argument.
Cplx inner(const Ket& a, const Ket& b);

/// Matrix-vector product M v.
Ket apply(const Op& m, const Ket& v);

/// Kronecker product, system-major convention.
Op tensor_op(const Op& a, const Op& b);
JointKet tensor_ket(const Ket& sys, const Ket& meter);

/// |v><v| for normalized v. Throws DegenerateState on zero norm.
Op projector_onto(const Ket& v);

/// Cyclic Jacobi diagonalization of a Hermitian matrix. Requires the
/// hermitian flag verified-true. Eigenvalues ascending; eigenvectors
/// orthonormal with the largest-magnitude component made real positive.
Eigensystem hermitian_eigensystem(const Op& m);

// -- Support ----------------------------------------------------------------

Op adjoint(const Op& m);
Op matmul(const Op& a, const Op& b);
double max_abs_diff(const Op& a, const Op& b);

/// |<a|b>|^2 / (|a|^2 |b|^2): ray (global-phase-insensitive) overlap.
double fidelity(const Ket& a, const Ket& b);

Ket operator+(const Ket& a, const Ket& b);
Ket operator-(const Ket& a, const Ket& b);
Ket operator*(const Cplx& c, const Ket& v);
Op operator+(const Op& a, const Op& b);
Op operator-(const Op& a, const Op& b);
Op operator*(const Cplx& c, const Op& m);

}  // namespace weaksim

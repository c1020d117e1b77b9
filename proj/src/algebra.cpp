#include "weaksim/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace weaksim {

namespace {

void require_finite(const std::vector<Cplx>& vals, const char* what) {
  for (const Cplx& v : vals) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ContractViolation(std::string(what) + ": non-finite component");
    }
  }
}

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a) + " vs " + std::to_string(b) +
                            ")");
  }
}

}  // namespace

// -- Ket ---------------------------------------------------------------------

Ket::Ket(std::vector<Cplx> amps, std::string label)
    : amps_(std::move(amps)), label_(std::move(label)) {
  if (amps_.empty()) {
    throw ContractViolation("Ket: dimension must be positive");
  }
  require_finite(amps_, "Ket");
}

Ket Ket::basis(int dim, int index, std::string label) {
  if (dim <= 0 || index < 0 || index >= dim) {
    throw ContractViolation("Ket::basis: index out of range");
  }
  std::vector<Cplx> amps(static_cast<size_t>(dim), Cplx(0.0, 0.0));
  amps[static_cast<size_t>(index)] = Cplx(1.0, 0.0);
  return Ket(std::move(amps), std::move(label));
}

Ket Ket::zero(int dim) {
  if (dim <= 0) {
    throw ContractViolation("Ket::zero: dimension must be positive");
  }
  return Ket(std::vector<Cplx>(static_cast<size_t>(dim), Cplx(0.0, 0.0)));
}

double Ket::norm_squared() const {
  double s = 0.0;
  for (const Cplx& a : amps_) s += std::norm(a);
  return s;
}

double Ket::norm() const { return std::sqrt(norm_squared()); }

Ket Ket::normalized() const {
  const double n = norm();
  if (n <= 0.0) {
    throw DegenerateState("Ket::normalized: zero-norm state");
  }
  std::vector<Cplx> scaled(amps_);
  for (Cplx& a : scaled) a /= n;
  return Ket(std::move(scaled), label_);
}

// -- Op ----------------------------------------------------------------------

Op::Op(int dim, std::vector<Cplx> entries, bool run_checks) : dim_(dim) {
  if (dim <= 0) {
    throw ContractViolation("Op: dimension must be positive");
  }
  if (entries.size() != static_cast<size_t>(dim) * static_cast<size_t>(dim)) {
    throw ContractViolation("Op: entry count does not match dim*dim");
  }
  require_finite(entries, "Op");
  entries_ = std::move(entries);
  if (!run_checks) return;

  const auto n = static_cast<size_t>(dim_);
  double herm_err = 0.0;
  for (size_t r = 0; r < n; ++r) {
    for (size_t c = r; c < n; ++c) {
      herm_err = std::max(
          herm_err, std::abs(entries_[r * n + c] - std::conj(entries_[c * n + r])));
    }
  }
  hermitian_ = herm_err <= tol::kStructural ? TriFlag::kTrue : TriFlag::kFalse;

  // M^dag M - I and M^2 - M in one pass each.
  double unit_err = 0.0;
  double proj_err = 0.0;
  for (size_t r = 0; r < n; ++r) {
    for (size_t c = 0; c < n; ++c) {
      Cplx mdm(0.0, 0.0);
      Cplx mm(0.0, 0.0);
      for (size_t k = 0; k < n; ++k) {
        mdm += std::conj(entries_[k * n + r]) * entries_[k * n + c];
        mm += entries_[r * n + k] * entries_[k * n + c];
      }
      const Cplx eye = (r == c) ? Cplx(1.0, 0.0) : Cplx(0.0, 0.0);
      unit_err = std::max(unit_err, std::abs(mdm - eye));
      proj_err = std::max(proj_err, std::abs(mm - entries_[r * n + c]));
    }
  }
  unitary_ = unit_err <= tol::kStructural ? TriFlag::kTrue : TriFlag::kFalse;
  projector_ = (hermitian_ == TriFlag::kTrue && proj_err <= tol::kStructural)
                   ? TriFlag::kTrue
                   : TriFlag::kFalse;
}

Op::Op(int dim, std::vector<Cplx> entries)
    : Op(dim, std::move(entries), /*run_checks=*/true) {}

Op Op::unchecked(int dim, std::vector<Cplx> entries) {
  return Op(dim, std::move(entries), /*run_checks=*/false);
}

Op Op::identity(int dim) {
  std::vector<Cplx> e(static_cast<size_t>(dim) * dim, Cplx(0.0, 0.0));
  for (int i = 0; i < dim; ++i) e[static_cast<size_t>(i) * dim + i] = 1.0;
  return Op(dim, std::move(e));
}

Op Op::zero(int dim) {
  return Op(dim, std::vector<Cplx>(static_cast<size_t>(dim) * dim, Cplx(0.0, 0.0)));
}

// -- JointKet ----------------------------------------------------------------

JointKet::JointKet(int sys_dim, int meter_dim, std::vector<Cplx> amps)
    : sys_dim_(sys_dim), meter_dim_(meter_dim), amps_(std::move(amps)) {
  if (sys_dim <= 0 || meter_dim <= 0) {
    throw ContractViolation("JointKet: dimensions must be positive");
  }
  if (amps_.size() !=
      static_cast<size_t>(sys_dim) * static_cast<size_t>(meter_dim)) {
    throw ContractViolation("JointKet: amplitude count mismatch");
  }
  require_finite(amps_, "JointKet");
}

double JointKet::norm_squared() const {
  double s = 0.0;
  for (const Cplx& a : amps_) s += std::norm(a);
  return s;
}

double JointKet::norm() const { return std::sqrt(norm_squared()); }

std::pair<Ket, Ket> JointKet::split_product() const {
  size_t best = 0;
  double best_mag = 0.0;
  for (size_t i = 0; i < amps_.size(); ++i) {
    const double m = std::abs(amps_[i]);
    if (m > best_mag) {
      best_mag = m;
      best = i;
    }
  }
  if (best_mag <= 0.0) {
    throw DegenerateState("JointKet::split_product: zero state");
  }
  const int s0 = static_cast<int>(best) / meter_dim_;
  const int m0 = static_cast<int>(best) % meter_dim_;
  std::vector<Cplx> sys(static_cast<size_t>(sys_dim_));
  std::vector<Cplx> met(static_cast<size_t>(meter_dim_));
  for (int s = 0; s < sys_dim_; ++s) sys[static_cast<size_t>(s)] = at(s, m0);
  for (int m = 0; m < meter_dim_; ++m) met[static_cast<size_t>(m)] = at(s0, m);
  return {Ket(std::move(sys)).normalized(), Ket(std::move(met)).normalized()};
}

// -- Core operations ----------------------------------------------------------

Cplx inner(const Ket& a, const Ket& b) {
  require_same_dim(a.dim(), b.dim(), "inner");
  Cplx s(0.0, 0.0);
  for (int i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

Ket apply(const Op& m, const Ket& v) {
  require_same_dim(m.dim(), v.dim(), "apply");
  const int n = m.dim();
  std::vector<Cplx> out(static_cast<size_t>(n), Cplx(0.0, 0.0));
  for (int r = 0; r < n; ++r) {
    Cplx acc(0.0, 0.0);
    for (int c = 0; c < n; ++c) acc += m.at(r, c) * v[c];
    out[static_cast<size_t>(r)] = acc;
  }
  return Ket(std::move(out), v.label());
}

Op tensor_op(const Op& a, const Op& b) {
  const int na = a.dim();
  const int nb = b.dim();
  const int n = na * nb;
  std::vector<Cplx> e(static_cast<size_t>(n) * n);
  for (int ra = 0; ra < na; ++ra) {
    for (int rb = 0; rb < nb; ++rb) {
      for (int ca = 0; ca < na; ++ca) {
        for (int cb = 0; cb < nb; ++cb) {
          e[static_cast<size_t>(ra * nb + rb) * n + (ca * nb + cb)] =
              a.at(ra, ca) * b.at(rb, cb);
        }
      }
    }
  }
  return Op::unchecked(n, std::move(e)).verified();
}

JointKet tensor_ket(const Ket& sys, const Ket& meter) {
  std::vector<Cplx> amps(static_cast<size_t>(sys.dim()) * meter.dim());
  for (int s = 0; s < sys.dim(); ++s) {
    for (int m = 0; m < meter.dim(); ++m) {
      amps[static_cast<size_t>(s) * meter.dim() + m] = sys[s] * meter[m];
    }
  }
  return JointKet(sys.dim(), meter.dim(), std::move(amps));
}

Op projector_onto(const Ket& v) {
  const Ket u = v.normalized();  // throws DegenerateState on zero norm
  const int n = u.dim();
  std::vector<Cplx> e(static_cast<size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      e[static_cast<size_t>(r) * n + c] = u[r] * std::conj(u[c]);
    }
  }
  return Op(n, std::move(e));
}

// -- Hermitian eigensolver (cyclic Jacobi) ------------------------------------

namespace {

double offdiag_norm(const std::vector<Cplx>& a, int n) {
  double s = 0.0;
  for (int r = 0; r < n; ++r) {
    for (int c = r + 1; c < n; ++c) {
      s += 2.0 * std::norm(a[static_cast<size_t>(r) * n + c]);
    }
  }
  return std::sqrt(s);
}

}  // namespace

Eigensystem hermitian_eigensystem(const Op& m) {
  if (m.hermitian_flag() != TriFlag::kTrue) {
    throw ContractViolation(
        "hermitian_eigensystem: hermitian flag not verified-true");
  }
  const int n = m.dim();
  std::vector<Cplx> a = m.entries();
  std::vector<Cplx> v(static_cast<size_t>(n) * n, Cplx(0.0, 0.0));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i) * n + i] = 1.0;

  auto A = [&](int r, int c) -> Cplx& { return a[static_cast<size_t>(r) * n + c]; };
  auto V = [&](int r, int c) -> Cplx& { return v[static_cast<size_t>(r) * n + c]; };

  double scale = 0.0;
  for (const Cplx& e : a) scale = std::max(scale, std::abs(e));
  const double stop = std::max(scale, 1.0) * 1e-15 * n;

  constexpr int kMaxSweeps = 60;
  for (int sweep = 0; sweep < kMaxSweeps && offdiag_norm(a, n) > stop; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Cplx apq = A(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;

        // Phase step: rotate column q so A(p,q) becomes real positive.
        const Cplx u = std::conj(apq) / mag;
        for (int i = 0; i < n; ++i) {
          A(i, q) *= u;
          V(i, q) *= u;
        }
        for (int j = 0; j < n; ++j) A(q, j) *= std::conj(u);

        // Real Jacobi rotation in the (p, q) plane zeroing A(p,q).
        const double app = A(p, p).real();
        const double aqq = A(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (int i = 0; i < n; ++i) {
          const Cplx aip = A(i, p);
          const Cplx aiq = A(i, q);
          A(i, p) = c * aip - s * aiq;
          A(i, q) = s * aip + c * aiq;
          const Cplx vip = V(i, p);
          const Cplx viq = V(i, q);
          V(i, p) = c * vip - s * viq;
          V(i, q) = s * vip + c * viq;
        }
        for (int j = 0; j < n; ++j) {
          const Cplx apj = A(p, j);
          const Cplx aqj = A(q, j);
          A(p, j) = c * apj - s * aqj;
          A(q, j) = s * apj + c * aqj;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
      }
    }
  }

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return a[static_cast<size_t>(x) * n + x].real() <
           a[static_cast<size_t>(y) * n + y].real();
  });

  Eigensystem es;
  es.eigenvalues.reserve(static_cast<size_t>(n));
  es.eigenvectors.reserve(static_cast<size_t>(n));
  for (int k : order) {
    es.eigenvalues.push_back(a[static_cast<size_t>(k) * n + k].real());
    std::vector<Cplx> col(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) col[static_cast<size_t>(i)] = V(i, k);
    // Deterministic phase: largest component real positive.
    int imax = 0;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      const double mg = std::abs(col[static_cast<size_t>(i)]);
      if (mg > best) {
        best = mg;
        imax = i;
      }
    }
    if (best > 0.0) {
      const Cplx phase = std::conj(col[static_cast<size_t>(imax)]) / best;
      for (Cplx& x : col) x *= phase;
    }
    es.eigenvectors.emplace_back(std::move(col));
  }
  return es;
}

// -- Support ------------------------------------------------------------------

Op adjoint(const Op& m) {
  const int n = m.dim();
  std::vector<Cplx> e(static_cast<size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      e[static_cast<size_t>(r) * n + c] = std::conj(m.at(c, r));
    }
  }
  return Op::unchecked(n, std::move(e)).verified();
}

Op matmul(const Op& a, const Op& b) {
  require_same_dim(a.dim(), b.dim(), "matmul");
  const int n = a.dim();
  std::vector<Cplx> e(static_cast<size_t>(n) * n, Cplx(0.0, 0.0));
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k < n; ++k) {
      const Cplx ark = a.at(r, k);
      if (ark == Cplx(0.0, 0.0)) continue;
      for (int c = 0; c < n; ++c) {
        e[static_cast<size_t>(r) * n + c] += ark * b.at(k, c);
      }
    }
  }
  return Op::unchecked(n, std::move(e)).verified();
}

double max_abs_diff(const Op& a, const Op& b) {
  require_same_dim(a.dim(), b.dim(), "max_abs_diff");
  double m = 0.0;
  for (int r = 0; r < a.dim(); ++r) {
    for (int c = 0; c < a.dim(); ++c) {
      m = std::max(m, std::abs(a.at(r, c) - b.at(r, c)));
    }
  }
  return m;
}

double fidelity(const Ket& a, const Ket& b) {
  const double na = a.norm_squared();
  const double nb = b.norm_squared();
  if (na <= 0.0 || nb <= 0.0) {
    throw DegenerateState("fidelity: zero-norm state");
  }
  return std::norm(inner(a, b)) / (na * nb);
}

Ket operator+(const Ket& a, const Ket& b) {
  require_same_dim(a.dim(), b.dim(), "Ket operator+");
  std::vector<Cplx> out(a.amps());
  for (int i = 0; i < b.dim(); ++i) out[static_cast<size_t>(i)] += b[i];
  return Ket(std::move(out));
}

Ket operator-(const Ket& a, const Ket& b) {
  require_same_dim(a.dim(), b.dim(), "Ket operator-");
  std::vector<Cplx> out(a.amps());
  for (int i = 0; i < b.dim(); ++i) out[static_cast<size_t>(i)] -= b[i];
  return Ket(std::move(out));
}

Ket operator*(const Cplx& c, const Ket& v) {
  std::vector<Cplx> out(v.amps());
  for (Cplx& x : out) x *= c;
  return Ket(std::move(out), v.label());
}

Op operator+(const Op& a, const Op& b) {
  require_same_dim(a.dim(), b.dim(), "Op operator+");
  std::vector<Cplx> e(a.entries());
  for (size_t i = 0; i < e.size(); ++i) e[i] += b.entries()[i];
  return Op(a.dim(), std::move(e));
}

Op operator-(const Op& a, const Op& b) {
  require_same_dim(a.dim(), b.dim(), "Op operator-");
  std::vector<Cplx> e(a.entries());
  for (size_t i = 0; i < e.size(); ++i) e[i] -= b.entries()[i];
  return Op(a.dim(), std::move(e));
}

Op operator*(const Cplx& c, const Op& m) {
  std::vector<Cplx> e(m.entries());
  for (Cplx& x : e) x *= c;
  return Op(m.dim(), std::move(e));
}

}  // namespace weaksim

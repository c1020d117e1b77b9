#include "weaksim/meter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "weaksim/errors.hpp"

namespace weaksim {

namespace {

double pair_overlap(double sigma, double a, double b) {
  const double d = a - b;
  return std::exp(-d * d / (8.0 * sigma * sigma));
}

void require_width_match(const GaussianSum& a, const GaussianSum& b) {
  if (a.sigma != b.sigma) {
    throw ContractViolation("GaussianSum: width mismatch");
  }
}

}  // namespace

GaussianSum GaussianSum::ground(double sigma) {
  if (!(sigma > 0.0)) {
    throw ContractViolation("GaussianSum: sigma must be positive");
  }
  return GaussianSum{sigma, {{Cplx(1.0, 0.0), 0.0}}};
}

double GaussianSum::norm_squared() const {
  Cplx coeff_sum(0.0, 0.0);
  for (const Term& t : terms) coeff_sum += t.coeff;
  double total = std::norm(coeff_sum);
  for (size_t i = 0; i < terms.size(); ++i) {
    for (size_t j = i + 1; j < terms.size(); ++j) {
      const double d = terms[i].center - terms[j].center;
      const double rest = std::expm1(-d * d / (8.0 * sigma * sigma));
      total += 2.0 * (std::conj(terms[i].coeff) * terms[j].coeff).real() * rest;
    }
  }
  return std::max(total, 0.0);
}

double GaussianSum::norm() const { return std::sqrt(norm_squared()); }

GaussianSum GaussianSum::consolidated() const {
  GaussianSum out{sigma, {}};
  std::vector<Term> sorted = terms;
  std::sort(sorted.begin(), sorted.end(),
            [](const Term& a, const Term& b) { return a.center < b.center; });
  for (const Term& t : sorted) {
    if (!out.terms.empty() && out.terms.back().center == t.center) {
      out.terms.back().coeff += t.coeff;
    } else {
      out.terms.push_back(t);
    }
  }
  std::erase_if(out.terms,
                [](const Term& t) { return t.coeff == Cplx(0.0, 0.0); });
  return out;
}

GaussianSum GaussianSum::translated(double delta) const {
  GaussianSum out = *this;
  for (Term& t : out.terms) t.center += delta;
  return out;
}

GaussianSum GaussianSum::scaled(const Cplx& factor) const {
  GaussianSum out = *this;
  for (Term& t : out.terms) t.coeff *= factor;
  return out;
}

Cplx gaussian_sum_overlap(const GaussianSum& a, const GaussianSum& b) {
  require_width_match(a, b);
  Cplx s(0.0, 0.0);
  for (const auto& ta : a.terms) {
    for (const auto& tb : b.terms) {
      s += std::conj(ta.coeff) * tb.coeff *
           pair_overlap(a.sigma, ta.center, tb.center);
    }
  }
  return s;
}

// -- MeterModel ---------------------------------------------------------------

MeterModel MeterModel::analytic(double sigma) {
  if (!(sigma > 0.0)) {
    throw ContractViolation("MeterModel: sigma must be positive");
  }
  MeterModel m;
  m.kind_ = Kind::kAnalyticGaussian;
  m.sigma_ = sigma;
  return m;
}

MeterModel MeterModel::grid(double sigma, int points, double dx) {
  if (!(sigma > 0.0)) {
    throw ContractViolation("MeterModel: sigma must be positive");
  }
  if (points < 3 || points % 2 == 0) {
    throw ContractViolation("MeterModel: grid needs an odd point count >= 3");
  }
  if (dx <= 0.0) {
    dx = 2.0 * defaults::kGridHalfSpanSigmas * sigma / (points - 1);
  }
  if (!std::isfinite(dx)) {
    throw ContractViolation("MeterModel: grid spacing must be finite");
  }

  MeterModel m;
  m.kind_ = Kind::kGrid;
  m.sigma_ = sigma;
  m.points_ = points;
  m.dx_ = dx;

  const int n = points;
  const double half = 0.5 * (n - 1);

  m.momenta_.resize(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int k = (j <= n / 2) ? j : j - n;
    m.momenta_[static_cast<size_t>(j)] =
        2.0 * std::numbers::pi * k / (n * dx);
  }

  m.plane_waves_.resize(static_cast<size_t>(n) * n);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    const double x = (i - half) * dx;
    for (int j = 0; j < n; ++j) {
      m.plane_waves_[static_cast<size_t>(i) * n + j] =
          std::polar(1.0 / root_n, m.momenta_[static_cast<size_t>(j)] * x);
    }
  }

  m.initial_grid_.resize(static_cast<size_t>(n));
  double nrm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = (i - half) * dx;
    const double a = std::exp(-x * x / (4.0 * sigma * sigma));
    m.initial_grid_[static_cast<size_t>(i)] = a;
    nrm2 += a * a;
  }
  const double inv = 1.0 / std::sqrt(nrm2);
  for (Cplx& a : m.initial_grid_) a *= inv;

  const double edge = std::abs(m.initial_grid_.front());
  if (edge >= tol::kGridBoundary) {
    throw ContractViolation(
        "MeterModel: grid too narrow, boundary amplitude " +
        std::to_string(edge));
  }
  return m;
}

GaussianSum MeterModel::initial_gaussian() const {
  if (kind_ != Kind::kAnalyticGaussian) {
    throw ContractViolation("MeterModel: not an analytic meter");
  }
  return GaussianSum::ground(sigma_);
}

Ket MeterModel::initial_grid_state() const {
  if (kind_ != Kind::kGrid) {
    throw ContractViolation("MeterModel: not a grid meter");
  }
  return Ket(initial_grid_);
}

double MeterModel::position(int i) const {
  return (i - 0.5 * (points_ - 1)) * dx_;
}

const std::vector<double>& MeterModel::momenta() const {
  if (kind_ != Kind::kGrid) {
    throw ContractViolation("MeterModel: not a grid meter");
  }
  return momenta_;
}

std::vector<Cplx> MeterModel::to_momentum(const std::vector<Cplx>& psi) const {
  const int n = points_;
  if (static_cast<int>(psi.size()) != n) {
    throw ContractViolation("MeterModel: grid size mismatch");
  }
  std::vector<Cplx> out(static_cast<size_t>(n), Cplx(0.0, 0.0));
  for (int j = 0; j < n; ++j) {
    Cplx acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
      acc += std::conj(plane_waves_[static_cast<size_t>(i) * n + j]) *
             psi[static_cast<size_t>(i)];
    }
    out[static_cast<size_t>(j)] = acc;
  }
  return out;
}

std::vector<Cplx> MeterModel::from_momentum(const std::vector<Cplx>& phi) const {
  const int n = points_;
  if (static_cast<int>(phi.size()) != n) {
    throw ContractViolation("MeterModel: grid size mismatch");
  }
  std::vector<Cplx> out(static_cast<size_t>(n), Cplx(0.0, 0.0));
  for (int i = 0; i < n; ++i) {
    Cplx acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      acc += plane_waves_[static_cast<size_t>(i) * n + j] * phi[static_cast<size_t>(j)];
    }
    out[static_cast<size_t>(i)] = acc;
  }
  return out;
}

Ket MeterModel::translate(const Ket& psi, double delta) const {
  if (delta == 0.0) return psi;
  std::vector<Cplx> phi = to_momentum(psi.amps());
  for (int j = 0; j < points_; ++j) {
    phi[static_cast<size_t>(j)] *=
        std::polar(1.0, -delta * momenta_[static_cast<size_t>(j)]);
  }
  return Ket(from_momentum(phi), psi.label());
}

Ket MeterModel::apply_momentum(const Ket& psi) const {
  std::vector<Cplx> phi = to_momentum(psi.amps());
  for (int j = 0; j < points_; ++j) {
    phi[static_cast<size_t>(j)] *= momenta_[static_cast<size_t>(j)];
  }
  return Ket(from_momentum(phi), psi.label());
}

Op MeterModel::q_operator() const {
  if (kind_ != Kind::kGrid) {
    throw ContractViolation("MeterModel: q_operator needs a grid meter");
  }
  const int n = points_;
  std::vector<Cplx> e(static_cast<size_t>(n) * n, Cplx(0.0, 0.0));
  for (int i = 0; i < n; ++i) {
    e[static_cast<size_t>(i) * n + i] = position(i);
  }
  return Op(n, std::move(e));
}

Op MeterModel::p_operator() const {
  if (kind_ != Kind::kGrid) {
    throw ContractViolation("MeterModel: p_operator needs a grid meter");
  }
  const int n = points_;
  std::vector<Cplx> e(static_cast<size_t>(n) * n, Cplx(0.0, 0.0));
  // P = U diag(p) U^dag over the plane-wave basis.
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      Cplx acc(0.0, 0.0);
      for (int j = 0; j < n; ++j) {
        acc += plane_waves_[static_cast<size_t>(r) * n + j] *
               momenta_[static_cast<size_t>(j)] *
               std::conj(plane_waves_[static_cast<size_t>(c) * n + j]);
      }
      e[static_cast<size_t>(r) * n + c] = acc;
    }
  }
  return Op(n, std::move(e));
}

// -- Readout ------------------------------------------------------------------

double meter_state_norm(const MeterState& state) {
  if (const auto* gs = std::get_if<GaussianSum>(&state)) return gs->norm();
  return std::get<Ket>(state).norm();
}

namespace {

PointerStats readout_gaussian(const GaussianSum& gs) {
  const double n2 = gs.norm_squared();
  if (n2 <= 0.0) {
    throw DegenerateState("pointer_readout: zero-norm meter state");
  }
  double num_q = 0.0;
  double num_p = 0.0;
  const double inv4s2 = 1.0 / (4.0 * gs.sigma * gs.sigma);
  for (size_t i = 0; i < gs.terms.size(); ++i) {
    num_q += std::norm(gs.terms[i].coeff) * gs.terms[i].center;
    for (size_t j = i + 1; j < gs.terms.size(); ++j) {
      const double ov =
          pair_overlap(gs.sigma, gs.terms[i].center, gs.terms[j].center);
      const Cplx cross = std::conj(gs.terms[i].coeff) * gs.terms[j].coeff;
      // <G_i| Q |G_j> = O_ij (a_i + a_j)/2
      num_q += 2.0 * cross.real() * ov * 0.5 *
               (gs.terms[i].center + gs.terms[j].center);
      // <G_i| P |G_j> = i (a_i - a_j)/(4 sigma^2) O_ij
      num_p += -2.0 * cross.imag() * (gs.terms[i].center - gs.terms[j].center) *
               inv4s2 * ov;
    }
  }
  return {num_q / n2, num_p / n2};
}

PointerStats readout_grid(const MeterModel& model, const Ket& psi) {
  if (psi.dim() != model.points()) {
    throw ContractViolation("pointer_readout: grid size mismatch");
  }
  const double n2 = psi.norm_squared();
  if (n2 <= 0.0) {
    throw DegenerateState("pointer_readout: zero-norm meter state");
  }
  double num_q = 0.0;
  for (int i = 0; i < psi.dim(); ++i) {
    num_q += model.position(i) * std::norm(psi[i]);
  }
  const std::vector<Cplx> phi = model.to_momentum(psi.amps());
  double num_p = 0.0;
  for (int j = 0; j < psi.dim(); ++j) {
    num_p += model.momenta()[static_cast<size_t>(j)] *
             std::norm(phi[static_cast<size_t>(j)]);
  }
  return {num_q / n2, num_p / n2};
}

}  // namespace

PointerStats pointer_readout(const MeterModel& model, const MeterState& state) {
  if (const auto* gs = std::get_if<GaussianSum>(&state)) {
    if (model.kind() != MeterModel::Kind::kAnalyticGaussian) {
      throw ContractViolation("pointer_readout: state/model kind mismatch");
    }
    return readout_gaussian(*gs);
  }
  if (model.kind() != MeterModel::Kind::kGrid) {
    throw ContractViolation("pointer_readout: state/model kind mismatch");
  }
  return readout_grid(model, std::get<Ket>(state));
}

}  // namespace weaksim

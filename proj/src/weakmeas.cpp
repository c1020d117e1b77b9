#include "weaksim/weakmeas.hpp"

#include <algorithm>
#include <cmath>

#include "weaksim/errors.hpp"

namespace weaksim {

namespace {

void require_hermitian(const Op& s, const char* what) {
  if (s.hermitian_flag() != TriFlag::kTrue) {
    throw ContractViolation(std::string(what) +
                            ": observable must be verified hermitian");
  }
}

// <in|S|in> as a direct bilinear form, one of the two cross-checked routes.
Cplx bilinear_expectation(const Op& s, const Ket& in) {
  Cplx acc(0.0, 0.0);
  for (int r = 0; r < s.dim(); ++r) {
    for (int c = 0; c < s.dim(); ++c) {
      acc += std::conj(in[r]) * s.at(r, c) * in[c];
    }
  }
  return acc;
}

}  // namespace

double AnalyticJoint::norm_squared() const {
  // System vectors are orthonormal, so branches add in quadrature.
  double s = 0.0;
  for (const GaussianSum& w : meter_waves) s += w.norm_squared();
  return s;
}

double AnalyticJoint::norm() const { return std::sqrt(norm_squared()); }

double CoupledJoint::norm() const {
  if (const auto* jk = std::get_if<JointKet>(&state)) return jk->norm();
  return std::get<AnalyticJoint>(state).norm();
}

WeakValueResult analytic_weak_value(const Op& s, const Ket& in, const Ket& fin) {
  if (s.dim() != in.dim() || s.dim() != fin.dim()) {
    throw ContractViolation("analytic_weak_value: dimension mismatch");
  }
  const double n_in = in.norm();
  const double n_fin = fin.norm();
  if (n_in <= 0.0 || n_fin <= 0.0) {
    throw DegenerateState("analytic_weak_value: zero-norm state");
  }
  const Cplx denom = inner(fin, in);
  if (std::abs(denom) <= tol::kOrthogonal * n_in * n_fin) {
    throw OrthogonalPostselection(
        "analytic_weak_value: <fin|in> vanishes, weak value undefined");
  }
  return {inner(fin, apply(s, in)) / denom, WeakValueResult::Method::kAnalytic,
          0.0, 0.0};
}

JointKet first_order_joint(const Ket& in, const MeterModel& meter, const Op& s,
                           double g) {
  require_hermitian(s, "first_order_joint");
  if (g < 0.0) {
    throw ContractViolation("first_order_joint: g must be nonnegative");
  }
  if (meter.kind() != MeterModel::Kind::kGrid) {
    throw ContractViolation(
        "first_order_joint: the first-order form is materialized on a grid "
        "meter");
  }
  const Ket m0 = meter.initial_grid_state();
  const Ket pm = meter.apply_momentum(m0);
  const Ket s_in = apply(s, in);
  const int nm = m0.dim();
  std::vector<Cplx> amps(static_cast<size_t>(in.dim()) * nm);
  const Cplx minus_ig(0.0, -g);
  for (int a = 0; a < in.dim(); ++a) {
    for (int m = 0; m < nm; ++m) {
      amps[static_cast<size_t>(a) * nm + m] =
          in[a] * m0[m] + minus_ig * s_in[a] * pm[m];
    }
  }
  return JointKet(in.dim(), nm, std::move(amps));
}

CoupledJoint exact_coupled_joint(const Ket& in, const MeterModel& meter,
                                 const Op& s, double g) {
  require_hermitian(s, "exact_coupled_joint");
  if (s.dim() != in.dim()) {
    throw ContractViolation("exact_coupled_joint: dimension mismatch");
  }
  const Eigensystem es = hermitian_eigensystem(s);

  if (meter.kind() == MeterModel::Kind::kAnalyticGaussian) {
    AnalyticJoint aj;
    for (size_t k = 0; k < es.eigenvectors.size(); ++k) {
      const Cplx beta = inner(es.eigenvectors[k], in);
      aj.sys_vectors.push_back(es.eigenvectors[k]);
      aj.meter_waves.push_back(GaussianSum::ground(meter.sigma())
                                   .translated(g * es.eigenvalues[k])
                                   .scaled(beta));
    }
    return CoupledJoint{std::move(aj)};
  }

  const Ket m0 = meter.initial_grid_state();
  const int nm = m0.dim();
  std::vector<Cplx> amps(static_cast<size_t>(in.dim()) * nm, Cplx(0.0, 0.0));
  for (size_t k = 0; k < es.eigenvectors.size(); ++k) {
    const Cplx beta = inner(es.eigenvectors[k], in);
    if (beta == Cplx(0.0, 0.0)) continue;
    const Ket shifted = meter.translate(m0, g * es.eigenvalues[k]);
    const Ket& evec = es.eigenvectors[k];
    for (int a = 0; a < in.dim(); ++a) {
      const Cplx w = beta * evec[a];
      if (w == Cplx(0.0, 0.0)) continue;
      for (int m = 0; m < nm; ++m) {
        amps[static_cast<size_t>(a) * nm + m] += w * shifted[m];
      }
    }
  }
  return CoupledJoint{JointKet(in.dim(), nm, std::move(amps))};
}

PostselectResult postselect(const JointKet& joint, const Ket& fin) {
  if (fin.dim() != joint.sys_dim()) {
    throw ContractViolation("postselect: system dimension mismatch");
  }
  const int nm = joint.meter_dim();
  std::vector<Cplx> meter(static_cast<size_t>(nm), Cplx(0.0, 0.0));
  for (int s = 0; s < joint.sys_dim(); ++s) {
    const Cplx w = std::conj(fin[s]);
    if (w == Cplx(0.0, 0.0)) continue;
    for (int m = 0; m < nm; ++m) {
      meter[static_cast<size_t>(m)] += w * joint.at(s, m);
    }
  }
  Ket state{std::move(meter)};
  const double n = state.norm();
  if (n <= tol::kNullPostselect) {
    throw NullPostselection("postselect: surviving meter norm " +
                            std::to_string(n));
  }
  return {MeterState(std::move(state)), n};
}

PostselectResult postselect(const CoupledJoint& joint, const Ket& fin) {
  if (const auto* jk = std::get_if<JointKet>(&joint.state)) {
    return postselect(*jk, fin);
  }
  const auto& aj = std::get<AnalyticJoint>(joint.state);
  if (aj.sys_vectors.empty()) {
    throw ContractViolation("postselect: empty joint state");
  }
  if (fin.dim() != aj.sys_vectors.front().dim()) {
    throw ContractViolation("postselect: system dimension mismatch");
  }
  GaussianSum meter{aj.meter_waves.front().sigma, {}};
  for (size_t k = 0; k < aj.sys_vectors.size(); ++k) {
    const Cplx w = inner(fin, aj.sys_vectors[k]);
    const GaussianSum scaled = aj.meter_waves[k].scaled(w);
    meter.terms.insert(meter.terms.end(), scaled.terms.begin(),
                       scaled.terms.end());
  }
  meter = meter.consolidated();
  const double n = meter.norm();
  if (n <= tol::kNullPostselect) {
    throw NullPostselection("postselect: surviving meter norm " +
                            std::to_string(n));
  }
  return {MeterState(std::move(meter)), n};
}

namespace {

Cplx pointer_value_at(const Op& s, const Ket& in, const Ket& fin,
                      const MeterModel& meter, double g) {
  const CoupledJoint joint = exact_coupled_joint(in, meter, s, g);
  const PostselectResult ps = postselect(joint, fin);
  const PointerStats stats = pointer_readout(meter, ps.meter_state);
  const double two_s2 = 2.0 * meter.sigma() * meter.sigma();
  return {stats.mean_q / g, two_s2 * stats.mean_p / g};
}

}  // namespace

WeakValueResult extract_weak_value(const Op& s, const Ket& in, const Ket& fin,
                                   const MeterModel& meter, double g) {
  if (!(g > 0.0)) {
    throw ContractViolation("extract_weak_value: g must be positive");
  }
  const Cplx at_g = pointer_value_at(s, in, fin, meter, g);
  const Cplx at_half = pointer_value_at(s, in, fin, meter, 0.5 * g);
  return {at_g, WeakValueResult::Method::kPointer, g, std::abs(at_g - at_half)};
}

DerailmentReport derailment_check(const Op& s, const Ket& in, double tolerance) {
  require_hermitian(s, "derailment_check");
  if (std::abs(in.norm() - 1.0) > 1e-9) {
    throw ContractViolation("derailment_check: |in> must be unit-norm");
  }
  const Ket s_in = apply(s, in);
  const Cplx via_apply = inner(in, s_in);
  const Cplx via_form = bilinear_expectation(s, in);
  if (std::abs(via_apply - via_form) > tol::kCrossCheck) {
    throw std::logic_error(
        "derailment_check: expectation routes disagree beyond tolerance");
  }
  DerailmentReport report;
  report.expectation = via_form;
  report.overlap_with_in = via_apply;
  report.s_in_norm = s_in.norm();
  report.tol_used = tolerance;
  report.derailed =
      std::abs(report.expectation) <= tolerance && report.s_in_norm > tolerance;
  return report;
}

AdditivityReport additivity_report(const Op& s1, const Op& s2, const Ket& in,
                                   const Ket& fin) {
  if (s1.dim() != s2.dim()) {
    throw ContractViolation("additivity_report: operator dimension mismatch");
  }
  const Op sum = s1 + s2;
  AdditivityReport report;
  report.wv1 = analytic_weak_value(s1, in, fin);
  report.wv2 = analytic_weak_value(s2, in, fin);
  report.wv_sum = analytic_weak_value(sum, in, fin);
  report.additivity_residual =
      std::abs(report.wv_sum.value - report.wv1.value - report.wv2.value);
  if (report.additivity_residual > 1e-10) {
    throw std::logic_error("additivity_report: additivity violated");
  }
  const Ket unit_in = in.normalized();
  report.derail1 = derailment_check(s1, unit_in);
  report.derail2 = derailment_check(s2, unit_in);
  report.derail_sum = derailment_check(sum, unit_in);
  return report;
}

Cplx extrapolate_to_zero(std::vector<std::pair<double, Cplx>> points) {
  if (points.empty()) {
    throw InsufficientData("extrapolate_to_zero: no points");
  }
  const size_t n = points.size();
  std::vector<Cplx> p(n);
  for (size_t i = 0; i < n; ++i) p[i] = points[i].second;
  for (size_t k = 1; k < n; ++k) {
    for (size_t i = 0; i + k < n; ++i) {
      const double xi = points[i].first;
      const double xik = points[i + k].first;
      p[i] = (xi * p[i + 1] - xik * p[i]) / (xi - xik);
    }
  }
  return p[0];
}

SweepResult g_sweep(const SweepProbe& probe, std::vector<double> gs,
                    double tolerance) {
  if (gs.size() < 2) {
    throw InsufficientData("g_sweep: need at least two sweep points");
  }
  std::sort(gs.begin(), gs.end(), std::greater<double>());
  for (size_t i = 0; i < gs.size(); ++i) {
    if (!(gs[i] > 0.0)) {
      throw ContractViolation("g_sweep: couplings must be positive");
    }
    if (i > 0 && gs[i] == gs[i - 1]) {
      throw ContractViolation("g_sweep: couplings must be distinct");
    }
  }

  SweepResult result;
  result.divide_by_g = probe.divide_by_g;
  result.tolerance = tolerance;
  result.rows.reserve(gs.size());
  for (double g : gs) {
    const Cplx raw = probe.raw_at(g);
    result.rows.push_back({g, raw, raw / g});
  }

  // Extrapolate from the smallest couplings, degree capped.
  const size_t max_pts =
      static_cast<size_t>(defaults::kExtrapolationMaxDegree) + 1;
  const size_t use = std::min(result.rows.size(), max_pts);
  std::vector<std::pair<double, Cplx>> pts;
  pts.reserve(use);
  for (size_t i = result.rows.size() - use; i < result.rows.size(); ++i) {
    pts.emplace_back(result.rows[i].g, probe.divide_by_g
                                           ? result.rows[i].divided
                                           : result.rows[i].raw);
  }
  result.extrapolated_limit = extrapolate_to_zero(std::move(pts));

  if (probe.divide_by_g) {
    // raw(0)/0 is the 0/0 form: the endpoint stays UNDEFINED.
    result.endpoint = std::nullopt;
    result.discontinuity_flag = true;
  } else {
    if (!probe.raw_at_zero) {
      throw ContractViolation(
          "g_sweep: raw-mode sweep needs an exact g = 0 evaluator");
    }
    result.endpoint = probe.raw_at_zero();
    result.discontinuity_flag =
        std::abs(result.extrapolated_limit - *result.endpoint) > tolerance;
  }
  return result;
}

SweepProbe pointer_shift_probe(Op s, Ket in, Ket fin, MeterModel meter,
                               bool divide_by_g) {
  SweepProbe probe;
  probe.divide_by_g = divide_by_g;
  probe.raw_at = [s, in, fin, meter](double g) -> Cplx {
    const CoupledJoint joint = exact_coupled_joint(in, meter, s, g);
    const PostselectResult ps = postselect(joint, fin);
    const PointerStats stats = pointer_readout(meter, ps.meter_state);
    return {stats.mean_q, 2.0 * meter.sigma() * meter.sigma() * stats.mean_p};
  };
  // Coupling off: the pointer has not moved.
  probe.raw_at_zero = []() -> Cplx { return {0.0, 0.0}; };
  return probe;
}

}  // namespace weaksim

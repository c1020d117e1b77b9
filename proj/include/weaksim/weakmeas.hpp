#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "weaksim/algebra.hpp"
#include "weaksim/meter.hpp"

namespace weaksim {

struct WeakValueResult {
  enum class Method { kAnalytic, kPointer };

  Cplx value;
  Method method = Method::kAnalytic;
  double g_used = 0.0;     // 0 for analytic results
  double est_error = 0.0;  // 0 for analytic results
};

/// Joint state after exact coupling with an analytic meter: a sum over
/// eigenbranches |sys_k> (x) meter_k with orthonormal system vectors and the
/// branch coefficients absorbed into the Gaussian coefficients.
struct AnalyticJoint {
  std::vector<Ket> sys_vectors;
  std::vector<GaussianSum> meter_waves;

  double norm_squared() const;
  double norm() const;
};

/// Result of exact_coupled_joint: dense JointKet for a grid meter, branch
/// form for an analytic meter.
struct CoupledJoint {
  std::variant<JointKet, AnalyticJoint> state;

  double norm() const;
};

struct PostselectResult {
  MeterState meter_state;  // unnormalized: <fin|joint>, partial over system
  double norm = 0.0;       // norm of meter_state

  double success_probability() const { return norm * norm; }
};

struct DerailmentReport {
  Cplx expectation;      // <in|S|in>
  double s_in_norm = 0;  // |S|in>|
  bool derailed = false;
  Cplx overlap_with_in;  // expectation restated as <in | S in>
  double tol_used = tol::kDerailment;
};

struct AdditivityReport {
  WeakValueResult wv1;
  WeakValueResult wv2;
  WeakValueResult wv_sum;
  double additivity_residual = 0.0;  // |(S1+S2)_w - (S1)_w - (S2)_w|
  DerailmentReport derail1;
  DerailmentReport derail2;
  DerailmentReport derail_sum;
};

struct SweepRow {
  double g;
  Cplx raw;
  Cplx divided;  // raw / g
};

/// Divide-by-g limit analysis. `divide_by_g` records which of the two columns
/// is the quantity under study: when true the endpoint at g = 0 is the 0/0
/// form and stays UNDEFINED (nullopt); when false the endpoint is the raw
/// quantity evaluated exactly at g = 0.
struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by decreasing g
  Cplx extrapolated_limit;
  std::optional<Cplx> endpoint;  // nullopt encodes UNDEFINED
  bool discontinuity_flag = false;
  bool divide_by_g = true;
  double tolerance = 1e-9;
};

struct SweepProbe {
  std::function<Cplx(double)> raw_at;       // raw quantity at g > 0
  std::function<Cplx()> raw_at_zero;        // exact g = 0 value (raw mode)
  bool divide_by_g = true;
};

// -- Operations ---------------------------------------------------------------

/// <fin|S|in> / <fin|in>. Throws OrthogonalPostselection when the (ray)
/// overlap |<fin|in>|/(|fin||in|) is at or below tol::kOrthogonal.
WeakValueResult analytic_weak_value(const Op& s, const Ket& in, const Ket& fin);

/// |in>(x)|m> - i g (S|in>)(x)(P|m>): the first-order form materialized on a
/// grid meter. Not normalized (truncation of a unitary).
JointKet first_order_joint(const Ket& in, const MeterModel& meter, const Op& s,
                           double g);

/// exp(-i g S (x) P) |in>(x)|m>, exact through the eigendecomposition of S:
/// each eigenbranch translates the meter by g * lambda.
CoupledJoint exact_coupled_joint(const Ket& in, const MeterModel& meter,
                                 const Op& s, double g);

/// Partial inner product over the system factor. Throws NullPostselection
/// when the surviving meter norm is at or below tol::kNullPostselect.
PostselectResult postselect(const CoupledJoint& joint, const Ket& fin);
PostselectResult postselect(const JointKet& joint, const Ket& fin);

/// Full divide-by-g protocol: couple, postselect, read the pointer, and map
/// shifts to a complex weak value via Re = dQ/g, Im = 2 sigma^2 dP/g (the
/// Gaussian-meter convention for a width-sigma pointer with <Q> = <P> = 0
/// initially). est_error is the residual against a second run at g/2.
WeakValueResult extract_weak_value(const Op& s, const Ket& in, const Ket& fin,
                                   const MeterModel& meter, double g);

/// Checks whether S|in> exists but is orthogonal to |in>.
DerailmentReport derailment_check(const Op& s, const Ket& in,
                                  double tolerance = tol::kDerailment);

/// (S1)_w, (S2)_w, (S1+S2)_w plus per-operator derailment diagnostics.
AdditivityReport additivity_report(const Op& s1, const Op& s2, const Ket& in,
                                   const Ket& fin);

/// Evaluates the probe over the given couplings and extrapolates the studied
/// quantity to g -> 0 (Neville, degree capped at 4). Throws InsufficientData
/// for fewer than two points.
SweepResult g_sweep(const SweepProbe& probe, std::vector<double> gs,
                    double tolerance = 1e-9);

/// Probe whose raw quantity is the complex pointer shift dQ + 2 i sigma^2 dP,
/// so the divided quantity is the extracted weak value.
SweepProbe pointer_shift_probe(Op s, Ket in, Ket fin, MeterModel meter,
                               bool divide_by_g = true);

/// Neville polynomial extrapolation of (x, y) samples to x = 0.
Cplx extrapolate_to_zero(std::vector<std::pair<double, Cplx>> points);

}  // namespace weaksim

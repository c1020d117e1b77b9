#pragma once

#include <variant>
#include <vector>

#include "weaksim/algebra.hpp"
#include "weaksim/constants.hpp"

namespace weaksim {

/// Superposition of equal-width normalized Gaussians,
///   psi(x) = sum_i c_i G_sigma(x - a_i),
/// with G_sigma(x) = (2 pi sigma^2)^(-1/4) exp(-x^2 / (4 sigma^2)), so the
/// position variance of a single term is sigma^2. Pairwise overlaps are
/// closed-form: <G_a|G_b> = exp(-(a-b)^2 / (8 sigma^2)), which keeps every
/// norm and moment exact. Weak coupling only ever translates centers, so this
/// represents post-coupling meters without truncation.
struct GaussianSum {
  struct Term {
    Cplx coeff;
    double center;
  };

  double sigma = defaults::kMeterSigma;
  std::vector<Term> terms;

  static GaussianSum ground(double sigma);

  /// Norm^2 via |sum c_i|^2 + sum_ij conj(c_i) c_j expm1(...): algebraically
  /// identical to the plain Gram sum but keeps full precision when the
  /// coefficients nearly cancel (dark-port states at tiny g).
  double norm_squared() const;
  double norm() const;

  /// Merge terms with bit-identical centers and drop exact-zero coefficients.
  GaussianSum consolidated() const;

  GaussianSum translated(double delta) const;
  GaussianSum scaled(const Cplx& factor) const;
};

/// <a|b> for two sums sharing the same width.
Cplx gaussian_sum_overlap(const GaussianSum& a, const GaussianSum& b);

struct PointerStats {
  double mean_q = 0.0;
  double mean_p = 0.0;
};

/// Pointer model. Two backends:
///  - analytic_gaussian: exact GaussianSum arithmetic (precision reference);
///  - grid: N-point discretized wavefunction with the momentum operator
///    realized exactly in the discrete plane-wave basis (independent
///    numerical oracle).
/// The initial state is the width-sigma Gaussian centered at 0 in both.
class MeterModel {
 public:
  enum class Kind { kAnalyticGaussian, kGrid };

  static MeterModel analytic(double sigma = defaults::kMeterSigma);
  /// dx <= 0 selects the default spacing: the grid spans +-8 sigma.
  static MeterModel grid(double sigma = defaults::kMeterSigma,
                         int points = defaults::kGridPoints, double dx = 0.0);

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  int points() const { return points_; }
  double dx() const { return dx_; }

  GaussianSum initial_gaussian() const;  // analytic kind only
  Ket initial_grid_state() const;        // grid kind only

  // Grid machinery (grid kind only). Momentum-space operations go through
  // the orthonormal plane-wave basis u_j(x_n) = exp(i p_j x_n)/sqrt(N), in
  // which the translation generator is diagonal.
  double position(int i) const;
  const std::vector<double>& momenta() const;
  std::vector<Cplx> to_momentum(const std::vector<Cplx>& psi) const;
  std::vector<Cplx> from_momentum(const std::vector<Cplx>& phi) const;
  /// exp(-i delta P) psi: exact circular translation by delta.
  Ket translate(const Ket& psi, double delta) const;
  /// P psi.
  Ket apply_momentum(const Ket& psi) const;

  /// Dense observables, materialized on demand (test/diagnostic use).
  Op q_operator() const;
  Op p_operator() const;

 private:
  MeterModel() = default;

  Kind kind_ = Kind::kAnalyticGaussian;
  double sigma_ = defaults::kMeterSigma;
  int points_ = 0;
  double dx_ = 0.0;
  std::vector<Cplx> initial_grid_;   // empty for analytic kind
  std::vector<double> momenta_;
  std::vector<Cplx> plane_waves_;    // row-major N x N, [n * N + j]
};

/// A meter wavefunction in whichever representation the model uses.
using MeterState = std::variant<GaussianSum, Ket>;

double meter_state_norm(const MeterState& state);

/// Normalized <Q> and <P>. Throws DegenerateState on a zero-norm state and
/// ContractViolation if the state representation does not match the model.
PointerStats pointer_readout(const MeterModel& model, const MeterState& state);

}  // namespace weaksim

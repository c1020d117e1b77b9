#pragma once

#include <cmath>

// Central tolerance table. Every structural check in the library reads from
// here; tests calibrate against the same constants.

namespace weaksim::tol {

// Structural identities: hermiticity, unitarity, norm preservation.
inline constexpr double kStructural = 1e-12;

// Spectral reconstruction error allowed for the Hermitian eigensolver.
inline constexpr double kSpectral = 1e-10;

// |<fin|in>| at or below this counts as orthogonal postselection.
inline constexpr double kOrthogonal = 1e-12;

// Postselected meter norm at or below this is a null postselection.
inline constexpr double kNullPostselect = 1e-14;

// |<in|S|in>| threshold for the derailment verdict (unit-norm |in>).
inline constexpr double kDerailment = 1e-10;

// |weak value| threshold for which-way presence verdicts.
inline constexpr double kPresence = 1e-8;

// Dark-port amplitude bound at g = 0.
inline constexpr double kDarkPort = 1e-14;

// Largest l2 amplitude tolerated at the outermost grid points. The default
// +-8 sigma span leaves ~1.8e-8 at the edge, so the bound sits above that.
inline constexpr double kGridBoundary = 1e-7;

// Grid meter normalization tolerance.
inline constexpr double kGridNorm = 1e-10;

// Agreement required between the two derailment computation routes.
inline constexpr double kCrossCheck = 1e-12;

}  // namespace weaksim::tol

namespace weaksim::defaults {

inline constexpr double kMeterSigma = 1.0;
inline constexpr int kGridPoints = 257;
inline constexpr double kGridHalfSpanSigmas = 8.0;

// Nested MZI conventions. Beam splitters act as [[t, i r], [i r, t]] with
// r = sqrt(1 - t^2). The outer splitter sends sqrt(1/3) of the amplitude down
// the free arm A and the rest into the inner loop, which gives the
// equal-magnitude three-path pattern (1, i, -1)/sqrt(3) on (A, B, C). The
// inner splitter/recombiner are 50:50 with zero relative phase, which makes
// port E exactly dark; the final recombiner is 50:50 so the detector port
// carries probability 1/2 at g = 0.
inline const double kOuterT = std::sqrt(1.0 / 3.0);
inline const double kInnerT = std::sqrt(0.5);
inline constexpr double kInnerPhase = 0.0;
inline const double kFinalT = std::sqrt(0.5);

// Richardson/Neville extrapolation degree cap for g sweeps.
inline constexpr int kExtrapolationMaxDegree = 4;

}  // namespace weaksim::defaults

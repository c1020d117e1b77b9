#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "weaksim/algebra.hpp"
#include "weaksim/meter.hpp"
#include "weaksim/weakmeas.hpp"

namespace weaksim {

// Stage elements. All path labels must be declared on the owning network.
// The beam splitter convention is fixed globally:
//   [a'; b'] = [[t, i r], [i r, t]] [a; b],  r = sqrt(1 - t^2).

struct BeamSplitter {
  std::string path_a;
  std::string path_b;
  double transmission;  // in [0, 1]
};

struct PhaseShifter {
  std::string path;
  double phase;  // radians
};

/// Weak von Neumann coupling of the projector |path><path| to a fresh meter.
/// Each tap owns its meter; multiple taps build a tensor product in stage
/// order. A tap with g = 0 is an exact no-op (bit-identical to no tap).
struct WeakTap {
  std::string path;
  double g;
  MeterModel meter;
};

/// Routes an amplitude to a new label (mirror / port renaming). Implemented
/// as a label swap, the unitary completion of the routing.
struct Relabel {
  std::string from;
  std::string to;
};

using Element = std::variant<BeamSplitter, PhaseShifter, WeakTap, Relabel>;

/// Staged interferometer on a path Hilbert space: one basis vector per label,
/// a source amplitude of 1, and a postselection detector port.
class PathNetwork {
 public:
  PathNetwork(std::vector<std::string> paths, std::string source,
              std::string detector);

  void add(Element element);

  const std::vector<std::string>& paths() const { return paths_; }
  const std::vector<Element>& stages() const { return stages_; }
  const std::string& source() const { return source_; }
  const std::string& detector() const { return detector_; }
  int path_index(const std::string& label) const;

  /// Named stage indices recorded by builders ("three_path", ...).
  void set_mark(const std::string& name, int stage);
  std::optional<int> mark(const std::string& name) const;
  const std::map<std::string, int>& marks() const { return marks_; }
  /// Named roles for labels ("dark_port" -> "E").
  void set_role(const std::string& role, const std::string& label);
  std::optional<std::string> role(const std::string& role) const;
  const std::map<std::string, std::string>& roles() const { return roles_; }

  /// Copy with every tap's coupling strength replaced by g.
  PathNetwork with_tap_strength(double g) const;
  std::vector<int> tap_stages() const;

 private:
  void require_declared(const std::string& label) const;

  std::vector<std::string> paths_;
  std::vector<Element> stages_;
  std::string source_;
  std::string detector_;
  std::map<std::string, int> marks_;
  std::map<std::string, std::string> roles_;
};

struct TapSpec {
  std::string arm;
  double g = 0.0;
  MeterModel meter = MeterModel::analytic();
};

/// The canonical nested MZI: the source splits into the free outer arm A and
/// the inner loop entrance; the inner splitter divides into arms B and C,
/// whose recombiner feeds ports E and F. With the defaults E is exactly dark.
/// F meets A on the final recombiner; the detector sits on port D1.
/// Stage marks: "inner_input", "three_path", "ports"; role "dark_port" = E.
PathNetwork build_nested_mzi(
    double outer_t = defaults::kOuterT, double inner_t = defaults::kInnerT,
    double inner_phase = defaults::kInnerPhase,
    const std::optional<TapSpec>& tap = std::nullopt);

/// Joint state over path (x) materialized tap meters. Meters appear in tap
/// firing order; a network whose active taps mix meter kinds is rejected.
class PathState {
 public:
  static PathState source_state(std::vector<std::string> labels, int source);

  void mix(int a, int b, double transmission);
  void shift_phase(int p, double phase);
  void swap_paths(int a, int b);
  void tap(int p, double g, const MeterModel& meter);

  const std::vector<std::string>& labels() const { return labels_; }
  int meter_count() const { return static_cast<int>(meters_.size()); }
  const MeterModel& meter(int k) const { return meters_[static_cast<size_t>(k)]; }

  /// Plain path amplitude; only defined while no meter is materialized.
  Cplx amplitude(int p) const;
  /// Meter-traced magnitude of the path-p component.
  double component_norm(int p) const;
  double total_norm() const;
  /// Pointer statistics of meter k within the (unnormalized) path-p
  /// component. Throws NullPostselection if that component vanishes.
  PointerStats postselected_readout(int p, int k) const;

  /// Meter wave attached to path p in the dense grid representation.
  std::vector<Cplx> grid_component(int p) const;

 private:
  struct ATerm {
    Cplx coeff;
    std::vector<double> centers;  // one per materialized analytic meter
  };

  double component_norm2(int p) const;
  void consolidate(int p);
  void to_dense_rep();

  std::vector<std::string> labels_;
  std::vector<MeterModel> meters_;
  bool grid_ = false;
  std::vector<std::vector<ATerm>> aterms_;  // pure & analytic representation
  std::vector<Cplx> dense_;                 // grid: path-major, then meters
  std::vector<int> mdims_;
  size_t meter_block_ = 1;
};

/// Applies stages [0, upto) in order; upto defaults to the whole network.
PathState propagate(const PathNetwork& net,
                    std::optional<int> upto_stage = std::nullopt);

/// The last stage index at which the label still carries its arm amplitude:
/// just before the final beam splitter that consumes it (phase shifters,
/// relabels and taps do not end a label's live window), or the end of the
/// network if no splitter ever consumes it.
int live_stage(const PathNetwork& net, const std::string& label);

/// Amplitude of the labeled arm, at its live stage, with every tap strength
/// set to g. Returns the complex amplitude while no meter is materialized,
/// otherwise the meter-traced magnitude (as a real Cplx).
Cplx arm_amplitude(const PathNetwork& net, const std::string& label, double g);

/// Analytic projector weak value <fin|Pi_label|in>/<fin|in> of the
/// undisturbed network (taps act as identity): forward state propagated from
/// the source, backward state pulled from the detector by adjoint stages.
WeakValueResult projector_weak_value(const PathNetwork& net,
                                     const std::string& label,
                                     std::optional<int> stage = std::nullopt);

/// Pointer route for a network with exactly one active tap: propagate,
/// postselect on the detector, read the meter, divide by g.
WeakValueResult extract_tap_weak_value(const PathNetwork& net);

struct WhichWayEntry {
  std::string label;
  Cplx weak_value;
  bool present;
};

struct WhichWayReport {
  std::vector<WhichWayEntry> arms;  // in path declaration order
  double success_probability = 0.0;
  double presence_tol = tol::kPresence;
  // Present when the network carries a tap:
  std::optional<DerailmentReport> tap_derailment;  // <psi|Pi_tap|psi> route
  std::optional<double> dark_amp_over_g;  // |amp(dark port)|/g at the tap's g
};

WhichWayReport which_way_report(const PathNetwork& net,
                                double presence_tol = tol::kPresence);

}  // namespace weaksim

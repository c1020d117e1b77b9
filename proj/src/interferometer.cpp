#include "weaksim/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "weaksim/errors.hpp"

namespace weaksim {

// -- PathNetwork ---------------------------------------------------------------

PathNetwork::PathNetwork(std::vector<std::string> paths, std::string source,
                         std::string detector)
    : paths_(std::move(paths)),
      source_(std::move(source)),
      detector_(std::move(detector)) {
  if (paths_.empty()) {
    throw ContractViolation("PathNetwork: needs at least one path");
  }
  std::set<std::string> seen;
  for (const std::string& p : paths_) {
    if (!seen.insert(p).second) {
      throw ContractViolation("PathNetwork: duplicate path label '" + p + "'");
    }
  }
  require_declared(source_);
  require_declared(detector_);
}

void PathNetwork::require_declared(const std::string& label) const {
  if (std::find(paths_.begin(), paths_.end(), label) == paths_.end()) {
    throw ContractViolation("PathNetwork: undeclared path label '" + label +
                            "'");
  }
}

int PathNetwork::path_index(const std::string& label) const {
  const auto it = std::find(paths_.begin(), paths_.end(), label);
  if (it == paths_.end()) {
    throw ContractViolation("PathNetwork: undeclared path label '" + label +
                            "'");
  }
  return static_cast<int>(it - paths_.begin());
}

void PathNetwork::add(Element element) {
  if (const auto* bs = std::get_if<BeamSplitter>(&element)) {
    require_declared(bs->path_a);
    require_declared(bs->path_b);
    if (bs->path_a == bs->path_b) {
      throw ContractViolation("BeamSplitter: needs two distinct paths");
    }
    if (!(bs->transmission >= 0.0 && bs->transmission <= 1.0)) {
      throw ContractViolation("BeamSplitter: transmission outside [0, 1]");
    }
  } else if (const auto* ps = std::get_if<PhaseShifter>(&element)) {
    require_declared(ps->path);
    if (!std::isfinite(ps->phase)) {
      throw ContractViolation("PhaseShifter: non-finite phase");
    }
  } else if (const auto* tap = std::get_if<WeakTap>(&element)) {
    require_declared(tap->path);
    if (!(tap->g >= 0.0) || !std::isfinite(tap->g)) {
      throw ContractViolation("WeakTap: coupling must be finite and >= 0");
    }
  } else if (const auto* rl = std::get_if<Relabel>(&element)) {
    require_declared(rl->from);
    require_declared(rl->to);
    if (rl->from == rl->to) {
      throw ContractViolation("Relabel: from and to must differ");
    }
  }
  stages_.push_back(std::move(element));
}

void PathNetwork::set_mark(const std::string& name, int stage) {
  marks_[name] = stage;
}

std::optional<int> PathNetwork::mark(const std::string& name) const {
  const auto it = marks_.find(name);
  if (it == marks_.end()) return std::nullopt;
  return it->second;
}

void PathNetwork::set_role(const std::string& role, const std::string& label) {
  require_declared(label);
  roles_[role] = label;
}

std::optional<std::string> PathNetwork::role(const std::string& role) const {
  const auto it = roles_.find(role);
  if (it == roles_.end()) return std::nullopt;
  return it->second;
}

PathNetwork PathNetwork::with_tap_strength(double g) const {
  PathNetwork copy = *this;
  for (Element& e : copy.stages_) {
    if (auto* tap = std::get_if<WeakTap>(&e)) tap->g = g;
  }
  return copy;
}

std::vector<int> PathNetwork::tap_stages() const {
  std::vector<int> idx;
  for (size_t i = 0; i < stages_.size(); ++i) {
    if (std::holds_alternative<WeakTap>(stages_[i])) {
      idx.push_back(static_cast<int>(i));
    }
  }
  return idx;
}

// -- Builder -------------------------------------------------------------------

PathNetwork build_nested_mzi(double outer_t, double inner_t, double inner_phase,
                             const std::optional<TapSpec>& tap) {
  if (!(outer_t > 0.0 && outer_t < 1.0) || !(inner_t > 0.0 && inner_t < 1.0)) {
    throw ContractViolation("build_nested_mzi: transmissions must be in (0,1)");
  }
  PathNetwork net({"A", "B", "C", "E", "F", "D1", "D2"}, "A", "D1");
  net.add(BeamSplitter{"A", "B", outer_t});  // A outer arm, B enters the loop
  net.set_mark("inner_input", 1);
  net.add(BeamSplitter{"B", "C", inner_t});
  net.set_mark("three_path", 2);
  net.add(PhaseShifter{"C", inner_phase});
  if (tap) {
    net.add(WeakTap{tap->arm, tap->g, tap->meter});
  }
  net.add(BeamSplitter{"B", "C", inner_t});  // inner recombiner
  net.add(Relabel{"B", "E"});
  net.add(Relabel{"C", "F"});
  net.set_mark("ports", static_cast<int>(net.stages().size()));
  net.add(BeamSplitter{"A", "F", defaults::kFinalT});
  net.add(Relabel{"A", "D1"});
  net.add(Relabel{"F", "D2"});
  net.set_role("dark_port", "E");
  return net;
}

// -- PathState -----------------------------------------------------------------

PathState PathState::source_state(std::vector<std::string> labels, int source) {
  PathState st;
  st.labels_ = std::move(labels);
  st.aterms_.resize(st.labels_.size());
  st.aterms_[static_cast<size_t>(source)].push_back(
      ATerm{Cplx(1.0, 0.0), {}});
  return st;
}

void PathState::consolidate(int p) {
  auto& terms = aterms_[static_cast<size_t>(p)];
  std::stable_sort(terms.begin(), terms.end(),
                   [](const ATerm& a, const ATerm& b) {
                     return a.centers < b.centers;
                   });
  std::vector<ATerm> merged;
  for (ATerm& t : terms) {
    if (!merged.empty() && merged.back().centers == t.centers) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged,
                [](const ATerm& t) { return t.coeff == Cplx(0.0, 0.0); });
  terms = std::move(merged);
}

void PathState::mix(int a, int b, double transmission) {
  const double t = transmission;
  const Cplx ir(0.0, std::sqrt(1.0 - t * t));
  if (grid_) {
    const size_t block = meter_block_;
    for (size_t m = 0; m < block; ++m) {
      const Cplx va = dense_[static_cast<size_t>(a) * block + m];
      const Cplx vb = dense_[static_cast<size_t>(b) * block + m];
      dense_[static_cast<size_t>(a) * block + m] = t * va + ir * vb;
      dense_[static_cast<size_t>(b) * block + m] = ir * va + t * vb;
    }
    return;
  }
  std::vector<ATerm> ta = std::move(aterms_[static_cast<size_t>(a)]);
  std::vector<ATerm> tb = std::move(aterms_[static_cast<size_t>(b)]);
  auto scaled = [](const std::vector<ATerm>& terms, const Cplx& f) {
    std::vector<ATerm> out = terms;
    for (ATerm& t : out) t.coeff *= f;
    return out;
  };
  std::vector<ATerm> na = scaled(ta, Cplx(t, 0.0));
  {
    std::vector<ATerm> cross = scaled(tb, ir);
    na.insert(na.end(), cross.begin(), cross.end());
  }
  std::vector<ATerm> nb = scaled(ta, ir);
  {
    std::vector<ATerm> keep = scaled(tb, Cplx(t, 0.0));
    nb.insert(nb.end(), keep.begin(), keep.end());
  }
  aterms_[static_cast<size_t>(a)] = std::move(na);
  aterms_[static_cast<size_t>(b)] = std::move(nb);
  consolidate(a);
  consolidate(b);
}

void PathState::shift_phase(int p, double phase) {
  const Cplx f = std::polar(1.0, phase);
  if (grid_) {
    const size_t block = meter_block_;
    for (size_t m = 0; m < block; ++m) {
      dense_[static_cast<size_t>(p) * block + m] *= f;
    }
    return;
  }
  for (ATerm& t : aterms_[static_cast<size_t>(p)]) t.coeff *= f;
}

void PathState::swap_paths(int a, int b) {
  if (grid_) {
    const size_t block = meter_block_;
    for (size_t m = 0; m < block; ++m) {
      std::swap(dense_[static_cast<size_t>(a) * block + m],
                dense_[static_cast<size_t>(b) * block + m]);
    }
    return;
  }
  std::swap(aterms_[static_cast<size_t>(a)], aterms_[static_cast<size_t>(b)]);
}

void PathState::to_dense_rep() {
  dense_.assign(labels_.size(), Cplx(0.0, 0.0));
  for (size_t p = 0; p < labels_.size(); ++p) {
    for (const ATerm& t : aterms_[p]) dense_[p] += t.coeff;
  }
  aterms_.clear();
  aterms_.resize(labels_.size());
  grid_ = true;
  meter_block_ = 1;
}

void PathState::tap(int p, double g, const MeterModel& meter) {
  if (g == 0.0) return;  // exact no-op, bit-identical to an absent tap

  if (meter.kind() == MeterModel::Kind::kGrid) {
    if (!grid_ && !meters_.empty()) {
      throw ContractViolation("PathState: cannot mix meter kinds in one network");
    }
    if (!grid_) to_dense_rep();
    const Ket m0 = meter.initial_grid_state();
    const Ket shifted = meter.translate(m0, g);
    const int n = meter.points();
    const size_t old_block = meter_block_;
    std::vector<Cplx> next(dense_.size() * static_cast<size_t>(n));
    for (size_t idx = 0; idx < dense_.size(); ++idx) {
      const int path = static_cast<int>(idx / old_block);
      const Ket& factor = (path == p) ? shifted : m0;
      for (int i = 0; i < n; ++i) {
        next[idx * static_cast<size_t>(n) + static_cast<size_t>(i)] =
            dense_[idx] * factor[i];
      }
    }
    dense_ = std::move(next);
    meters_.push_back(meter);
    mdims_.push_back(n);
    meter_block_ *= static_cast<size_t>(n);
    return;
  }

  if (grid_) {
    throw ContractViolation("PathState: cannot mix meter kinds in one network");
  }
  for (size_t q = 0; q < aterms_.size(); ++q) {
    const double center = (static_cast<int>(q) == p) ? g : 0.0;
    for (ATerm& t : aterms_[q]) t.centers.push_back(center);
  }
  meters_.push_back(meter);
}

Cplx PathState::amplitude(int p) const {
  if (!meters_.empty()) {
    throw ContractViolation(
        "PathState::amplitude: meters materialized; use component_norm");
  }
  const auto& terms = aterms_[static_cast<size_t>(p)];
  if (terms.empty()) return {0.0, 0.0};
  return terms.front().coeff;
}

double PathState::component_norm2(int p) const {
  if (grid_) {
    const size_t block = meter_block_;
    double s = 0.0;
    for (size_t m = 0; m < block; ++m) {
      s += std::norm(dense_[static_cast<size_t>(p) * block + m]);
    }
    return s;
  }
  const auto& terms = aterms_[static_cast<size_t>(p)];
  Cplx csum(0.0, 0.0);
  for (const ATerm& t : terms) csum += t.coeff;
  double total = std::norm(csum);
  for (size_t i = 0; i < terms.size(); ++i) {
    for (size_t j = i + 1; j < terms.size(); ++j) {
      double d2 = 0.0;
      for (size_t k = 0; k < meters_.size(); ++k) {
        const double d = terms[i].centers[k] - terms[j].centers[k];
        const double s = meters_[k].sigma();
        d2 += d * d / (8.0 * s * s);
      }
      total += 2.0 * (std::conj(terms[i].coeff) * terms[j].coeff).real() *
               std::expm1(-d2);
    }
  }
  return std::max(total, 0.0);
}

double PathState::component_norm(int p) const {
  return std::sqrt(component_norm2(p));
}

double PathState::total_norm() const {
  double s = 0.0;
  for (size_t p = 0; p < labels_.size(); ++p) {
    s += component_norm2(static_cast<int>(p));
  }
  return std::sqrt(s);
}

PointerStats PathState::postselected_readout(int p, int k) const {
  if (k < 0 || k >= meter_count()) {
    throw ContractViolation("postselected_readout: no such meter");
  }
  const double n2 = component_norm2(p);
  if (std::sqrt(n2) <= tol::kNullPostselect) {
    throw NullPostselection("postselected_readout: component '" +
                            labels_[static_cast<size_t>(p)] + "' vanishes");
  }

  if (!grid_) {
    const double sk = meters_[static_cast<size_t>(k)].sigma();
    const auto& terms = aterms_[static_cast<size_t>(p)];
    double num_q = 0.0;
    double num_p = 0.0;
    for (size_t i = 0; i < terms.size(); ++i) {
      num_q += std::norm(terms[i].coeff) *
               terms[i].centers[static_cast<size_t>(k)];
      for (size_t j = i + 1; j < terms.size(); ++j) {
        double d2 = 0.0;
        for (size_t m = 0; m < meters_.size(); ++m) {
          const double d = terms[i].centers[m] - terms[j].centers[m];
          const double s = meters_[m].sigma();
          d2 += d * d / (8.0 * s * s);
        }
        const double ov = std::exp(-d2);
        const Cplx cross = std::conj(terms[i].coeff) * terms[j].coeff;
        const double ai = terms[i].centers[static_cast<size_t>(k)];
        const double aj = terms[j].centers[static_cast<size_t>(k)];
        num_q += 2.0 * cross.real() * ov * 0.5 * (ai + aj);
        num_p += -2.0 * cross.imag() * (ai - aj) / (4.0 * sk * sk) * ov;
      }
    }
    return {num_q / n2, num_p / n2};
  }

  const MeterModel& meter = meters_[static_cast<size_t>(k)];
  const size_t block = meter_block_;
  const size_t base = static_cast<size_t>(p) * block;
  size_t stride = 1;
  for (size_t j = static_cast<size_t>(k) + 1; j < mdims_.size(); ++j) {
    stride *= static_cast<size_t>(mdims_[j]);
  }
  const size_t nk = static_cast<size_t>(mdims_[static_cast<size_t>(k)]);

  double num_q = 0.0;
  for (size_t m = 0; m < block; ++m) {
    const size_t ik = (m / stride) % nk;
    num_q += meter.position(static_cast<int>(ik)) * std::norm(dense_[base + m]);
  }

  double num_p = 0.0;
  std::vector<Cplx> fiber(nk);
  const size_t outer_count = block / (nk * stride);
  for (size_t outer = 0; outer < outer_count; ++outer) {
    for (size_t in = 0; in < stride; ++in) {
      const size_t start = base + outer * nk * stride + in;
      for (size_t i = 0; i < nk; ++i) fiber[i] = dense_[start + i * stride];
      const std::vector<Cplx> phi = meter.to_momentum(fiber);
      for (size_t j = 0; j < nk; ++j) {
        num_p += meter.momenta()[j] * std::norm(phi[j]);
      }
    }
  }
  return {num_q / n2, num_p / n2};
}

std::vector<Cplx> PathState::grid_component(int p) const {
  if (!grid_) {
    throw ContractViolation("grid_component: not in the dense representation");
  }
  const size_t block = meter_block_;
  return {dense_.begin() + static_cast<long>(static_cast<size_t>(p) * block),
          dense_.begin() + static_cast<long>((static_cast<size_t>(p) + 1) * block)};
}

// -- Propagation ----------------------------------------------------------------

PathState propagate(const PathNetwork& net, std::optional<int> upto_stage) {
  const int total = static_cast<int>(net.stages().size());
  const int end = upto_stage.value_or(total);
  if (end < 0 || end > total) {
    throw ContractViolation("propagate: stage index out of range");
  }
  PathState st =
      PathState::source_state(net.paths(), net.path_index(net.source()));
  for (int i = 0; i < end; ++i) {
    const Element& e = net.stages()[static_cast<size_t>(i)];
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
      st.mix(net.path_index(bs->path_a), net.path_index(bs->path_b),
             bs->transmission);
    } else if (const auto* ps = std::get_if<PhaseShifter>(&e)) {
      st.shift_phase(net.path_index(ps->path), ps->phase);
    } else if (const auto* tap = std::get_if<WeakTap>(&e)) {
      st.tap(net.path_index(tap->path), tap->g, tap->meter);
    } else {
      const auto& rl = std::get<Relabel>(e);
      st.swap_paths(net.path_index(rl.from), net.path_index(rl.to));
    }
  }
  return st;
}

int live_stage(const PathNetwork& net, const std::string& label) {
  net.path_index(label);  // validates
  int last = -1;
  for (size_t i = 0; i < net.stages().size(); ++i) {
    if (const auto* bs = std::get_if<BeamSplitter>(&net.stages()[i])) {
      if (bs->path_a == label || bs->path_b == label) {
        last = static_cast<int>(i);
      }
    }
  }
  return last < 0 ? static_cast<int>(net.stages().size()) : last;
}

Cplx arm_amplitude(const PathNetwork& net, const std::string& label, double g) {
  if (!(g >= 0.0)) {
    throw ContractViolation("arm_amplitude: g must be nonnegative");
  }
  const PathNetwork swept = net.with_tap_strength(g);
  const PathState st = propagate(swept, live_stage(swept, label));
  const int p = swept.path_index(label);
  if (st.meter_count() == 0) return st.amplitude(p);
  return {st.component_norm(p), 0.0};
}

// -- Weak values ------------------------------------------------------------------

namespace {

// Pure path-space propagation with taps acting as identity (the undisturbed
// network that analytic weak values refer to).
std::vector<Cplx> forward_path_state(const PathNetwork& net, int upto) {
  std::vector<Cplx> amps(net.paths().size(), Cplx(0.0, 0.0));
  amps[static_cast<size_t>(net.path_index(net.source()))] = Cplx(1.0, 0.0);
  for (int i = 0; i < upto; ++i) {
    const Element& e = net.stages()[static_cast<size_t>(i)];
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
      const int a = net.path_index(bs->path_a);
      const int b = net.path_index(bs->path_b);
      const double t = bs->transmission;
      const Cplx ir(0.0, std::sqrt(1.0 - t * t));
      const Cplx va = amps[static_cast<size_t>(a)];
      const Cplx vb = amps[static_cast<size_t>(b)];
      amps[static_cast<size_t>(a)] = t * va + ir * vb;
      amps[static_cast<size_t>(b)] = ir * va + t * vb;
    } else if (const auto* ps = std::get_if<PhaseShifter>(&e)) {
      amps[static_cast<size_t>(net.path_index(ps->path))] *=
          std::polar(1.0, ps->phase);
    } else if (const auto* rl = std::get_if<Relabel>(&e)) {
      std::swap(amps[static_cast<size_t>(net.path_index(rl->from))],
                amps[static_cast<size_t>(net.path_index(rl->to))]);
    }
    // WeakTap: identity on the path factor.
  }
  return amps;
}

std::vector<Cplx> backward_path_state(const PathNetwork& net, int from) {
  std::vector<Cplx> amps(net.paths().size(), Cplx(0.0, 0.0));
  amps[static_cast<size_t>(net.path_index(net.detector()))] = Cplx(1.0, 0.0);
  for (int i = static_cast<int>(net.stages().size()) - 1; i >= from; --i) {
    const Element& e = net.stages()[static_cast<size_t>(i)];
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
      const int a = net.path_index(bs->path_a);
      const int b = net.path_index(bs->path_b);
      const double t = bs->transmission;
      const Cplx mir(0.0, -std::sqrt(1.0 - t * t));
      const Cplx va = amps[static_cast<size_t>(a)];
      const Cplx vb = amps[static_cast<size_t>(b)];
      amps[static_cast<size_t>(a)] = t * va + mir * vb;
      amps[static_cast<size_t>(b)] = mir * va + t * vb;
    } else if (const auto* ps = std::get_if<PhaseShifter>(&e)) {
      amps[static_cast<size_t>(net.path_index(ps->path))] *=
          std::polar(1.0, -ps->phase);
    } else if (const auto* rl = std::get_if<Relabel>(&e)) {
      std::swap(amps[static_cast<size_t>(net.path_index(rl->from))],
                amps[static_cast<size_t>(net.path_index(rl->to))]);
    }
  }
  return amps;
}

}  // namespace

WeakValueResult projector_weak_value(const PathNetwork& net,
                                     const std::string& label,
                                     std::optional<int> stage) {
  const int p = net.path_index(label);
  const int s = stage.value_or(live_stage(net, label));
  if (s < 0 || s > static_cast<int>(net.stages().size())) {
    throw ContractViolation("projector_weak_value: stage out of range");
  }
  const std::vector<Cplx> fwd = forward_path_state(net, s);
  const std::vector<Cplx> bwd = backward_path_state(net, s);
  Cplx denom(0.0, 0.0);
  for (size_t i = 0; i < fwd.size(); ++i) denom += std::conj(bwd[i]) * fwd[i];
  if (std::abs(denom) <= tol::kOrthogonal) {
    throw OrthogonalPostselection(
        "projector_weak_value: detector port has zero amplitude");
  }
  const Cplx wv =
      std::conj(bwd[static_cast<size_t>(p)]) * fwd[static_cast<size_t>(p)] / denom;
  return {wv, WeakValueResult::Method::kAnalytic, 0.0, 0.0};
}

WeakValueResult extract_tap_weak_value(const PathNetwork& net) {
  const std::vector<int> taps = net.tap_stages();
  if (taps.size() != 1) {
    throw ContractViolation(
        "extract_tap_weak_value: network needs exactly one tap");
  }
  const auto& tap =
      std::get<WeakTap>(net.stages()[static_cast<size_t>(taps.front())]);
  if (!(tap.g > 0.0)) {
    throw ContractViolation("extract_tap_weak_value: tap coupling must be > 0");
  }
  const double sigma = tap.meter.sigma();
  const int detector = net.path_index(net.detector());

  const auto value_at = [&](double g) -> Cplx {
    const PathState st = propagate(net.with_tap_strength(g));
    const PointerStats stats = st.postselected_readout(detector, 0);
    return {stats.mean_q / g, 2.0 * sigma * sigma * stats.mean_p / g};
  };
  const Cplx at_g = value_at(tap.g);
  const Cplx at_half = value_at(0.5 * tap.g);
  return {at_g, WeakValueResult::Method::kPointer, tap.g,
          std::abs(at_g - at_half)};
}

WhichWayReport which_way_report(const PathNetwork& net, double presence_tol) {
  WhichWayReport report;
  report.presence_tol = presence_tol;
  for (const std::string& label : net.paths()) {
    const Cplx wv = projector_weak_value(net, label).value;
    report.arms.push_back({label, wv, std::abs(wv) > presence_tol});
  }

  const PathState full = propagate(net);
  const double det_norm = full.component_norm(net.path_index(net.detector()));
  report.success_probability = det_norm * det_norm;

  const std::vector<int> taps = net.tap_stages();
  if (!taps.empty()) {
    const auto& tap =
        std::get<WeakTap>(net.stages()[static_cast<size_t>(taps.front())]);
    const std::vector<Cplx> before = forward_path_state(net, taps.front());
    const Op pi = projector_onto(
        Ket::basis(static_cast<int>(net.paths().size()),
                   net.path_index(tap.path)));
    report.tap_derailment = derailment_check(pi, Ket(before));
    if (tap.g > 0.0) {
      if (const auto dark = net.role("dark_port")) {
        report.dark_amp_over_g =
            std::abs(arm_amplitude(net, *dark, tap.g)) / tap.g;
      }
    }
  }
  return report;
}

}  // namespace weaksim

// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.
//
// Usage: acceptance --scenario-dir <dir> --golden-dir <dir>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "weaksim/interferometer.hpp"
#include "weaksim/scenario.hpp"
#include "weaksim/weakmeas.hpp"

using namespace weaksim;

namespace {

std::string g_scenario_dir = "scenarios";
std::string g_golden_dir = "tests/golden";

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

Op pauli_x() { return Op(2, {Cplx(0, 0), Cplx(1, 0), Cplx(1, 0), Cplx(0, 0)}); }
Op pauli_z() { return Op(2, {Cplx(1, 0), Cplx(0, 0), Cplx(0, 0), Cplx(-1, 0)}); }

Ket plus_x() {
  const double r = 1.0 / std::sqrt(2.0);
  return Ket({Cplx(r, 0), Cplx(r, 0)});
}

Ket random_ket(int dim, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Cplx> amps(static_cast<size_t>(dim));
  for (Cplx& a : amps) a = Cplx(gauss(rng), gauss(rng));
  return Ket(std::move(amps)).normalized();
}

Op random_hermitian(int dim, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Cplx> e(static_cast<size_t>(dim) * dim);
  for (int r = 0; r < dim; ++r) {
    e[static_cast<size_t>(r) * dim + r] = Cplx(gauss(rng), 0.0);
    for (int c = r + 1; c < dim; ++c) {
      const Cplx v(gauss(rng), gauss(rng));
      e[static_cast<size_t>(r) * dim + c] = v;
      e[static_cast<size_t>(c) * dim + r] = std::conj(v);
    }
  }
  return Op(dim, std::move(e));
}

std::vector<Ket> random_orthonormal_basis(int dim, std::mt19937& rng) {
  std::vector<Ket> basis;
  while (static_cast<int>(basis.size()) < dim) {
    Ket v = random_ket(dim, rng);
    std::vector<Cplx> amps = v.amps();
    for (const Ket& b : basis) {
      const Cplx ov = inner(b, v);
      for (int i = 0; i < dim; ++i) amps[static_cast<size_t>(i)] -= ov * b[i];
    }
    Ket reduced{amps};
    if (reduced.norm() < 1e-6) continue;
    basis.push_back(reduced.normalized());
  }
  return basis;
}

struct Scenario {
  Op s;
  Ket in;
  Ket fin;
};

Scenario random_scenario(std::mt19937& rng, int min_dim, int max_dim,
                         double min_overlap) {
  while (true) {
    const int dim =
        min_dim + static_cast<int>(rng() % static_cast<unsigned>(
                                             max_dim - min_dim + 1));
    Op s = random_hermitian(dim, rng);
    Ket in = random_ket(dim, rng);
    Ket fin = random_ket(dim, rng);
    if (std::abs(inner(fin, in)) > min_overlap) {
      return {std::move(s), std::move(in), std::move(fin)};
    }
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// -- Criteria -------------------------------------------------------------------

// C1: canonical derailment case, exact expectation and unit displacement norm.
Outcome c1_derailment(double& ms) {
  const auto t0 = std::chrono::steady_clock::now();
  const DerailmentReport rep = derailment_check(pauli_z(), plus_x());
  ms = std::chrono::duration<double, std::milli>(
           std::chrono::steady_clock::now() - t0)
           .count();
  Outcome out;
  out.require(std::abs(rep.expectation) <= 1e-14,
              "<in|S|in> = " + std::to_string(std::abs(rep.expectation)));
  out.require(std::abs(rep.s_in_norm - 1.0) <= 1e-12, "|S in| != 1");
  out.require(rep.derailed, "not flagged as derailed");
  out.require(ms < 1.0, "runtime " + std::to_string(ms) + " ms >= 1 ms");
  return out;
}

// C2: additivity ambiguity for sigma_z via (sigma_z +- sigma_x).
Outcome c2_additivity(double&) {
  const Op s1 = pauli_z() + pauli_x();
  const Op s2 = pauli_z() - pauli_x();
  const Ket in = plus_x();
  const Ket fin = Ket::basis(2, 0);
  const AdditivityReport rep = additivity_report(s1, s2, in, fin);
  const Cplx half_sum = 0.5 * (rep.wv1.value + rep.wv2.value);
  const Cplx direct = analytic_weak_value(pauli_z(), in, fin).value;

  Outcome out;
  out.require(std::abs(rep.wv1.value - Cplx(2, 0)) <= 1e-12, "(s_z+s_x)_w != 2");
  out.require(std::abs(rep.wv2.value - Cplx(0, 0)) <= 1e-12, "(s_z-s_x)_w != 0");
  out.require(std::abs(half_sum - Cplx(1, 0)) <= 1e-12, "half-sum != 1");
  out.require(std::abs(direct - Cplx(1, 0)) <= 1e-12, "(s_z)_w != 1");
  out.require(!rep.derail1.derailed && !rep.derail2.derailed,
              "parts flagged derailed");
  out.require(derailment_check(pauli_z(), in).derailed,
              "sigma_z not flagged derailed");
  return out;
}

// C3: divide-by-g extraction converges to the analytic weak value.
Outcome c3_extraction(double& ms) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(101);
  const MeterModel meter = MeterModel::analytic(1.0);
  const double g = 1e-3;
  int bound_failures = 0;
  std::vector<double> ratios;
  for (int i = 0; i < 200; ++i) {
    const Scenario sc = random_scenario(rng, 2, 4, 0.1);
    const Cplx analytic = analytic_weak_value(sc.s, sc.in, sc.fin).value;
    const Cplx at_g = extract_weak_value(sc.s, sc.in, sc.fin, meter, g).value;
    const Cplx at_half =
        extract_weak_value(sc.s, sc.in, sc.fin, meter, 0.5 * g).value;
    const double err_g = std::abs(at_g - analytic);
    const double err_half = std::abs(at_half - analytic);
    if (err_g > 0.02 * std::abs(analytic) + 0.02) ++bound_failures;
    ratios.push_back(err_half > 0.0 ? err_g / err_half : 1e300);
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = ratios[ratios.size() / 2];
  ms = std::chrono::duration<double, std::milli>(
           std::chrono::steady_clock::now() - t0)
           .count();

  Outcome out;
  out.require(bound_failures == 0,
              std::to_string(bound_failures) + "/200 outside the error bound");
  out.require(median >= 1.8,
              "median halving ratio " + std::to_string(median) + " < 1.8");
  out.require(ms < 30000.0, "runtime over 30 s");
  out.detail = "median halving ratio " + std::to_string(median);
  return out;
}

// C4: |exact - first_order| scales quadratically in g.
Outcome c4_first_order(double&) {
  std::mt19937 rng(103);
  const MeterModel meter = MeterModel::grid(1.0, 129, 0.125);
  Outcome out;
  int inside = 0;
  for (int i = 0; i < 100; ++i) {
    const int dim = 2 + static_cast<int>(rng() % 3);
    const Op s = random_hermitian(dim, rng);
    const Ket in = random_ket(dim, rng);
    const auto residual = [&](double g) {
      const auto exact =
          std::get<JointKet>(exact_coupled_joint(in, meter, s, g).state);
      const JointKet fo = first_order_joint(in, meter, s, g);
      return (exact.as_ket() - fo.as_ket()).norm();
    };
    const double ratio = residual(1e-3) / residual(5e-4);
    if (ratio >= 3.5 && ratio <= 4.5) ++inside;
  }
  out.require(inside == 100, std::to_string(100 - inside) +
                                 "/100 remainder ratios outside [3.5, 4.5]");
  return out;
}

// C5: the footnote's f(x) = 2x + 5x^2 discontinuity demo.
Outcome c5_footnote(double&) {
  SweepProbe probe;
  probe.divide_by_g = true;
  probe.raw_at = [](double x) -> Cplx { return {2.0 * x + 5.0 * x * x, 0.0}; };
  const SweepResult sweep = g_sweep(probe, {1e-1, 1e-2, 1e-3});

  Outcome out;
  const double expected[] = {2.5, 2.05, 2.005};
  for (size_t i = 0; i < 3; ++i) {
    out.require(std::abs(sweep.rows[i].divided - Cplx(expected[i], 0)) <= 1e-12,
                "divided value " + std::to_string(i) + " off");
  }
  out.require(std::abs(sweep.extrapolated_limit - Cplx(2, 0)) <= 1e-9,
              "extrapolated limit not 2");
  out.require(!sweep.endpoint.has_value(), "endpoint should be UNDEFINED");
  out.require(sweep.discontinuity_flag, "discontinuity flag not set");
  return out;
}

// C6: nested-MZI dark port, proportionality, and divide-by-g discontinuity.
Outcome c6_nested_mzi(double& ms) {
  const auto t0 = std::chrono::steady_clock::now();
  const PathNetwork net =
      build_nested_mzi(defaults::kOuterT, defaults::kInnerT,
                       defaults::kInnerPhase,
                       TapSpec{"B", 1e-3, MeterModel::analytic(1.0)});

  Outcome out;
  out.require(std::abs(arm_amplitude(net, "E", 0.0)) <= 1e-14,
              "dark port not dark at g = 0");

  std::vector<double> ratios;
  for (double g : {1e-5, 1e-4, 1e-3}) {
    const double m = std::abs(arm_amplitude(net, "E", g));
    out.require(m > 0.0, "E amplitude vanished at g > 0");
    ratios.push_back(m / g);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  out.require(*hi / *lo <= 1.01, "m(g)/g varies by more than 1%");

  SweepProbe probe;
  probe.divide_by_g = true;
  probe.raw_at = [&net](double g) -> Cplx {
    return {std::abs(arm_amplitude(net, "E", g)), 0.0};
  };
  const SweepResult sweep = g_sweep(probe, {1e-5, 1e-4, 1e-3});
  out.require(std::abs(sweep.extrapolated_limit) > 1e-3,
              "extrapolated m(g)/g limit vanishes");
  out.require(sweep.discontinuity_flag, "discontinuity flag not set");

  ms = std::chrono::duration<double, std::milli>(
           std::chrono::steady_clock::now() - t0)
           .count();
  out.require(ms < 5000.0, "runtime over 5 s");
  out.detail = "m(g)/g -> " + std::to_string(std::abs(sweep.extrapolated_limit));
  return out;
}

// C7: projector which-way consistency in the nested MZI.
Outcome c7_which_way(double&) {
  const PathNetwork plain = build_nested_mzi();
  Outcome out;
  out.require(std::abs(projector_weak_value(plain, "E").value) <= 1e-10,
              "(Pi_E)_w != 0");
  const Cplx analytic = projector_weak_value(plain, "B").value;
  out.require(std::abs(analytic) > 1e-3, "(Pi_B)_w vanishes");

  const PathNetwork tapped =
      build_nested_mzi(defaults::kOuterT, defaults::kInnerT,
                       defaults::kInnerPhase,
                       TapSpec{"B", 1e-4, MeterModel::analytic(1.0)});
  const Cplx pointer = extract_tap_weak_value(tapped).value;
  out.require(std::abs(pointer - analytic) <= 0.01 * std::abs(analytic),
              "pointer (Pi_B)_w off by more than 1%");
  return out;
}

// C8: algebraic law suite on random instances.
Outcome c8_laws(double& ms) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(107);
  std::uniform_real_distribution<double> angle(0.0, 6.28);
  std::uniform_real_distribution<double> scale(0.2, 3.0);
  Outcome out;

  int additivity_bad = 0;
  int linearity_bad = 0;
  int identity_bad = 0;
  int phase_bad = 0;
  int completeness_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const Scenario sc = random_scenario(rng, 2, 4, 0.1);

    const Op s2 = random_hermitian(sc.s.dim(), rng);
    const Cplx lhs = analytic_weak_value(sc.s + s2, sc.in, sc.fin).value;
    const Cplx rhs = analytic_weak_value(sc.s, sc.in, sc.fin).value +
                     analytic_weak_value(s2, sc.in, sc.fin).value;
    if (std::abs(lhs - rhs) > 1e-10) ++additivity_bad;

    const double alpha = scale(rng);
    const Cplx scaled =
        analytic_weak_value(Cplx(alpha, 0) * sc.s, sc.in, sc.fin).value;
    if (std::abs(scaled - Cplx(alpha, 0) *
                              analytic_weak_value(sc.s, sc.in, sc.fin).value) >
        1e-10) {
      ++linearity_bad;
    }

    if (std::abs(analytic_weak_value(Op::identity(sc.s.dim()), sc.in, sc.fin)
                     .value -
                 Cplx(1, 0)) > 1e-10) {
      ++identity_bad;
    }

    const Cplx cin = std::polar(scale(rng), angle(rng));
    const Cplx cfin = std::polar(scale(rng), angle(rng));
    if (std::abs(analytic_weak_value(sc.s, cin * sc.in, cfin * sc.fin).value -
                 analytic_weak_value(sc.s, sc.in, sc.fin).value) > 1e-10) {
      ++phase_bad;
    }

    const int dim = 2 + static_cast<int>(rng() % 5);
    const std::vector<Ket> basis = random_orthonormal_basis(dim, rng);
    Ket cin2 = random_ket(dim, rng);
    Ket cfin2 = random_ket(dim, rng);
    if (std::abs(inner(cfin2, cin2)) <= 0.1) continue;
    Cplx sum(0, 0);
    for (const Ket& b : basis) {
      sum += analytic_weak_value(projector_onto(b), cin2, cfin2).value;
    }
    if (std::abs(sum - Cplx(1, 0)) > 1e-10) ++completeness_bad;
  }
  ms = std::chrono::duration<double, std::milli>(
           std::chrono::steady_clock::now() - t0)
           .count();

  out.require(additivity_bad == 0, "additivity violations");
  out.require(linearity_bad == 0, "linearity violations");
  out.require(identity_bad == 0, "(I)_w violations");
  out.require(phase_bad == 0, "phase/scale invariance violations");
  out.require(completeness_bad == 0, "projector completeness violations");
  out.require(ms < 60000.0, "runtime over 60 s");
  return out;
}

// C9: analytic vs grid meter backends agree.
Outcome c9_cross_oracle(double&) {
  std::mt19937 rng(109);
  const MeterModel analytic = MeterModel::analytic(1.0);
  const MeterModel grid = MeterModel::grid(1.0);
  Outcome out;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Scenario sc = random_scenario(rng, 2, 4, 0.1);
    const Cplx va =
        extract_weak_value(sc.s, sc.in, sc.fin, analytic, 1e-3).value;
    const Cplx vg = extract_weak_value(sc.s, sc.in, sc.fin, grid, 1e-3).value;
    worst = std::max(worst, std::abs(va - vg));
  }
  out.require(worst <= 1e-6,
              "max backend disagreement " + std::to_string(worst));
  out.detail = "max disagreement " + std::to_string(worst);
  return out;
}

// C10: the bundled scenarios reproduce their committed outputs byte for byte.
Outcome c10_golden(double& ms) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::pair<const char*, const char*> cases[] = {
      {"derailment.scenario", "derailment.csv"},
      {"additivity.scenario", "additivity.csv"},
      {"footnote_limit.scenario", "footnote_limit.csv"},
      {"nested_mzi.scenario", "nested_mzi.csv"},
  };
  Outcome out;
  for (const auto& [scenario, golden] : cases) {
    const std::string text = read_file(g_scenario_dir + "/" + scenario);
    const std::string expected = read_file(g_golden_dir + "/" + golden);
    const std::string first =
        emit(run_scenario(parse_scenario(text)), OutputFormat::kCsv);
    const std::string second =
        emit(run_scenario(parse_scenario(text)), OutputFormat::kCsv);
    out.require(first == second,
                std::string(scenario) + ": consecutive runs differ");
    out.require(first == expected,
                std::string(scenario) + ": output differs from golden file");
  }
  ms = std::chrono::duration<double, std::milli>(
           std::chrono::steady_clock::now() - t0)
           .count();
  out.require(ms < 10000.0, "runtime over 10 s");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--scenario-dir") g_scenario_dir = argv[i + 1];
    if (flag == "--golden-dir") g_golden_dir = argv[i + 1];
  }

  using Criterion = std::function<Outcome(double&)>;
  const std::vector<std::pair<std::string, Criterion>> criteria = {
      {"C1 derailment canonical case", c1_derailment},
      {"C2 additivity ambiguity", c2_additivity},
      {"C3 extraction convergence", c3_extraction},
      {"C4 first-order remainder", c4_first_order},
      {"C5 footnote limit demo", c5_footnote},
      {"C6 nested-MZI dark port discontinuity", c6_nested_mzi},
      {"C7 projector which-way consistency", c7_which_way},
      {"C8 algebraic law suite", c8_laws},
      {"C9 meter-backend cross-oracle", c9_cross_oracle},
      {"C10 CLI determinism and golden files", c10_golden},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    double ms = 0.0;
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      out = fn(ms);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    if (ms == 0.0) {
      ms = std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
               .count();
    }
    std::printf("[%s] %s (%.2f ms)%s%s\n", out.pass ? "PASS" : "FAIL",
                name.c_str(), ms, out.detail.empty() ? "" : ": ",
                out.detail.c_str());
    if (!out.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}

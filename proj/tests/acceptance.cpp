// Acceptance suite: one PASS/FAIL line per criterion with timings.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "genqm/diagnostics.hpp"
#include "genqm/dynamics.hpp"
#include "genqm/operators.hpp"
#include "genqm/spectra.hpp"
#include "support.hpp"

using namespace genqm;
using genqm::testing::make_problem;
using genqm::testing::max_abs_diff;
using genqm::testing::Setup;

namespace {

constexpr complex kI(0.0, 1.0);
constexpr double kPi = std::numbers::pi;

class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failures_ += (failures_.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  bool pass() const { return pass_; }
  std::string text() const { return failures_.empty() ? notes_ : notes_ + " | failed: " + failures_; }

 private:
  bool pass_ = true;
  std::string notes_;
  std::string failures_;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(Verdict&)> body;
};

std::vector<EigenPair> spectrum(const Setup& s, std::size_t count) {
  const SampledProfiles p = make_problem(s);
  return solve_spectrum(assemble_hamiltonian(p), count, p);
}

void box(Verdict& v) {
  const auto pairs = spectrum({.xmin = 0, .xmax = 1, .points = 2001}, 5);
  double worst = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const double n = k + 1.0;
    worst = std::max(worst, std::fabs(pairs[k].energy.real() / (n * n * kPi * kPi / 2) - 1));
  }
  v.note("max rel err " + fmt("%.2e", worst));
  v.require(worst <= 1e-3, "E_n within 0.1%");
}

void oscillator(Verdict& v) {
  const auto pairs = spectrum({.V = "x^2/2", .xmin = -10, .xmax = 10, .points = 2001}, 5);
  double worst = 0.0;
  for (std::size_t k = 0; k < 5; ++k) worst = std::max(worst, std::fabs(pairs[k].energy.real() - (k + 0.5)));
  v.note("max abs err " + fmt("%.2e", worst));
  v.require(worst <= 1e-3, "E_n within 1e-3");
}

void generalized(Verdict& v) {
  const double X = 200;
  const auto pairs = spectrum({.A = "1 + x^2", .xmin = -X, .xmax = X, .points = 40001}, 3);
  const double L = 2 * std::atan(X);
  double worst = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double n = k + 1.0;
    worst = std::max(worst, std::fabs(pairs[k].energy.real() / (kPi * kPi * n * n / (2 * L * L)) - 1));
  }
  v.note("max rel err " + fmt("%.2e", worst));
  v.require(worst <= 5e-3, "E_1..E_3 within 0.5%");
}

void representations(Verdict& v) {
  const Setup base{.A = "1 + x^2", .V = "x^2/2", .xmin = -5, .xmax = 5};
  std::vector<double> previous;
  double worst_ratio_dev = 0.0;
  for (std::size_t n : {1001u, 2001u, 4001u}) {
    Setup s = base;
    s.points = n;
    const auto psi = spectrum(s, 3);
    s.representation = Representation::Phi;
    const auto phi = spectrum(s, 3);
    std::vector<double> gaps;
    for (std::size_t k = 0; k < 3; ++k) gaps.push_back(std::abs(psi[k].energy - phi[k].energy));
    if (!previous.empty()) {
      for (std::size_t k = 0; k < 3; ++k) {
        const double ratio = previous[k] / gaps[k];
        worst_ratio_dev = std::max(worst_ratio_dev, std::fabs(ratio / 4 - 1));
      }
    }
    previous = gaps;
  }
  v.note("gap ratio within " + fmt("%.1f%%", 100 * worst_ratio_dev) + " of 4");
  v.require(worst_ratio_dev <= 0.25, "gap ratio 4 +- 25%");

  double worst_rho = 0.0;
  for (Mode mode : {Mode::Hermitian, Mode::PT}) {
    Setup s = base;
    s.points = 801;
    s.mode = mode;
    if (mode == Mode::PT) s.V = "x^2 + i*x";
    const SampledProfiles p = make_problem(s);
    const auto pairs = solve_spectrum(assemble_hamiltonian(p), 3, p);
    for (const EigenPair& e : pairs) {
      const WaveState w = make_wave_state(e.state, p.grid, mode);
      const Field phi = transform_representation(e.state, p, Transform::PsiToPhi);
      const WaveState wphi = make_wave_state(phi, p.grid, mode);
      worst_rho = std::max(worst_rho, max_abs_diff(probability_density(w, p), probability_density(wphi, p)));
    }
  }
  v.note("rho gap " + fmt("%.1e", worst_rho));
  v.require(worst_rho <= 1e-12, "nodewise rho equality");
}

void hermiticity(Verdict& v) {
  bool exact = true;
  for (const char* A : {"1", "1 + x^2", "cosh(x/2)", "2 + sin(3*x)"}) {
    for (const char* V : {"0", "x^2/2", "exp(-x^2) - x^4"}) {
      const SampledProfiles p = make_problem({.A = A, .V = V, .xmin = -3, .xmax = 2, .points = 301});
      const TridiagonalOperator H = assemble_hamiltonian(p);
      exact = exact && H.symmetric && H.symmetry_gap() == 0.0 && H.hermiticity_gap() == 0.0;
    }
  }
  v.require(exact, "psi-form matrix exactly symmetric");

  const SampledProfiles p = make_problem({.xmin = -20, .xmax = 20, .points = 801});
  const TridiagonalOperator H = assemble_hamiltonian(p);
  const EvolutionResult out = evolve(p, H, make_initial_state(GaussianPacket{0.0, 1.0, 1.0}, p, H), 0.01, 1000, 1000);
  const double drift = std::abs(out.series.back().total_probability - out.series.front().total_probability);
  v.note("norm drift " + fmt("%.1e", drift));
  v.require(drift <= 1e-10, "norm drift <= 1e-10");
}

double final_residual(const Setup& s, const GaussianPacket& g, double dt) {
  const SampledProfiles p = make_problem(s);
  const TridiagonalOperator H = assemble_hamiltonian(p);
  const std::size_t steps = static_cast<std::size_t>(std::lround(1.0 / dt));
  return evolve(p, H, make_initial_state(g, p, H), dt, steps, steps).series.back().continuity_residual_max;
}

void continuity(Verdict& v) {
  const double herm = final_residual({.xmin = -20, .xmax = 20, .points = 801}, GaussianPacket{0, 1, 1}, 0.025) /
                      final_residual({.xmin = -20, .xmax = 20, .points = 1601}, GaussianPacket{0, 1, 1}, 0.0125);
  const Setup pt{.V = "x^2 + i*x", .xmin = -12, .xmax = 12, .points = 481, .mode = Mode::PT, .mass = 0.5};
  Setup pt_fine = pt;
  pt_fine.points = 961;
  const double ptr = final_residual(pt, GaussianPacket{0, 1, 0}, 0.025) /
                     final_residual(pt_fine, GaussianPacket{0, 1, 0}, 0.0125);
  v.note("hermitian ratio " + fmt("%.2f", herm) + ", PT ratio " + fmt("%.2f", ptr));
  v.require(herm >= 3 && herm <= 5, "hermitian ratio in [3, 5]");
  v.require(ptr >= 3 && ptr <= 5, "PT ratio in [3, 5]");
}

void pt_conservation(Verdict& v) {
  const SampledProfiles p =
      make_problem({.V = "x^2 + i*x", .xmin = -10, .xmax = 10, .points = 401, .mode = Mode::PT, .mass = 0.5});
  const TridiagonalOperator H = assemble_hamiltonian(p);
  double worst = 0.0;
  for (const InitialCondition& ic : {InitialCondition{EigenstateIndex{0}}, InitialCondition{GaussianPacket{0, 1, 0}}}) {
    const EvolutionResult out = evolve(p, H, make_initial_state(ic, p, H), 0.005, 1000, 50);
    for (const DiagnosticsReport& r : out.series) {
      worst = std::max(worst, std::abs(r.total_probability - out.series.front().total_probability));
    }
  }
  v.note("PT norm drift " + fmt("%.1e", worst));
  v.require(worst <= 1e-8, "PT norm constant to 1e-8");

  const SampledProfiles q =
      make_problem({.A = "1 + 0.1*x^2", .V = "x^2 + 2*i*x", .xmin = -8, .xmax = 8, .points = 321, .mode = Mode::PT});
  const TridiagonalOperator Hq = assemble_hamiltonian(q);
  const double dt = 0.01;
  const EvolutionResult out = evolve(q, Hq, make_initial_state(GaussianPacket{0, 1, 0}, q, Hq), dt, 1000, 1000);
  const WaveState& end = out.final_state.fields;
  const double gap = max_abs_diff(pt_reflect(end.psi, q.grid).values, end.psi_sharp->values);
  v.note("PT image gap " + fmt("%.1e", gap));
  v.require(gap <= dt * dt * out.final_state.t, "psi# matches PT image to dt^2 t");
}

void pt_spectrum(Verdict& v) {
  const auto pairs =
      spectrum({.V = "x^2 + i*x", .xmin = -12, .xmax = 12, .points = 1501, .mode = Mode::PT, .mass = 0.5}, 2);
  const double e0 = pairs[0].energy.real(), e1 = pairs[1].energy.real();
  const double im = std::max(std::fabs(pairs[0].energy.imag()), std::fabs(pairs[1].energy.imag()));
  v.note("E0 " + fmt("%.6f", e0) + ", E1 " + fmt("%.6f", e1) + ", max |Im| " + fmt("%.1e", im));
  v.require(std::fabs(e0 - 1.25) <= 1e-3 && std::fabs(e1 - 3.25) <= 1e-3, "E0, E1 within 1e-3");
  v.require(im <= 1e-6, "|Im E| <= 1e-6");
}

void vanishing_current(Verdict& v) {
  double worst = 0.0;
  {
    const SampledProfiles p = make_problem({.A = "1 + x^2", .V = "x^2/2", .xmin = -6, .xmax = 6, .points = 601});
    for (const EigenPair& e : solve_spectrum(assemble_hamiltonian(p), 4, p)) {
      for (const complex& j : current_density(make_wave_state(e.state, p.grid, p.mode), p)) {
        worst = std::max(worst, std::abs(j));
      }
    }
  }
  {
    const SampledProfiles p =
        make_problem({.A = "1 + 0.1*i*x", .V = "x^2", .xmin = -6, .xmax = 6, .points = 601, .mode = Mode::PT});
    Field psi{CVector(p.points()), Representation::Psi};
    for (std::size_t i = 1; i + 1 < p.points(); ++i) {
      const double x = p.grid.node(i);
      psi[i] = std::exp(-x * x / 2) * complex(1.0 + 0.3 * x, 0.2 * x * x);
    }
    const WaveState w{psi, psi};
    for (const complex& j : current_density(w, p)) worst = std::max(worst, std::abs(j));
  }
  v.note("max |J| " + fmt("%.1e", worst));
  v.require(worst <= 1e-14, "J = 0 to machine precision");
}

void bookkeeping(Verdict& v) {
  struct Case {
    const char* label;
    Setup setup;
    std::optional<complex> shift;
  };
  const std::vector<Case> cases = {
      {"oscillator", {.V = "x^2/2", .xmin = -7, .xmax = 7, .points = 70001}, {}},
      {"A=1+0.2x^2", {.A = "1 + 0.2*x^2", .V = "x^2/2", .xmin = -8, .xmax = 8, .points = 80001}, {}},
      {"PT refined",
       {.V = "x^2 + i*x", .xmin = -10, .xmax = 10, .points = 100001, .mode = Mode::PT, .mass = 0.5},
       complex(1.2, 0)},
  };
  for (const Case& c : cases) {
    const SampledProfiles p = make_problem(c.setup);
    const TridiagonalOperator H = assemble_hamiltonian(p);
    const EigenPair e = c.shift ? refine_eigenpair(H, *c.shift, p) : solve_spectrum(H, 1, p)[0];
    const WaveState w = make_wave_state(e.state, p.grid, p.mode);
    Field rate = e.state;
    for (complex& z : rate.values) z *= -kI * e.energy / p.constants.hbar;
    const EnergyReport r = energy_report(w, H, p, &rate);
    const double gap = std::abs(r.energy_functional - r.expectation_H);
    const double h_off = std::abs(r.expectation_H - e.energy);
    const double f_off = std::abs(r.energy_functional - e.energy);
    const double lagrangian = std::abs(r.lagrangian_integral);
    const double allowed = 10 * e.residual + 1e-14 * std::abs(e.energy);
    const std::string label = c.label;
    v.note(label + ": functional-<H> " + fmt("%.1e", gap) + ", <H>-E " + fmt("%.1e", h_off) + ", functional-E " +
           fmt("%.1e", f_off) + ", residual " + fmt("%.1e", e.residual) + ", lagrangian " + fmt("%.1e", lagrangian));
    v.require(gap <= 1e-6, label + " |functional - <H>| <= 1e-6");
    v.require(h_off <= allowed, label + " <H> equals E within 10 residual");
    v.require(f_off <= allowed, label + " functional equals E within 10 residual");
    v.require(lagrangian <= 1e-8, label + " on-shell lagrangian <= 1e-8");
  }
}

void dense_propagator(Verdict& v) {
  const std::vector<Setup> setups = {
      {.V = "x^2/2", .xmin = -8, .xmax = 8, .points = 202},
      {.V = "x^2 + i*x", .xmin = -8, .xmax = 8, .points = 202, .mode = Mode::PT, .mass = 0.5},
  };
  for (const Setup& s : setups) {
    const SampledProfiles p = make_problem(s);
    const TridiagonalOperator H = assemble_hamiltonian(p);
    const EvolutionState initial = make_initial_state(GaussianPacket{0.5, 1.0, 1.0}, p, H);
    const std::size_t m = H.size();
    Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(m, m);
    for (std::size_t k = 0; k < m; ++k) {
      dense(k, k) = H.diag[k];
      if (k + 1 < m) {
        dense(k, k + 1) = H.sup[k];
        dense(k + 1, k) = H.sub[k];
      }
    }
    const double T = 0.5;
    Eigen::VectorXcd psi0(m), sharp0(m);
    for (std::size_t k = 0; k < m; ++k) {
      psi0(k) = initial.fields.psi[k + 1];
      sharp0(k) = s.mode == Mode::PT ? (*initial.fields.psi_sharp)[k + 1] : 0.0;
    }
    const Eigen::VectorXcd psiT = (-kI * T * dense).exp() * psi0;
    const Eigen::VectorXcd sharpT = (kI * T * dense).exp() * sharp0;
    double err = 1.0;
    std::size_t steps = 50;
    for (; steps <= 50 * 1024; steps *= 2) {
      const CrankNicolson cn(H, T / steps, p.constants, p.mode);
      EvolutionState st = initial;
      for (std::size_t k = 0; k < steps; ++k) st = cn.step(st);
      err = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        err = std::max(err, std::abs(st.fields.psi[k + 1] - psiT(k)));
        if (s.mode == Mode::PT) err = std::max(err, std::abs((*st.fields.psi_sharp)[k + 1] - sharpT(k)));
      }
      if (err <= 1e-6) break;
    }
    v.note(to_string(s.mode) + " err " + fmt("%.1e", err) + " at " + std::to_string(steps) + " steps");
    v.require(err <= 1e-6, to_string(s.mode) + " matches within 1e-6");
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "box reduction oracle", 5, box},
      {2, "oscillator reduction oracle", 5, oscillator},
      {3, "generalized-operator oracle", 60, generalized},
      {4, "representation equivalence", 60, representations},
      {5, "hermiticity and norm conservation", 10, hermiticity},
      {6, "continuity under joint refinement", 60, continuity},
      {7, "PT conservation and PT image", 30, pt_conservation},
      {8, "PT spectral oracle", 30, pt_spectrum},
      {9, "vanishing current", 1, vanishing_current},
      {10, "energy bookkeeping", 10, bookkeeping},
      {11, "dense propagator oracle", 30, dense_propagator},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(seconds <= c.budget_seconds, "over time budget");
    if (!v.pass()) ++failed;
    std::printf("%s %2d %-36s %7.2f s / %3.0f s  %s\n", v.pass() ? "PASS" : "FAIL", c.id, c.name, seconds,
                c.budget_seconds, v.text().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

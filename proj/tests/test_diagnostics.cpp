#include <doctest.h>

#include <cmath>
#include <random>

#include "genqm/diagnostics.hpp"
#include "genqm/dynamics.hpp"
#include "genqm/error.hpp"
#include "genqm/spectra.hpp"
#include "support.hpp"

using namespace genqm;
using genqm::testing::make_problem;
using genqm::testing::max_abs_diff;
using genqm::testing::sample;
using genqm::testing::Setup;

namespace {

constexpr complex kI(0.0, 1.0);

double max_abs(const CVector& v) {
  double m = 0.0;
  for (const complex& z : v) m = std::max(m, std::abs(z));
  return m;
}

Field random_field(std::mt19937_64& rng, std::size_t n, Representation rep = Representation::Psi) {
  std::normal_distribution<double> z;
  Field f{CVector(n), rep};
  for (auto& v : f.values) v = complex(z(rng), z(rng));
  f.values.front() = f.values.back() = 0.0;
  return f;
}

// Max continuity residual of a free Gaussian run to t = 1.
double gaussian_residual(std::size_t points, double dt) {
  const SampledProfiles p = make_problem({.xmin = -20, .xmax = 20, .points = points});
  const TridiagonalOperator H = assemble_hamiltonian(p);
  const EvolutionState s = make_initial_state(GaussianPacket{0.0, 1.0, 1.0}, p, H);
  const std::size_t steps = static_cast<std::size_t>(std::lround(1.0 / dt));
  return evolve(p, H, s, dt, steps, steps).series.back().continuity_residual_max;
}

}  // namespace

TEST_CASE("probability density examples") {
  const SampledProfiles h = make_problem({.points = 3});
  const WaveState s{Field{{0.0, complex(1, 1) / std::sqrt(2.0), 0.0}, Representation::Psi}, {}};
  CHECK(std::abs(probability_density(s, h)[1] - 1.0) <= 1e-15);

  const SampledProfiles pt = make_problem({.V = "x^2", .points = 41, .mode = Mode::PT});
  const SampledProfiles herm = make_problem({.V = "x^2", .points = 41});
  const Field even = sample(pt.grid, [](double x) { return complex(std::exp(-x * x)); });
  const CVector rho_pt = probability_density(make_wave_state(even, pt.grid, Mode::PT), pt);
  const CVector rho_h = probability_density(make_wave_state(even, herm.grid, Mode::Hermitian), herm);
  CHECK(rho_pt == rho_h);
  for (std::size_t i = 0; i < rho_pt.size(); ++i) CHECK(rho_pt[i] == even[i] * even[i]);

  const SampledProfiles phi = make_problem({.A = "1+x^2", .points = 3, .mode = Mode::PT,
                                            .representation = Representation::Phi});
  const Field ones{CVector(3, 1.0), Representation::Phi};
  CHECK(std::abs(probability_density(WaveState{ones, ones}, phi)[2] - 0.5) <= 1e-15);

  try {
    probability_density(WaveState{even, {}}, pt);
    FAIL("expected MissingConjugateField");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingConjugateField);
  }
}

TEST_CASE("hermitian densities are real and non-negative") {
  std::mt19937_64 rng(1);
  const SampledProfiles p = make_problem({.A = "2 + sin(x)", .points = 64});
  const Field f = random_field(rng, 64);
  const CVector rho = probability_density(make_wave_state(f, p.grid, p.mode), p);
  for (const complex& z : rho) {
    CHECK(z.imag() == 0.0);
    CHECK(z.real() >= 0.0);
  }
  CHECK(total_probability(rho, p.grid).imag() == 0.0);
}

TEST_CASE("current vanishes for real hermitian and PT-self-conjugate states") {
  const SampledProfiles p = make_problem({.A = "1 + 0.3*x^2", .V = "x^2", .points = 101});
  const Field real = sample(p.grid, [](double x) { return complex(std::exp(-x * x) * (1 + x)); });
  for (const complex& j : current_density(make_wave_state(real, p.grid, p.mode), p)) {
    CHECK(j == complex(0.0));
  }
  const SampledProfiles pt = make_problem({.A = "1 + 0.1*i*x", .V = "x^2 + i*x", .points = 101,
                                           .mode = Mode::PT});
  const Field even = sample(pt.grid, [](double x) { return complex(std::cos(x) * std::exp(-x * x)); });
  REQUIRE(pt_reflect(even, pt.grid).values == even.values);
  for (const complex& j : current_density(WaveState{even, even}, pt)) CHECK(j == complex(0.0));

  // Any psi with psi# = psi, not only PT-invariant ones.
  std::mt19937_64 rng(6);
  const Field f = random_field(rng, 101);
  for (const complex& j : current_density(WaveState{f, f}, pt)) CHECK(std::abs(j) <= 1e-300);
}

TEST_CASE("plane-wave current converges at second order") {
  double previous = 0.0;
  for (std::size_t n : {101u, 201u, 401u}) {
    const SampledProfiles p = make_problem({.points = n});
    const Field psi = sample(p.grid, [](double x) { return std::exp(2.0 * kI * x); });
    const CVector J = current_density(make_wave_state(psi, p.grid, p.mode), p);
    double err = 0.0;
    for (const complex& j : J) err = std::max(err, std::abs(j - 2.0));
    if (previous > 0.0) CHECK(previous / err == doctest::Approx(4.0).epsilon(0.05));
    previous = err;
  }
}

TEST_CASE("A = 1 densities match the textbook formulas") {
  std::mt19937_64 rng(12);
  const double hbar = 0.8, mass = 1.7;
  const SampledProfiles p = make_problem({.points = 200, .hbar = hbar, .mass = mass});
  const Field f = random_field(rng, 200);
  const WaveState s = make_wave_state(f, p.grid, p.mode);
  const CVector rho = probability_density(s, p);
  const CVector J = current_density(s, p);
  const double h = p.grid.spacing();
  for (std::size_t i = 0; i < 200; ++i) CHECK(std::abs(rho[i] - std::norm(f[i])) <= 1e-12);
  for (std::size_t i = 0; i + 1 < 200; ++i) {
    const complex mid = 0.5 * (f[i] + f[i + 1]);
    const double textbook = hbar / mass * std::imag(std::conj(mid) * (f[i + 1] - f[i]) / h);
    CHECK(std::abs(J[i] - textbook) <= 1e-12 * std::max(1.0, std::abs(textbook)));
  }
}

TEST_CASE("psi and phi densities agree exactly after transformation") {
  std::mt19937_64 rng(13);
  const Setup psi_setup{.A = "1 + 0.4*i*x", .V = "x^2", .xmin = -2, .xmax = 2, .points = 81, .mode = Mode::PT};
  Setup phi_setup = psi_setup;
  phi_setup.representation = Representation::Phi;
  const SampledProfiles pp = make_problem(psi_setup), pf = make_problem(phi_setup);
  const Field psi = random_field(rng, 81);
  const WaveState sp = make_wave_state(psi, pp.grid, Mode::PT);
  const WaveState sf{transform_representation(sp.psi, pf, Transform::PsiToPhi),
                     transform_representation(*sp.psi_sharp, pf, Transform::PsiToPhi)};
  const CVector a = probability_density(sp, pp), b = probability_density(sf, pf);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12 * std::max(1.0, std::abs(a[i])));
}

TEST_CASE("psi and phi currents agree at second order") {
  double previous = 0.0;
  for (std::size_t n : {201u, 401u, 801u}) {
    Setup s{.A = "1 + 0.3*i*x", .V = "x^2", .xmin = -3, .xmax = 3, .points = n, .mode = Mode::PT};
    const SampledProfiles pp = make_problem(s);
    s.representation = Representation::Phi;
    const SampledProfiles pf = make_problem(s);
    const Field psi = sample(pp.grid, [](double x) { return std::exp(-x * x + kI * x); });
    const WaveState sp = make_wave_state(psi, pp.grid, Mode::PT);
    const WaveState sf{transform_representation(sp.psi, pf, Transform::PsiToPhi),
                       transform_representation(*sp.psi_sharp, pf, Transform::PsiToPhi)};
    const double gap = max_abs_diff(current_density(sp, pp), current_density(sf, pf));
    if (previous > 0.0) CHECK(previous / gap == doctest::Approx(4.0).epsilon(0.25));
    previous = gap;
  }
}

TEST_CASE("total probability") {
  for (std::size_t n : {3u, 17u, 1000u}) {
    CHECK(std::abs(total_probability(CVector(n, 1.0), Grid(0.0, 1.0, n)) - 1.0) <= 1e-14);
  }
  CHECK_THROWS_AS(total_probability(CVector(4, 1.0), Grid(0.0, 1.0, 5)), Error);
  const SampledProfiles p = make_problem({.V = "x^2/2", .xmin = -8, .xmax = 8, .points = 801});
  const auto pairs = solve_spectrum(assemble_hamiltonian(p), 3, p);
  for (const EigenPair& e : pairs) {
    const complex z = total_probability(probability_density(make_wave_state(e.state, p.grid, p.mode), p), p.grid);
    CHECK(std::abs(z - 1.0) <= 1e-12);
  }
}

TEST_CASE("continuity residual for a stationary state") {
  const SampledProfiles p = make_problem({.V = "x^2/2", .xmin = -8, .xmax = 8, .points = 401});
  const TridiagonalOperator H = assemble_hamiltonian(p);
  const EvolutionState s0 = make_initial_state(EigenstateIndex{0}, p, H);
  const EvolutionState s1 = crank_nicolson_step(H, s0, 0.01, p.constants, p.mode);
  const DiagnosticsReport a = make_report(s0.t, 0, s0.fields, H, p);
  const DiagnosticsReport b = make_report(s1.t, 1, s1.fields, H, p);
  const ContinuityResidual r = continuity_residual(a, b, 0.01, p.grid);
  CHECK(r.max <= 1e-8 * H.scale());
  CHECK(r.l2 <= r.max * std::sqrt(16.0));
  CHECK(max_abs(a.current) <= 1e-14);
}

TEST_CASE("continuity residual converges under joint (h, dt) refinement") {
  const double coarse = gaussian_residual(801, 0.025);
  const double fine = gaussian_residual(1601, 0.0125);
  CHECK(coarse == doctest::Approx(2.939999e-05).epsilon(1e-4));
  CHECK(fine == doctest::Approx(7.372085e-06).epsilon(1e-4));
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
  // The spatial discretization contributes nothing: at fixed dt the residual
  // does not change with h.
  const double fine_space = gaussian_residual(1601, 0.025);
  CHECK(fine_space == doctest::Approx(coarse).epsilon(0.02));
}

TEST_CASE("PT continuity residual decays under joint refinement") {
  double previous = 0.0;
  double dt = 0.025;
  for (std::size_t n : {481u, 961u}) {
    const SampledProfiles p = make_problem({.V = "x^2 + i*x", .xmin = -12, .xmax = 12, .points = n,
                                            .mode = Mode::PT, .mass = 0.5});
    const TridiagonalOperator H = assemble_hamiltonian(p);
    const EvolutionState s = make_initial_state(GaussianPacket{0.0, 1.0, 0.0}, p, H);
    const std::size_t steps = static_cast<std::size_t>(std::lround(1.0 / dt));
    const double r = evolve(p, H, s, dt, steps, steps).series.back().continuity_residual_max;
    if (previous > 0.0) {
      CHECK(previous / r >= 3.0);
      CHECK(previous / r <= 5.0);
    }
    previous = r;
    dt /= 2;
  }
}

TEST_CASE("continuity residual argument checks") {
  const CVector rho(5, 1.0), J(4, 0.0);
  CHECK(continuity_residual(rho, J, rho, J, 0.1, 0.25).max == 0.0);
  try {
    continuity_residual(rho, J, CVector(6, 1.0), CVector(5), 0.1, 0.25);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
  CHECK_THROWS_AS(continuity_residual(rho, J, rho, J, 0.0, 0.25), Error);
  DiagnosticsReport a;
  a.rho = rho;
  a.current = J;
  a.xmin = 0.0;
  a.spacing = 0.25;
  CHECK_NOTHROW(continuity_residual(a, a, 0.1, Grid(0.0, 1.0, 5)));
  try {
    continuity_residual(a, a, 0.1, Grid(0.0, 2.0, 5));
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
}

TEST_CASE("oscillator energy bookkeeping on a fine grid") {
  const SampledProfiles p = make_problem({.V = "x^2/2", .xmin = -7, .xmax = 7, .points = 70001});
  const TridiagonalOperator H = assemble_hamiltonian(p);
  const EigenPair e = solve_spectrum(H, 1, p)[0];
  const WaveState s = make_wave_state(e.state, p.grid, p.mode);
  const EnergyReport r = energy_report(s, H, p);
  CHECK(r.energy_functional.real() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.expectation_H.real() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(r.energy_functional - r.expectation_H) <= 1e-8);

  Field rate = e.state;
  for (complex& z : rate.values) z *= -kI * e.energy;
  const EnergyReport onshell = energy_report(s, H, p, &rate);
  CHECK(std::abs(onshell.lagrangian_integral) <= 1e-8);
}

TEST_CASE("energy functional and expectation agree at second order") {
  double previous = 0.0;
  for (std::size_t n : {201u, 401u, 801u}) {
    const SampledProfiles p = make_problem({.A = "1 + 0.2*x^2", .V = "x^2/2", .xmin = -8, .xmax = 8, .points = n});
    const TridiagonalOperator H = assemble_hamiltonian(p);
    const EigenPair e = solve_spectrum(H, 1, p)[0];
    const EnergyReport r = energy_report(make_wave_state(e.state, p.grid, p.mode), H, p);
    const double gap = std::abs(r.energy_functional - r.expectation_H);
    if (previous > 0.0) CHECK(previous / gap == doctest::Approx(4.0).epsilon(0.25));
    previous = gap;
  }
}

TEST_CASE("expectation equals the eigenvalue for real and complex-phase eigenstates") {
  const SampledProfiles p = make_problem({.A = "1 + 0.2*x^2", .V = "x^2/2", .xmin = -8, .xmax = 8, .points = 801});
  const TridiagonalOperator H = assemble_hamiltonian(p);
  for (const EigenPair& e : solve_spectrum(H, 3, p)) {
    // Psi = Psi* (real eigenvector).
    for (const complex& z : e.state.values) REQUIRE(z.imag() == 0.0);
    const EnergyReport r = energy_report(make_wave_state(e.state, p.grid, p.mode), H, p);
    CHECK(std::abs(r.expectation_H - e.energy) <= 10 * e.residual + 1e-12);
    // A complex global phase does not change the identity.
    Field rotated = e.state;
    for (complex& z : rotated.values) z *= std::exp(kI * 0.7);
    const EnergyReport q = energy_report(make_wave_state(rotated, p.grid, p.mode), H, p);
    CHECK(std::abs(q.expectation_H - e.energy) <= 10 * e.residual + 1e-12);
  }
}

TEST_CASE("phi representation energies use the 1/A weight") {
  const SampledProfiles p = make_problem({.A = "1 + 0.2*x^2", .V = "x^2/2", .xmin = -8, .xmax = 8,
                                          .points = 801, .representation = Representation::Phi});
  const TridiagonalOperator H = assemble_hamiltonian(p);
  const EigenPair e = solve_spectrum(H, 1, p)[0];
  const EnergyReport r = energy_report(make_wave_state(e.state, p.grid, p.mode), H, p);
  CHECK(std::abs(r.expectation_H - e.energy) <= 1e-9);
  CHECK(std::abs(r.energy_functional - e.energy) <= 1e-3);
}

TEST_CASE("PT shifted oscillator ground-state energy") {
  const SampledProfiles p = make_problem({.V = "x^2 + i*x", .xmin = -12, .xmax = 12, .points = 801,
                                          .mode = Mode::PT, .mass = 0.5});
  const TridiagonalOperator H = assemble_hamiltonian(p);
  const EigenPair e = solve_spectrum(H, 2, p)[0];
  const EnergyReport r = energy_report(make_wave_state(e.state, p.grid, p.mode), H, p);
  CHECK(std::fabs(r.energy_functional.imag()) <= 1e-6);
  CHECK(r.energy_functional.real() == doctest::Approx(1.25).epsilon(1e-3));
  CHECK(std::abs(r.expectation_H - e.energy) <= 1e-9);

  // Negative PT norm: the first excited state still reports its eigenvalue.
  const EigenPair e1 = solve_spectrum(H, 2, p)[1];
  const EnergyReport r1 = energy_report(make_wave_state(e1.state, p.grid, p.mode), H, p);
  CHECK(std::abs(r1.expectation_H - e1.energy) <= 1e-9);
}

TEST_CASE("energy report refuses unnormalized and mismatched input") {
  const SampledProfiles p = make_problem({.V = "x^2/2", .xmin = -8, .xmax = 8, .points = 201});
  const TridiagonalOperator H = assemble_hamiltonian(p);
  Field f = solve_spectrum(H, 1, p)[0].state;
  for (complex& z : f.values) z *= 1.01;
  try {
    energy_report(make_wave_state(f, p.grid, p.mode), H, p);
    FAIL("expected Unnormalized");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unnormalized);
  }
  const TridiagonalOperator phi = assemble_hamiltonian(p, Representation::Phi);
  CHECK_THROWS_AS(energy_report(make_wave_state(solve_spectrum(H, 1, p)[0].state, p.grid, p.mode), phi, p), Error);
}

TEST_CASE("hamiltonian density reduces to the textbook form for A = 1") {
  const SampledProfiles p = make_problem({.V = "x^2/2", .xmin = -4, .xmax = 4, .points = 81});
  const Field f = sample(p.grid, [](double x) { return std::exp(-x * x / 2 + kI * x); });
  const CVector dens = hamiltonian_density(make_wave_state(f, p.grid, p.mode), p);
  const double h = p.grid.spacing();
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    const complex d = (f[i + 1] - f[i - 1]) / (2 * h);
    const double x = p.grid.node(i);
    const double textbook = 0.5 * std::norm(d) + 0.5 * x * x * std::norm(f[i]);
    CHECK(std::abs(dens[i] - textbook) <= 1e-13);
  }
}

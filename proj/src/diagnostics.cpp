#include "genqm/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "genqm/error.hpp"

namespace genqm {

namespace {

constexpr complex kI(0.0, 1.0);

void check_size(const Field& f, const SampledProfiles& p) {
  if (f.size() != p.points()) throw Error(ErrorCode::SizeMismatch, "field length does not match grid");
}

Field conj_field(const Field& f) {
  Field out = f;
  for (complex& z : out.values) z = std::conj(z);
  return out;
}

// Nodal derivative: central inside, second-order one-sided at the ends.
CVector derivative(const CVector& f, double h) {
  const std::size_t n = f.size();
  CVector d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  return d;
}

WaveState to_psi_representation(const WaveState& s, const SampledProfiles& p) {
  if (s.psi.representation == Representation::Psi) return s;
  WaveState out{transform_representation(s.psi, p, Transform::PhiToPsi), std::nullopt};
  if (s.psi_sharp) out.psi_sharp = transform_representation(*s.psi_sharp, p, Transform::PhiToPsi);
  return out;
}

}  // namespace

Field conjugate_partner(const WaveState& s, Mode mode) {
  if (mode == Mode::Hermitian) return conj_field(s.psi);
  if (!s.psi_sharp) {
    throw Error(ErrorCode::MissingConjugateField, "pt mode needs the conjugate field psi#");
  }
  if (s.psi_sharp->size() != s.psi.size()) {
    throw Error(ErrorCode::SizeMismatch, "psi# length differs from psi");
  }
  return *s.psi_sharp;
}

CVector probability_density(const WaveState& s, const SampledProfiles& p) {
  check_size(s.psi, p);
  const Field partner = conjugate_partner(s, p.mode);
  const std::size_t n = p.points();
  CVector rho(n);
  const bool phi = s.psi.representation == Representation::Phi;
  for (std::size_t i = 0; i < n; ++i) {
    rho[i] = s.psi[i] * partner[i];
    if (phi) rho[i] /= p.A[i];
  }
  return rho;
}

CVector current_density(const WaveState& s, const SampledProfiles& p) {
  check_size(s.psi, p);
  const Field partner = conjugate_partner(s, p.mode);
  const std::size_t n = p.points();
  const double h = p.grid.spacing();
  const bool phi = s.psi.representation == Representation::Phi;
  const complex pref = p.constants.hbar / (2.0 * kI * p.constants.mass);
  CVector J(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const complex avg = 0.5 * (s.psi[i] + s.psi[i + 1]);
    const complex avg_partner = 0.5 * (partner[i] + partner[i + 1]);
    const complex delta = s.psi[i + 1] - s.psi[i];
    const complex delta_partner = partner[i + 1] - partner[i];
    const complex coeff = phi ? p.A_half[i] : p.a_half[i];
    J[i] = pref * coeff * (avg_partner * delta - avg * delta_partner) / h;
  }
  return J;
}

ContinuityResidual continuity_residual(const CVector& rho0, const CVector& current0,
                                       const CVector& rho1, const CVector& current1, double dt,
                                       double h) {
  const std::size_t n = rho0.size();
  if (rho1.size() != n || current0.size() + 1 != n || current1.size() + 1 != n) {
    throw Error(ErrorCode::GridMismatch, "continuity residual needs matching grids");
  }
  if (!(dt != 0.0 && std::isfinite(dt))) {
    throw Error(ErrorCode::InvalidArgument, "continuity residual needs a nonzero dt");
  }
  ContinuityResidual r;
  double sum_sq = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const complex jp = 0.5 * (current0[i] + current1[i]);
    const complex jm = 0.5 * (current0[i - 1] + current1[i - 1]);
    const double ri = std::abs((rho1[i] - rho0[i]) / dt + (jp - jm) / h);
    r.max = std::max(r.max, ri);
    sum_sq += ri * ri;
  }
  r.l2 = std::sqrt(sum_sq * h);
  return r;
}

ContinuityResidual continuity_residual(const DiagnosticsReport& before,
                                       const DiagnosticsReport& after, double dt,
                                       const Grid& grid) {
  auto matches = [&](const DiagnosticsReport& r) {
    return r.rho.size() == grid.points() && r.xmin == grid.xmin() && r.spacing == grid.spacing();
  };
  if (!matches(before) || !matches(after)) {
    throw Error(ErrorCode::GridMismatch, "reports were produced on a different grid");
  }
  return continuity_residual(before.rho, before.current, after.rho, after.current, dt,
                             grid.spacing());
}

complex total_probability(const CVector& rho, const Grid& grid) {
  if (rho.size() != grid.points()) throw Error(ErrorCode::GridMismatch, "density length does not match grid");
  return trapezoid(rho, grid.spacing());
}

CVector hamiltonian_density(const WaveState& s, const SampledProfiles& p) {
  check_size(s.psi, p);
  const WaveState psi_state = to_psi_representation(s, p);
  const Field partner = conjugate_partner(psi_state, p.mode);
  const std::size_t n = p.points();
  const double h = p.grid.spacing();
  const double hb2 = p.constants.hbar * p.constants.hbar;
  const double m = p.constants.mass;
  const CVector& psi = psi_state.psi.values;
  const CVector dpsi = derivative(psi, h);
  const CVector dpartner = derivative(partner.values, h);
  CVector dens(n);
  for (std::size_t i = 0; i < n; ++i) {
    const complex bilinear = partner[i] * psi[i];
    dens[i] = (hb2 / (2.0 * m)) * p.a[i] * dpartner[i] * dpsi[i] -
              (hb2 / (4.0 * m)) * p.A[i] * p.d2A[i] * bilinear -
              (hb2 / (8.0 * m)) * p.dA[i] * p.dA[i] * bilinear + p.V[i] * bilinear;
  }
  return dens;
}

EnergyReport energy_report(const WaveState& s, const TridiagonalOperator& H,
                           const SampledProfiles& p, const Field* dpsi_dt) {
  check_size(s.psi, p);
  if (H.representation != s.psi.representation || H.size() + 2 != p.points()) {
    throw Error(ErrorCode::InvalidArgument, "operator does not match the state");
  }
  const double h = p.grid.spacing();
  const complex total = total_probability(probability_density(s, p), p.grid);
  if (std::abs(std::abs(total) - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::Unnormalized, "energy_report needs a normalized state");
  }

  const bool phi = s.psi.representation == Representation::Phi;
  const Field partner = conjugate_partner(s, p.mode);
  const Field Hpsi = H.apply(s.psi);
  Field rate;
  if (dpsi_dt) {
    check_size(*dpsi_dt, p);
    rate = *dpsi_dt;
  } else {
    rate = Hpsi;
    for (complex& z : rate.values) z /= kI * p.constants.hbar;
  }

  const std::size_t n = p.points();
  CVector expect(n), kinetic_term(n);
  for (std::size_t i = 0; i < n; ++i) {
    const complex w = phi ? 1.0 / p.A[i] : complex(1.0);
    expect[i] = partner[i] * Hpsi[i] * w;
    kinetic_term[i] = kI * p.constants.hbar * rate[i] * partner[i] * w;
  }

  EnergyReport r;
  r.energy_functional = trapezoid(hamiltonian_density(s, p), h) / total;
  r.expectation_H = trapezoid(expect, h) / total;
  r.lagrangian_integral = trapezoid(kinetic_term, h) / total - r.energy_functional;
  return r;
}

DiagnosticsReport make_report(double t, std::size_t step, const WaveState& s,
                              const TridiagonalOperator& H, const SampledProfiles& p) {
  DiagnosticsReport r;
  r.t = t;
  r.step = step;
  r.xmin = p.grid.xmin();
  r.spacing = p.grid.spacing();
  r.rho = probability_density(s, p);
  r.current = current_density(s, p);
  r.total_probability = total_probability(r.rho, p.grid);
  const EnergyReport e = energy_report(s, H, p);
  r.energy_functional = e.energy_functional;
  r.expectation_H = e.expectation_H;
  r.lagrangian_integral = e.lagrangian_integral;
  return r;
}

}  // namespace genqm

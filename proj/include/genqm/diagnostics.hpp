#pragma once

#include <cstddef>

#include "genqm/model.hpp"
#include "genqm/operators.hpp"

namespace genqm {

/// Allowed deviation of |total probability| from 1 before energy_report
/// refuses a state.
inline constexpr double kNormTolerance = 1e-6;

struct DiagnosticsReport {
  double t = 0.0;
  std::size_t step = 0;
  double xmin = 0.0;
  double spacing = 0.0;
  CVector rho;      // nodes
  CVector current;  // half nodes
  double continuity_residual_max = 0.0;
  double continuity_residual_l2 = 0.0;
  complex total_probability;
  complex energy_functional;
  complex expectation_H;
  complex lagrangian_integral;
};

struct ContinuityResidual {
  double max = 0.0;
  double l2 = 0.0;
};

struct EnergyReport {
  complex energy_functional;
  complex expectation_H;
  complex lagrangian_integral;
};

/// The field that replaces psi* in every bilinear: conj(psi) in Hermitian
/// mode, psi_sharp in PT mode.
Field conjugate_partner(const WaveState& s, Mode mode);

/// psi psi* (Hermitian), psi psi# (PT); in the phi representation the
/// product is divided by A.
CVector probability_density(const WaveState& s, const SampledProfiles& p);

/// Flux form on half nodes: (hbar / 2im) a_{i+1/2} (avg(psi~) dpsi - avg(psi) dpsi~) / h
/// with psi~ the conjugate partner; a is A^2 for psi and A for phi.
CVector current_density(const WaveState& s, const SampledProfiles& p);

/// (rho1 - rho0)/dt + d/dx of the time-averaged current, at interior nodes.
ContinuityResidual continuity_residual(const CVector& rho0, const CVector& current0,
                                       const CVector& rho1, const CVector& current1, double dt,
                                       double h);
ContinuityResidual continuity_residual(const DiagnosticsReport& before,
                                       const DiagnosticsReport& after, double dt,
                                       const Grid& grid);

complex total_probability(const CVector& rho, const Grid& grid);

/// Energy functional (integral of the Hamiltonian density), <H> and the
/// Lagrangian integral, each per unit total probability. Without dpsi_dt the
/// time derivative is taken from the field equation, i hbar dpsi/dt = H psi.
EnergyReport energy_report(const WaveState& s, const TridiagonalOperator& H,
                           const SampledProfiles& p, const Field* dpsi_dt = nullptr);

/// Pointwise Hamiltonian density at the nodes (psi representation).
CVector hamiltonian_density(const WaveState& s, const SampledProfiles& p);

/// All diagnostics for one state; the continuity fields are left at zero.
DiagnosticsReport make_report(double t, std::size_t step, const WaveState& s,
                              const TridiagonalOperator& H, const SampledProfiles& p);

}  // namespace genqm

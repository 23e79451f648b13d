#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "genqm/diagnostics.hpp"
#include "genqm/linalg.hpp"
#include "genqm/model.hpp"
#include "genqm/operators.hpp"

namespace genqm {

struct EvolutionState {
  double t = 0.0;
  WaveState fields;  // psi_sharp present exactly in PT mode
  std::size_t step_index = 0;
};

/// Crank-Nicolson propagator for a fixed operator and time step. psi follows
/// i hbar dpsi/dt = H psi; in PT mode psi# follows -i hbar dpsi#/dt = H psi#.
/// Both implicit systems are factored once.
class CrankNicolson {
 public:
  /// dt may be negative (backward propagation) but not zero.
  CrankNicolson(const TridiagonalOperator& H, double dt, const PhysicalConstants& constants,
                Mode mode);

  EvolutionState step(const EvolutionState& s) const;
  double dt() const { return dt_; }

 private:
  void advance(const linalg::ThomasSolver& solver, complex rhs_sign, Field& f) const;

  TridiagonalOperator H_;
  double dt_;
  double tau_;  // dt / (2 hbar)
  Mode mode_;
  linalg::ThomasSolver forward_;
  std::optional<linalg::ThomasSolver> backward_;
};

EvolutionState crank_nicolson_step(const TridiagonalOperator& H, const EvolutionState& s,
                                   double dt, const PhysicalConstants& constants, Mode mode);

/// psi(x) = exp(-(x - x0)^2 / (4 sigma^2) + i k0 x), so |psi|^2 has variance sigma^2.
struct GaussianPacket {
  double x0 = 0.0;
  double sigma = 1.0;
  double k0 = 0.0;
};

struct EigenstateIndex {
  std::size_t index = 0;
};

using InitialCondition = std::variant<GaussianPacket, EigenstateIndex>;

/// Normalized initial state in the operator's representation, with psi#
/// = pt_reflect(psi) in PT mode.
EvolutionState make_initial_state(const InitialCondition& ic, const SampledProfiles& p,
                                  const TridiagonalOperator& H);

struct EvolutionResult {
  std::vector<DiagnosticsReport> series;
  std::vector<WaveState> snapshots;  // fields at each report, aligned with series
  EvolutionState final_state;
};

/// Runs `steps` Crank-Nicolson steps, reporting at step 0, every `cadence`
/// steps and at the final step. The continuity residual of a report is the
/// worst per-step residual since the previous report.
EvolutionResult evolve(const SampledProfiles& p, const TridiagonalOperator& H,
                       const EvolutionState& initial, double dt, std::size_t steps,
                       std::size_t cadence);

}  // namespace genqm

#include "genqm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "genqm/error.hpp"
#include "genqm/spectra.hpp"

namespace genqm {

namespace {

constexpr complex kI(0.0, 1.0);

linalg::ThomasSolver factor(const TridiagonalOperator& H, complex coeff) {
  CVector sub(H.sub.size()), diag(H.size()), sup(H.sup.size());
  for (std::size_t k = 0; k < H.size(); ++k) diag[k] = 1.0 + coeff * H.diag[k];
  for (std::size_t k = 0; k < H.sub.size(); ++k) {
    sub[k] = coeff * H.sub[k];
    sup[k] = coeff * H.sup[k];
  }
  return linalg::ThomasSolver(sub, diag, sup);
}

}  // namespace

CrankNicolson::CrankNicolson(const TridiagonalOperator& H, double dt,
                             const PhysicalConstants& constants, Mode mode)
    : H_(H),
      dt_(dt),
      tau_(dt / (2.0 * constants.hbar)),
      mode_(mode),
      forward_(factor(H, kI * (dt / (2.0 * constants.hbar)))) {
  if (!(std::isfinite(dt) && dt != 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "time step must be finite and nonzero");
  }
  if (mode == Mode::PT) backward_.emplace(factor(H, -kI * tau_));
}

void CrankNicolson::advance(const linalg::ThomasSolver& solver, complex rhs_sign, Field& f) const {
  const std::size_t m = H_.size();
  if (f.size() != m + 2) throw Error(ErrorCode::SizeMismatch, "state length does not match operator");
  CVector interior(f.values.begin() + 1, f.values.end() - 1);
  CVector rhs = H_.apply(interior);
  const complex c = rhs_sign * kI * tau_;
  for (std::size_t k = 0; k < m; ++k) rhs[k] = interior[k] + c * rhs[k];
  solver.solve(rhs);
  f.values.front() = 0.0;
  f.values.back() = 0.0;
  std::copy(rhs.begin(), rhs.end(), f.values.begin() + 1);
}

EvolutionState CrankNicolson::step(const EvolutionState& s) const {
  if (s.fields.psi.representation != H_.representation) {
    throw Error(ErrorCode::InvalidArgument, "state and operator use different representations");
  }
  EvolutionState next = s;
  advance(forward_, -1.0, next.fields.psi);
  if (mode_ == Mode::PT) {
    if (!next.fields.psi_sharp) {
      throw Error(ErrorCode::MissingConjugateField, "pt mode evolution needs psi#");
    }
    advance(*backward_, 1.0, *next.fields.psi_sharp);
  }
  next.t = s.t + dt_;
  next.step_index = s.step_index + 1;
  return next;
}

EvolutionState crank_nicolson_step(const TridiagonalOperator& H, const EvolutionState& s,
                                   double dt, const PhysicalConstants& constants, Mode mode) {
  try {
    return CrankNicolson(H, dt, constants, mode).step(s);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SolverBreakdown) throw;
    throw Error(ErrorCode::SolverBreakdown,
                std::string(e.what()) + " (step " + std::to_string(s.step_index + 1) + ")");
  }
}

EvolutionState make_initial_state(const InitialCondition& ic, const SampledProfiles& p,
                                  const TridiagonalOperator& H) {
  Field psi;
  if (const auto* g = std::get_if<GaussianPacket>(&ic)) {
    if (!(g->sigma > 0.0) || !std::isfinite(g->sigma)) {
      throw Error(ErrorCode::InvalidArgument, "gaussian sigma must be > 0");
    }
    const std::size_t n = p.points();
    psi = Field{CVector(n), Representation::Psi};
    for (std::size_t i = 0; i < n; ++i) {
      const double x = p.grid.node(i);
      const double u = (x - g->x0) / g->sigma;
      psi[i] = std::exp(complex(-0.25 * u * u, g->k0 * x));
    }
    psi.values.front() = 0.0;
    psi.values.back() = 0.0;
    if (H.representation == Representation::Phi) {
      psi = transform_representation(psi, p, Transform::PsiToPhi);
    }
    psi = normalize_state(psi, p);
  } else {
    const std::size_t index = std::get<EigenstateIndex>(ic).index;
    psi = solve_spectrum(H, index + 1, p).at(index).state;
  }
  return EvolutionState{0.0, make_wave_state(std::move(psi), p.grid, p.mode), 0};
}

EvolutionResult evolve(const SampledProfiles& p, const TridiagonalOperator& H,
                       const EvolutionState& initial, double dt, std::size_t steps,
                       std::size_t cadence) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "evolve needs steps >= 1");
  if (cadence < 1) throw Error(ErrorCode::InvalidArgument, "evolve needs cadence >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::InvalidArgument, "evolve needs a finite dt > 0");
  }
  std::optional<CrankNicolson> stepper;
  try {
    stepper.emplace(H, dt, p.constants, p.mode);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SolverBreakdown) throw;
    throw Error(ErrorCode::SolverBreakdown,
                std::string(e.what()) + " (step " + std::to_string(initial.step_index + 1) + ")");
  }

  EvolutionResult result;
  EvolutionState state = initial;
  result.series.push_back(make_report(state.t, state.step_index, state.fields, H, p));
  result.snapshots.push_back(state.fields);

  CVector rho = probability_density(state.fields, p);
  CVector current = current_density(state.fields, p);
  ContinuityResidual window;
  for (std::size_t s = 1; s <= steps; ++s) {
    state = stepper->step(state);
    CVector rho_next = probability_density(state.fields, p);
    CVector current_next = current_density(state.fields, p);
    const ContinuityResidual r =
        continuity_residual(rho, current, rho_next, current_next, dt, p.grid.spacing());
    window.max = std::max(window.max, r.max);
    window.l2 = std::max(window.l2, r.l2);
    rho = std::move(rho_next);
    current = std::move(current_next);
    if (s % cadence == 0 || s == steps) {
      DiagnosticsReport rep = make_report(state.t, state.step_index, state.fields, H, p);
      rep.continuity_residual_max = window.max;
      rep.continuity_residual_l2 = window.l2;
      result.series.push_back(std::move(rep));
      result.snapshots.push_back(state.fields);
      window = {};
    }
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace genqm

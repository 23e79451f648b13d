#pragma once

#include <cstddef>
#include <vector>

#include "genqm/model.hpp"
#include "genqm/operators.hpp"

namespace genqm {

/// Largest interior size accepted by the dense complex eigensolver.
inline constexpr std::size_t kDenseLimit = 4000;
/// Relative residual contract ||H v - E v|| / ||v|| <= kResidualTolerance * scale(H).
inline constexpr double kResidualTolerance = 1e-8;
/// |Im E| <= kRealFlagTolerance * max(1, |E|) marks an eigenvalue as real.
inline constexpr double kRealFlagTolerance = 1e-6;
/// |integral of rho| below this is a degenerate (self-orthogonal) norm.
inline constexpr double kDegenerateNorm = 1e-10;

struct EigenPair {
  std::size_t index = 0;
  complex energy;
  bool real = false;
  Field state;  // normalized, full grid with zero endpoints
  double residual = 0.0;  // ||H v - E v|| / ||v||
  /// PT eigenstate whose PT norm vanishes (broken PT symmetry); the state is
  /// then normalized to unit L2 norm instead.
  bool self_orthogonal = false;
};

/// Lowest `count` eigenpairs. Hermitian problems whose operator is real and
/// symmetric (or diagonally similar to symmetric) go through Sturm bisection
/// and inverse iteration, ascending. Everything else goes through the dense
/// complex path (Hessenberg QR for eigenvalues, inverse iteration for
/// vectors), ordered by real part and then imaginary part, with real parts
/// within 1e-12 scale(H) of each other treated as equal. PT eigenstates
/// with a degenerate PT norm are returned with self_orthogonal set.
std::vector<EigenPair> solve_spectrum(const TridiagonalOperator& H, std::size_t count,
                                      const SampledProfiles& p);

/// Rescale so that the trapezoid integral of the mode density has modulus 1.
/// Hermitian states end with integral exactly 1; PT states keep the sign of
/// their PT norm (integral +1 or -1). Throws DegenerateNorm when the
/// integral is below kDegenerateNorm in magnitude.
Field normalize_state(const Field& state, const SampledProfiles& p);

/// Inverse iteration around `shift` on an operator of any size; the energy
/// is the (weighted bilinear) Rayleigh quotient of the converged vector.
EigenPair refine_eigenpair(const TridiagonalOperator& H, complex shift, const SampledProfiles& p);

}  // namespace genqm

#include "genqm/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "genqm/diagnostics.hpp"
#include "genqm/error.hpp"
#include "genqm/linalg.hpp"

namespace genqm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxInverseIterations = 50;
constexpr double kShiftOffset = 1e-8;
constexpr double kTieTolerance = 1e-12;

double norm2(const CVector& v) {
  double s = 0.0;
  for (const complex& z : v) s += std::norm(z);
  return std::sqrt(s);
}

void scale_by(CVector& v, complex f) {
  for (complex& z : v) z *= f;
}

double residual_of(const TridiagonalOperator& H, const CVector& v, complex lambda) {
  CVector r = H.apply(v);
  for (std::size_t k = 0; k < v.size(); ++k) r[k] -= lambda * v[k];
  return norm2(r) / norm2(v);
}

// w_{k+1} / w_k = sup_k / sub_k, so that diag(w) H is symmetric and v^T diag(w) v
// is the bilinear form under which H is self-adjoint. Identically 1 for the
// psi form; proportional to 1/A for the phi form.
CVector bilinear_weights(const TridiagonalOperator& H) {
  CVector w(H.size(), 1.0);
  for (std::size_t k = 0; k + 1 < H.size(); ++k) {
    w[k + 1] = H.sub[k] == complex(0.0) ? w[k] : w[k] * H.sup[k] / H.sub[k];
  }
  return w;
}

complex rayleigh_quotient(const TridiagonalOperator& H, const CVector& v, const CVector& w) {
  const CVector hv = H.apply(v);
  complex num = 0.0, den = 0.0;
  double mag = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    num += w[k] * v[k] * hv[k];
    den += w[k] * v[k] * v[k];
    mag += std::abs(w[k]) * std::norm(v[k]);
  }
  if (std::abs(den) > 1e-8 * mag) return num / den;
  // Nearly self-orthogonal under the bilinear form; use the sesquilinear quotient.
  num = 0.0;
  double hden = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    num += std::conj(v[k]) * hv[k];
    hden += std::norm(v[k]);
  }
  return num / hden;
}

// Pseudo-random so that no smooth eigenvector is (nearly) orthogonal to it.
// The raw engine output is fully specified, which keeps runs reproducible.
CVector start_vector(std::size_t m, std::size_t seed) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL + seed);
  CVector v(m);
  for (std::size_t k = 0; k < m; ++k) {
    v[k] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  }
  return v;
}

struct IterationResult {
  CVector vector;
  complex lambda;
  double residual;
};

// Inverse iteration on `A` near `lambda`. With `update_lambda` the estimate
// follows the Rayleigh quotient; `orthogonal_to` holds unit vectors that the
// iterate is kept orthogonal to (Hermitian clusters).
IterationResult inverse_iteration(const TridiagonalOperator& A, complex lambda, bool update_lambda,
                                  const std::vector<CVector>& orthogonal_to, std::size_t index) {
  const double scale = A.scale();
  const std::size_t m = A.size();
  const complex shift = lambda + kShiftOffset * (std::abs(lambda) + kEps * scale);
  CVector shifted = A.diag;
  for (complex& d : shifted) d -= shift;
  const linalg::TridiagonalLU lu(A.sub, shifted, A.sup, kEps * scale);
  const CVector weights = update_lambda ? bilinear_weights(A) : CVector{};

  CVector x = start_vector(m, index);
  scale_by(x, 1.0 / norm2(x));
  IterationResult best{x, lambda, std::numeric_limits<double>::infinity()};
  const double target = 16.0 * kEps * scale;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxInverseIterations; ++it) {
    lu.solve(x);
    for (const CVector& q : orthogonal_to) {
      complex dot = 0.0;
      for (std::size_t k = 0; k < m; ++k) dot += std::conj(q[k]) * x[k];
      for (std::size_t k = 0; k < m; ++k) x[k] -= dot * q[k];
    }
    const double nx = norm2(x);
    if (!(nx > 0.0) || !std::isfinite(nx)) break;
    scale_by(x, 1.0 / nx);
    if (update_lambda) lambda = rayleigh_quotient(A, x, weights);
    const double r = residual_of(A, x, lambda);
    if (r < best.residual) best = {x, lambda, r};
    if (r <= target) break;
    if (it >= 2 && r > 0.5 * previous) break;
    previous = r;
  }
  if (!(best.residual <= kResidualTolerance * scale)) {
    throw Error(ErrorCode::ConvergenceFailure,
                "inverse iteration did not converge for eigenvalue " + std::to_string(index));
  }
  return best;
}

bool is_real(const TridiagonalOperator& H) {
  auto real = [](const CVector& v) {
    return std::all_of(v.begin(), v.end(), [](complex z) { return z.imag() == 0.0; });
  };
  return real(H.diag) && real(H.sub) && real(H.sup);
}

bool symmetrizable(const TridiagonalOperator& H) {
  for (std::size_t k = 0; k < H.sub.size(); ++k) {
    if (!(H.sub[k].real() * H.sup[k].real() > 0.0)) return false;
  }
  return true;
}

// Largest-magnitude entry made real positive.
void fix_phase(CVector& v) {
  std::size_t at = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (std::abs(v[k]) > std::abs(v[at])) at = k;
  }
  if (v.empty() || std::abs(v[at]) == 0.0) return;
  scale_by(v, std::abs(v[at]) / v[at]);
  v[at] = std::abs(v[at]);
}

EigenPair finish_pair(std::size_t index, complex energy, const CVector& interior, double residual,
                      const TridiagonalOperator& H, const SampledProfiles& p) {
  CVector v = interior;
  fix_phase(v);
  Field full{CVector(v.size() + 2, 0.0), H.representation};
  std::copy(v.begin(), v.end(), full.values.begin() + 1);
  EigenPair pair;
  pair.index = index;
  pair.energy = energy;
  pair.real = std::abs(energy.imag()) <= kRealFlagTolerance * std::max(1.0, std::abs(energy));
  try {
    pair.state = normalize_state(full, p);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateNorm || p.mode != Mode::PT) throw;
    // Broken PT symmetry: psi# belongs to the conjugate eigenvalue and the
    // PT norm vanishes identically, so fall back to the L2 norm.
    CVector density(full.size());
    for (std::size_t i = 0; i < full.size(); ++i) density[i] = std::norm(full[i]);
    scale_by(full.values, 1.0 / std::sqrt(trapezoid(density, p.grid.spacing()).real()));
    pair.state = std::move(full);
    pair.self_orthogonal = true;
  }
  pair.residual = residual;
  return pair;
}

std::vector<EigenPair> solve_real_path(const TridiagonalOperator& H, std::size_t count,
                                       const SampledProfiles& p) {
  const std::size_t m = H.size();
  // Diagonal similarity S = D^-1 H D with S symmetric; D = I when H already is.
  linalg::RVector d(m), e(m - 1), dscale(m, 1.0);
  for (std::size_t k = 0; k < m; ++k) d[k] = H.diag[k].real();
  for (std::size_t k = 0; k + 1 < m; ++k) {
    if (H.symmetric) {
      e[k] = H.sup[k].real();
    } else {
      const double lo = H.sub[k].real(), up = H.sup[k].real();
      e[k] = std::copysign(std::sqrt(lo * up), up);
      dscale[k + 1] = dscale[k] * std::sqrt(lo / up);
    }
  }
  TridiagonalOperator S;
  S.diag.assign(H.diag.begin(), H.diag.end());
  S.sub.resize(m - 1);
  S.sup.resize(m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k) S.sub[k] = S.sup[k] = e[k];
  S.symmetric = true;
  S.representation = H.representation;

  const linalg::RVector values = linalg::lowest_eigenvalues(d, e, count);
  const double cluster = 1e-3 * S.scale();
  std::vector<CVector> basis;
  std::vector<EigenPair> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<CVector> nearby;
    for (std::size_t i = 0; i < j; ++i) {
      if (std::fabs(values[j] - values[i]) < cluster) nearby.push_back(basis[i]);
    }
    IterationResult it = inverse_iteration(S, values[j], false, nearby, j);
    basis.push_back(it.vector);
    CVector v = it.vector;
    for (std::size_t k = 0; k < m; ++k) v[k] *= dscale[k];
    const double r = residual_of(H, v, values[j]);
    out.push_back(finish_pair(j, complex(values[j], 0.0), v, r, H, p));
  }
  return out;
}

std::vector<EigenPair> solve_dense_path(const TridiagonalOperator& H, std::size_t count,
                                        const SampledProfiles& p) {
  const std::size_t m = H.size();
  if (m > kDenseLimit) {
    throw Error(ErrorCode::ProblemTooLarge,
                "dense complex eigensolver is limited to " + std::to_string(kDenseLimit) +
                    " interior points, got " + std::to_string(m));
  }
  linalg::DenseMatrix dense(m);
  for (std::size_t k = 0; k < m; ++k) {
    dense(k, k) = H.diag[k];
    if (k + 1 < m) {
      dense(k, k + 1) = H.sup[k];
      dense(k + 1, k) = H.sub[k];
    }
  }
  CVector values = linalg::hessenberg_eigenvalues(std::move(dense));
  // Real parts that agree to rounding (e.g. conjugate pairs) count as ties.
  const double tie = kTieTolerance * H.scale();
  std::sort(values.begin(), values.end(), [](complex a, complex b) { return a.real() < b.real(); });
  for (std::size_t begin = 0; begin < values.size();) {
    std::size_t end = begin + 1;
    while (end < values.size() && values[end].real() - values[end - 1].real() <= tie) ++end;
    std::sort(values.begin() + begin, values.begin() + end,
              [](complex a, complex b) { return a.imag() < b.imag(); });
    begin = end;
  }
  std::vector<EigenPair> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    IterationResult it = inverse_iteration(H, values[j], true, {}, j);
    out.push_back(finish_pair(j, it.lambda, it.vector, it.residual, H, p));
  }
  return out;
}

}  // namespace

std::vector<EigenPair> solve_spectrum(const TridiagonalOperator& H, std::size_t count,
                                      const SampledProfiles& p) {
  const std::size_t m = H.size();
  if (m + 2 != p.points()) {
    throw Error(ErrorCode::SizeMismatch, "operator does not match the sampled problem");
  }
  if (count < 1 || count > m) {
    throw Error(ErrorCode::OutOfRange, "eigenpair count must lie in [1, " + std::to_string(m) +
                                           "], got " + std::to_string(count));
  }
  if (p.mode == Mode::Hermitian && is_real(H) && (H.symmetric || symmetrizable(H))) {
    return solve_real_path(H, count, p);
  }
  return solve_dense_path(H, count, p);
}

Field normalize_state(const Field& state, const SampledProfiles& p) {
  const WaveState ws = make_wave_state(state, p.grid, p.mode);
  const complex z = total_probability(probability_density(ws, p), p.grid);
  const double mag = std::abs(z);
  if (!(mag >= kDegenerateNorm)) {
    throw Error(ErrorCode::DegenerateNorm,
                "normalization integral vanishes (|integral rho| < 1e-10)");
  }
  Field out = state;
  scale_by(out.values, 1.0 / std::sqrt(mag));
  return out;
}

EigenPair refine_eigenpair(const TridiagonalOperator& H, complex shift, const SampledProfiles& p) {
  if (H.size() + 2 != p.points()) {
    throw Error(ErrorCode::SizeMismatch, "operator does not match the sampled problem");
  }
  IterationResult it = inverse_iteration(H, shift, true, {}, 0);
  if (p.mode == Mode::Hermitian && is_real(H)) it.lambda = complex(it.lambda.real(), 0.0);
  return finish_pair(0, it.lambda, it.vector, it.residual, H, p);
}

}  // namespace genqm

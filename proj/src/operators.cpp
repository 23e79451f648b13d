#include "genqm/operators.hpp"

#include <algorithm>
#include <cmath>

#include "genqm/error.hpp"

namespace genqm {

CVector TridiagonalOperator::apply(const CVector& v) const {
  const std::size_t m = size();
  if (v.size() != m) throw Error(ErrorCode::SizeMismatch, "operator/vector size mismatch");
  CVector y(m);
  for (std::size_t k = 0; k < m; ++k) {
    complex acc = diag[k] * v[k];
    if (k > 0) acc += sub[k - 1] * v[k - 1];
    if (k + 1 < m) acc += sup[k] * v[k + 1];
    y[k] = acc;
  }
  return y;
}

Field TridiagonalOperator::apply(const Field& f) const {
  const std::size_t m = size();
  if (f.size() != m + 2) throw Error(ErrorCode::SizeMismatch, "field length does not match operator");
  CVector interior(f.values.begin() + 1, f.values.end() - 1);
  CVector y = apply(interior);
  Field out{CVector(m + 2, 0.0), f.representation};
  std::copy(y.begin(), y.end(), out.values.begin() + 1);
  return out;
}

double TridiagonalOperator::scale() const {
  double worst = 0.0;
  const std::size_t m = size();
  for (std::size_t k = 0; k < m; ++k) {
    double row = std::abs(diag[k]);
    if (k > 0) row += std::abs(sub[k - 1]);
    if (k + 1 < m) row += std::abs(sup[k]);
    worst = std::max(worst, row);
  }
  return worst;
}

double TridiagonalOperator::symmetry_gap() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < sub.size(); ++k) worst = std::max(worst, std::abs(sub[k] - sup[k]));
  return worst;
}

double TridiagonalOperator::hermiticity_gap() const {
  double worst = 0.0;
  for (const complex& d : diag) worst = std::max(worst, 2.0 * std::abs(d.imag()));
  for (std::size_t k = 0; k < sub.size(); ++k) {
    worst = std::max(worst, std::abs(sub[k] - std::conj(sup[k])));
  }
  return worst;
}

CVector effective_potential(const SampledProfiles& p) {
  const double hb2 = p.constants.hbar * p.constants.hbar;
  const double m = p.constants.mass;
  const std::size_t n = p.points();
  CVector W(n);
  for (std::size_t i = 0; i < n; ++i) {
    W[i] = p.V[i] - (hb2 / (4.0 * m)) * p.A[i] * p.d2A[i] - (hb2 / (8.0 * m)) * p.dA[i] * p.dA[i];
  }
  return W;
}

TridiagonalOperator assemble_hamiltonian(const SampledProfiles& p, Representation rep) {
  const std::size_t n = p.points();
  const std::size_t m = n - 2;
  const double h = p.grid.spacing();
  const double c = p.constants.kinetic() / (h * h);

  TridiagonalOperator H;
  H.representation = rep;
  H.diag.resize(m);
  H.sub.resize(m - 1);
  H.sup.resize(m - 1);

  if (rep == Representation::Psi) {
    const CVector W = effective_potential(p);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      H.diag[i - 1] = c * (p.a_half[i] + p.a_half[i - 1]) + W[i];
    }
    for (std::size_t i = 1; i + 2 < n; ++i) {
      const complex coupling = -c * p.a_half[i];
      H.sup[i - 1] = coupling;
      H.sub[i - 1] = coupling;
    }
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      H.diag[i - 1] = c * p.A[i] * (p.A_half[i] + p.A_half[i - 1]) + p.V[i];
    }
    for (std::size_t i = 1; i + 2 < n; ++i) {
      H.sup[i - 1] = -c * p.A[i] * p.A_half[i];
      H.sub[i - 1] = -c * p.A[i + 1] * p.A_half[i];
    }
  }
  H.symmetric = H.sub == H.sup;
  return H;
}

Field apply_momentum(const SampledProfiles& p, const Field& psi) {
  const std::size_t n = p.points();
  if (psi.size() != n) throw Error(ErrorCode::SizeMismatch, "field length does not match grid");
  if (psi.representation != Representation::Psi) {
    throw Error(ErrorCode::InvalidArgument, "momentum acts on psi-representation fields");
  }
  const double h = p.grid.spacing();
  const complex minus_i_hbar(0.0, -p.constants.hbar);

  Field out{CVector(n), psi.representation};
  for (std::size_t i = 0; i < n; ++i) {
    complex d;
    if (i == 0) {
      d = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * h);
    } else if (i == n - 1) {
      d = (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * h);
    } else {
      d = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
    }
    out[i] = minus_i_hbar * (p.A[i] * d + 0.5 * p.dA[i] * psi[i]);
  }
  return out;
}

Field transform_representation(const Field& f, const SampledProfiles& p, Transform direction) {
  const std::size_t n = p.points();
  if (f.size() != n) throw Error(ErrorCode::SizeMismatch, "field length does not match grid");
  const Representation from =
      direction == Transform::PhiToPsi ? Representation::Phi : Representation::Psi;
  if (f.representation != from) {
    throw Error(ErrorCode::InvalidArgument, "field is not in the " + to_string(from) +
                                                " representation");
  }
  Field out{CVector(n), direction == Transform::PhiToPsi ? Representation::Psi
                                                         : Representation::Phi};
  for (std::size_t i = 0; i < n; ++i) {
    const complex A = p.A[i];
    if (std::abs(A.imag()) <= 1e-12 && A.real() < 0.0) {
      throw EvalError("sqrt(A) branch cut: A on the negative real axis", p.grid.node(i));
    }
    const complex s = std::sqrt(A);
    out[i] = direction == Transform::PhiToPsi ? f[i] / s : f[i] * s;
  }
  return out;
}

}  // namespace genqm

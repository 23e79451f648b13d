#pragma once

#include "genqm/model.hpp"

namespace genqm {

/// Discrete Hamiltonian on the interior nodes 1..n-2 (Dirichlet endpoints are
/// pinned to zero and carry no row). Row k corresponds to grid node k + 1.
struct TridiagonalOperator {
  CVector sub;   // entry (k + 1, k)
  CVector diag;  // entry (k, k)
  CVector sup;   // entry (k, k + 1)
  Representation representation = Representation::Psi;
  bool symmetric = false;  // sub == sup bitwise

  std::size_t size() const { return diag.size(); }

  /// y = H v on interior vectors of length size().
  CVector apply(const CVector& v) const;
  /// Full-grid action: boundary values of the input are ignored and the
  /// output is zero at both endpoints.
  Field apply(const Field& f) const;

  /// Infinity norm (largest absolute row sum).
  double scale() const;
  /// max_k |sub_k - sup_k|.
  double symmetry_gap() const;
  /// max over entries of |H_jk - conj(H_kj)|.
  double hermiticity_gap() const;
};

/// W_i = V_i - (hbar^2/4m) A_i A''_i - (hbar^2/8m) A'_i^2 at every node.
CVector effective_potential(const SampledProfiles& p);

/// Psi form: conservative flux discretization of -(hbar^2/2m)(A^2 psi')' + W psi.
/// Phi form: -(hbar^2/2m) A (A Phi')' + V Phi with A at nodes and half nodes.
TridiagonalOperator assemble_hamiltonian(const SampledProfiles& p, Representation rep);
inline TridiagonalOperator assemble_hamiltonian(const SampledProfiles& p) {
  return assemble_hamiltonian(p, p.representation);
}

/// -i hbar (A D psi + A' psi / 2); central differences inside, second-order
/// one-sided differences at the two endpoints.
Field apply_momentum(const SampledProfiles& p, const Field& psi);

enum class Transform { PhiToPsi, PsiToPhi };

/// Psi = Phi / sqrt(A) or Phi = Psi sqrt(A), principal branch.
Field transform_representation(const Field& f, const SampledProfiles& p, Transform direction);

}  // namespace genqm

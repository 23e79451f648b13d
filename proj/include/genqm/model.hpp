#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "genqm/exprlang.hpp"

namespace genqm {

using complex = std::complex<double>;
using CVector = std::vector<complex>;

/// Smallest |A| accepted at any node or half-node.
inline constexpr double kMinAuxiliary = 1e-8;
/// Largest imaginary part tolerated in a Hermitian-mode sample.
inline constexpr double kRealTolerance = 1e-12;
/// PT residual above which problem construction records a warning.
inline constexpr double kPtWarnThreshold = 1e-10;

struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;

  void validate() const;
  /// hbar^2 / (2 m), the kinetic prefactor.
  double kinetic() const { return hbar * hbar / (2.0 * mass); }
};

/// Uniform grid of `points` nodes on [xmin, xmax]. When xmin == -xmax the
/// nodes are mirrored so that x_i == -x_{n-1-i} holds bit for bit, and half
/// nodes are node midpoints, so they are mirrored as well.
class Grid {
 public:
  Grid(double xmin, double xmax, std::size_t points);

  double xmin() const { return xmin_; }
  double xmax() const { return xmax_; }
  std::size_t points() const { return nodes_.size(); }
  double spacing() const { return h_; }
  bool symmetric() const { return symmetric_; }

  double node(std::size_t i) const { return nodes_[i]; }
  double half_node(std::size_t i) const { return halves_[i]; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& half_nodes() const { return halves_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.xmin_ == b.xmin_ && a.xmax_ == b.xmax_ && a.nodes_.size() == b.nodes_.size();
  }

 private:
  double xmin_;
  double xmax_;
  double h_;
  bool symmetric_;
  std::vector<double> nodes_;
  std::vector<double> halves_;
};

enum class Mode { Hermitian, PT };
enum class Representation { Psi, Phi };
enum class Boundary { Dirichlet };

std::string to_string(Mode m);
std::string to_string(Representation r);

struct ProblemSpec {
  expr::Expr A;
  expr::Expr V;
  PhysicalConstants constants;
  Grid grid;
  Mode mode = Mode::Hermitian;
  Representation representation = Representation::Psi;
  Boundary boundary = Boundary::Dirichlet;
};

/// A, V and derivatives sampled on the grid. Node arrays have length n,
/// half-node arrays length n - 1. In Hermitian mode every array is real.
struct SampledProfiles {
  Grid grid;
  PhysicalConstants constants;
  Mode mode;
  Representation representation;

  CVector A, dA, d2A, V, a;  // a = A^2
  CVector A_half, a_half;

  std::vector<std::string> warnings;

  std::size_t points() const { return grid.points(); }
};

/// Field values on the grid, tagged with the representation they live in.
struct Field {
  CVector values;
  Representation representation = Representation::Psi;

  std::size_t size() const { return values.size(); }
  complex& operator[](std::size_t i) { return values[i]; }
  const complex& operator[](std::size_t i) const { return values[i]; }
};

/// Psi together with its conjugate partner. In PT mode psi_sharp carries the
/// PT-conjugate field; in Hermitian mode it is absent and conj(psi) is used.
struct WaveState {
  Field psi;
  std::optional<Field> psi_sharp;
};

SampledProfiles build_problem(const ProblemSpec& spec);

/// output_i = conj(input_{n-1-i}). Requires a symmetric grid.
Field pt_reflect(const Field& field, const Grid& grid);

/// max_i |f(x_i) - conj(f(-x_i))|. Requires a symmetric grid.
double pt_symmetry_report(const expr::Expr& f, const Grid& grid);

/// Pairs psi with pt_reflect(psi) in PT mode, or leaves psi_sharp empty.
WaveState make_wave_state(Field psi, const Grid& grid, Mode mode);

/// Trapezoid rule over all nodes with spacing h.
complex trapezoid(const CVector& f, double h);

}  // namespace genqm

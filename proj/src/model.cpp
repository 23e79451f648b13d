#include "genqm/model.hpp"

#include <cmath>
#include <cstdio>

#include "genqm/error.hpp"

namespace genqm {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void PhysicalConstants::validate() const {
  if (!(std::isfinite(hbar) && hbar > 0.0)) {
    throw Error(ErrorCode::InvalidConstants, "hbar must be finite and > 0, got " + fmt(hbar));
  }
  if (!(std::isfinite(mass) && mass > 0.0)) {
    throw Error(ErrorCode::InvalidConstants, "mass must be finite and > 0, got " + fmt(mass));
  }
}

Grid::Grid(double xmin, double xmax, std::size_t points) : xmin_(xmin), xmax_(xmax) {
  if (!std::isfinite(xmin) || !std::isfinite(xmax) || !(xmin < xmax)) {
    throw Error(ErrorCode::InvalidGrid, "grid needs finite xmin < xmax");
  }
  if (points < 3) {
    throw Error(ErrorCode::InvalidGrid, "grid needs at least 3 points");
  }
  h_ = (xmax - xmin) / static_cast<double>(points - 1);
  symmetric_ = xmin == -xmax;
  nodes_.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    nodes_[i] = xmin + static_cast<double>(i) * h_;
  }
  nodes_.back() = xmax;
  if (symmetric_) {
    for (std::size_t i = 0; i < points / 2; ++i) nodes_[points - 1 - i] = -nodes_[i];
    if (points % 2 == 1) nodes_[points / 2] = 0.0;
  }
  halves_.resize(points - 1);
  for (std::size_t i = 0; i + 1 < points; ++i) halves_[i] = 0.5 * (nodes_[i] + nodes_[i + 1]);
}

std::string to_string(Mode m) { return m == Mode::Hermitian ? "hermitian" : "pt"; }

std::string to_string(Representation r) { return r == Representation::Psi ? "psi" : "phi"; }

SampledProfiles build_problem(const ProblemSpec& spec) {
  spec.constants.validate();
  if (spec.A.empty() || spec.V.empty()) {
    throw Error(ErrorCode::InvalidArgument, "problem needs both A and V expressions");
  }
  const Grid& grid = spec.grid;
  if (spec.mode == Mode::PT && !grid.symmetric()) {
    throw Error(ErrorCode::AsymmetricGrid, "pt mode requires a grid with xmin == -xmax");
  }

  SampledProfiles p{grid, spec.constants, spec.mode, spec.representation, {}, {}, {}, {}, {},
                    {}, {}, {}};
  const std::size_t n = grid.points();
  p.A.resize(n);
  p.dA.resize(n);
  p.d2A.resize(n);
  p.V.resize(n);
  p.a.resize(n);
  p.A_half.resize(n - 1);
  p.a_half.resize(n - 1);

  auto check_aux = [](complex A, double x) {
    if (std::abs(A) < kMinAuxiliary) {
      throw Error(ErrorCode::ZeroAuxiliary, "|A| < 1e-8 at x = " + fmt(x));
    }
  };
  auto check_real = [&](complex v, const char* what, double x) {
    if (spec.mode == Mode::Hermitian && std::abs(v.imag()) >= kRealTolerance) {
      throw Error(ErrorCode::NonRealProfile,
                  std::string(what) + " has imaginary part " + fmt(v.imag()) +
                      " at x = " + fmt(x) + " in hermitian mode");
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.node(i);
    const expr::Jet2 ja = expr::eval_jet(spec.A, x);
    const complex v = expr::eval(spec.V, x);
    check_aux(ja.value, x);
    check_real(ja.value, "A", x);
    check_real(ja.d1, "A'", x);
    check_real(ja.d2, "A''", x);
    check_real(v, "V", x);
    p.A[i] = ja.value;
    p.dA[i] = ja.d1;
    p.d2A[i] = ja.d2;
    p.V[i] = v;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double x = grid.half_node(i);
    const complex A = expr::eval(spec.A, x);
    check_aux(A, x);
    check_real(A, "A", x);
    p.A_half[i] = A;
  }

  if (spec.mode == Mode::Hermitian) {
    for (CVector* arr : {&p.A, &p.dA, &p.d2A, &p.V, &p.A_half}) {
      for (complex& z : *arr) z = complex(z.real(), 0.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) p.a[i] = p.A[i] * p.A[i];
  for (std::size_t i = 0; i + 1 < n; ++i) p.a_half[i] = p.A_half[i] * p.A_half[i];

  if (spec.mode == Mode::PT) {
    const double rA = pt_symmetry_report(spec.A, grid);
    const double rV = pt_symmetry_report(spec.V, grid);
    if (rA > kPtWarnThreshold) {
      p.warnings.push_back("A is not PT-symmetric on this grid (residual " + fmt(rA) + ")");
    }
    if (rV > kPtWarnThreshold) {
      p.warnings.push_back("V is not PT-symmetric on this grid (residual " + fmt(rV) + ")");
    }
  }
  return p;
}

Field pt_reflect(const Field& field, const Grid& grid) {
  if (!grid.symmetric()) {
    throw Error(ErrorCode::AsymmetricGrid, "pt_reflect requires a symmetric grid");
  }
  const std::size_t n = grid.points();
  if (field.size() != n) {
    throw Error(ErrorCode::SizeMismatch, "field length does not match grid");
  }
  Field out{CVector(n), field.representation};
  for (std::size_t i = 0; i < n; ++i) out[i] = std::conj(field[n - 1 - i]);
  return out;
}

double pt_symmetry_report(const expr::Expr& f, const Grid& grid) {
  if (!grid.symmetric()) {
    throw Error(ErrorCode::AsymmetricGrid, "PT symmetry check requires a symmetric grid");
  }
  double worst = 0.0;
  for (double x : grid.nodes()) {
    worst = std::max(worst, std::abs(expr::eval(f, x) - std::conj(expr::eval(f, -x))));
  }
  return worst;
}

WaveState make_wave_state(Field psi, const Grid& grid, Mode mode) {
  WaveState s{std::move(psi), std::nullopt};
  if (mode == Mode::PT) s.psi_sharp = pt_reflect(s.psi, grid);
  return s;
}

complex trapezoid(const CVector& f, double h) {
  if (f.empty()) return 0.0;
  complex sum = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
  return sum * h;
}

}  // namespace genqm

#pragma once

#include <cmath>
#include <string>

#include "genqm/model.hpp"
#include "genqm/operators.hpp"

namespace genqm::testing {

struct Setup {
  std::string A = "1";
  std::string V = "0";
  double xmin = -1.0;
  double xmax = 1.0;
  std::size_t points = 101;
  Mode mode = Mode::Hermitian;
  Representation representation = Representation::Psi;
  double hbar = 1.0;
  double mass = 1.0;
};

inline ProblemSpec make_spec(const Setup& s) {
  return ProblemSpec{expr::parse(s.A),           expr::parse(s.V),
                     PhysicalConstants{s.hbar, s.mass}, Grid(s.xmin, s.xmax, s.points),
                     s.mode,                     s.representation};
}

inline SampledProfiles make_problem(const Setup& s) { return build_problem(make_spec(s)); }

template <class F>
Field sample(const Grid& g, F f, Representation rep = Representation::Psi) {
  Field out{CVector(g.points()), rep};
  for (std::size_t i = 0; i < g.points(); ++i) out[i] = f(g.node(i));
  return out;
}

inline double max_abs_diff(const CVector& a, const CVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace genqm::testing

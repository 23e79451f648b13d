#include "genqm/linalg.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "genqm/error.hpp"

namespace genqm::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kQrIterationsPerEigenvalue = 60;

// |z|_1 style magnitude, cheaper than abs and adequate for comparisons.
inline double cabs1(complex z) { return std::fabs(z.real()) + std::fabs(z.imag()); }

// Complex multiply without the C99 Annex G NaN recovery.
inline complex mul(complex a, complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

struct Givens {
  double c;
  complex s;
};

// G = [c s; -conj(s) c] with G [x; y] = [r; 0].
Givens make_givens(complex x, complex y) {
  const double ax = std::abs(x);
  const double ay = std::abs(y);
  if (ay == 0.0) return {1.0, 0.0};
  if (ax == 0.0) return {0.0, std::conj(y) / ay};
  const double r = std::hypot(ax, ay);
  return {ax / r, (x / ax) * std::conj(y) / r};
}

}  // namespace

void reduce_to_hessenberg(DenseMatrix& a) {
  const std::size_t n = a.size();
  if (n < 3) return;
  CVector v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double norm_sq = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) norm_sq += std::norm(a(i, k));
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) continue;
    const complex x0 = a(k + 1, k);
    const complex phase = std::abs(x0) == 0.0 ? complex(1.0) : x0 / std::abs(x0);
    // v = x + phase * |x| e1, H = I - 2 v v^H / (v^H v)
    for (std::size_t i = k + 1; i < n; ++i) v[i] = a(i, k);
    v[k + 1] += phase * norm;
    double vnorm_sq = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm_sq += std::norm(v[i]);
    const double beta = 2.0 / vnorm_sq;

    // Left: A <- H A on rows k+1..n-1.
    for (std::size_t j = k; j < n; ++j) {
      complex dot = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) dot += mul(std::conj(v[i]), a(i, j));
      dot *= beta;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= mul(v[i], dot);
    }
    // Right: A <- A H on columns k+1..n-1.
    for (std::size_t i = 0; i < n; ++i) {
      complex dot = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) dot += mul(a(i, j), v[j]);
      dot *= beta;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= mul(dot, std::conj(v[j]));
    }
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
}

CVector hessenberg_eigenvalues(DenseMatrix h) {
  const std::size_t n = h.size();
  CVector w(n);
  if (n == 0) return w;
  std::vector<Givens> rot(n);

  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
  int its = 0;
  while (hi >= 0) {
    // Locate the start of the trailing unreduced block.
    std::ptrdiff_t l = hi;
    while (l > 0) {
      double s = cabs1(h(l - 1, l - 1)) + cabs1(h(l, l));
      if (s == 0.0) {
        for (std::ptrdiff_t j = l - 1; j <= hi; ++j) s += cabs1(h(l - 1, j));
      }
      if (cabs1(h(l, l - 1)) <= kEps * s) {
        h(l, l - 1) = 0.0;
        break;
      }
      --l;
    }
    if (l == hi) {
      w[hi] = h(hi, hi);
      --hi;
      its = 0;
      continue;
    }
    if (++its > kQrIterationsPerEigenvalue) {
      throw Error(ErrorCode::ConvergenceFailure,
                  "complex QR failed to converge for eigenvalue " + std::to_string(hi));
    }

    complex mu;
    if (its % 10 == 0) {
      mu = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1));
    } else {
      const complex a = h(hi - 1, hi - 1), b = h(hi - 1, hi);
      const complex c = h(hi, hi - 1), d = h(hi, hi);
      const complex half_diff = 0.5 * (a - d);
      const complex root = std::sqrt(half_diff * half_diff + b * c);
      const complex mid = 0.5 * (a + d);
      const complex e1 = mid + root, e2 = mid - root;
      mu = std::abs(e1 - d) < std::abs(e2 - d) ? e1 : e2;
    }

    for (std::ptrdiff_t k = l; k <= hi; ++k) h(k, k) -= mu;
    for (std::ptrdiff_t k = l; k < hi; ++k) {
      const Givens g = make_givens(h(k, k), h(k + 1, k));
      rot[k] = g;
      const complex sc = std::conj(g.s);
      complex* rk = &h(k, 0);
      complex* rk1 = &h(k + 1, 0);
      for (std::ptrdiff_t j = k; j <= hi; ++j) {
        const complex x = rk[j], y = rk1[j];
        rk[j] = g.c * x + mul(g.s, y);
        rk1[j] = g.c * y - mul(sc, x);
      }
      h(k + 1, k) = 0.0;
    }
    // Right rotations act on each row independently; row i sees rotations
    // k >= i - 1 in order, which keeps the sweep contiguous in memory.
    for (std::ptrdiff_t i = l; i <= hi; ++i) {
      complex* row = &h(i, 0);
      for (std::ptrdiff_t k = std::max(l, i - 1); k < hi; ++k) {
        const Givens g = rot[k];
        const complex xv = row[k], yv = row[k + 1];
        row[k] = g.c * xv + mul(std::conj(g.s), yv);
        row[k + 1] = g.c * yv - mul(g.s, xv);
      }
    }
    for (std::ptrdiff_t k = l; k <= hi; ++k) h(k, k) += mu;
  }
  return w;
}

CVector dense_eigenvalues(DenseMatrix a) {
  reduce_to_hessenberg(a);
  return hessenberg_eigenvalues(std::move(a));
}

std::size_t sturm_count(const RVector& d, const RVector& e, double sigma) {
  double emax = 1.0;
  for (double v : e) emax = std::max(emax, v * v);
  const double pivmin = DBL_MIN * emax;
  std::size_t count = 0;
  double q = d[0] - sigma;
  if (std::fabs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t k = 1; k < d.size(); ++k) {
    q = d[k] - sigma - e[k - 1] * e[k - 1] / q;
    if (std::fabs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

RVector lowest_eigenvalues(const RVector& d, const RVector& e, std::size_t count) {
  const std::size_t n = d.size();
  if (count > n) throw Error(ErrorCode::OutOfRange, "more eigenvalues requested than rows");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < n; ++k) {
    double radius = 0.0;
    if (k > 0) radius += std::fabs(e[k - 1]);
    if (k + 1 < n) radius += std::fabs(e[k]);
    lo = std::min(lo, d[k] - radius);
    hi = std::max(hi, d[k] + radius);
  }
  const double span = std::max(std::fabs(lo), std::fabs(hi));
  lo -= 2.0 * kEps * span + DBL_MIN;
  hi += 2.0 * kEps * span + DBL_MIN;

  RVector values(count);
  double floor = lo;
  for (std::size_t j = 0; j < count; ++j) {
    double a = floor, b = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (b - a <= 2.0 * kEps * std::max(std::fabs(a), std::fabs(b))) break;
      if (sturm_count(d, e, mid) <= j) {
        a = mid;
      } else {
        b = mid;
      }
    }
    values[j] = 0.5 * (a + b);
    floor = a;
  }
  return values;
}

TridiagonalLU::TridiagonalLU(CVector sub, CVector diag, CVector sup, double pivot_floor)
    : dl_(std::move(sub)), d_(std::move(diag)), du_(std::move(sup)) {
  const std::size_t n = d_.size();
  du2_.assign(n > 2 ? n - 2 : 0, 0.0);
  swapped_.assign(n > 1 ? n - 1 : 0, false);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d_[i]) >= std::abs(dl_[i])) {
      if (d_[i] == complex(0.0)) d_[i] = pivot_floor;
      if (d_[i] != complex(0.0)) {
        const complex fact = dl_[i] / d_[i];
        dl_[i] = fact;
        d_[i + 1] -= fact * du_[i];
      }
    } else {
      const complex fact = d_[i] / dl_[i];
      d_[i] = dl_[i];
      dl_[i] = fact;
      const complex temp = du_[i];
      du_[i] = d_[i + 1];
      d_[i + 1] = temp - fact * d_[i + 1];
      if (i + 2 < n) {
        du2_[i] = du_[i + 1];
        du_[i + 1] = -fact * du_[i + 1];
      }
      swapped_[i] = true;
    }
  }
  if (n > 0 && d_[n - 1] == complex(0.0)) d_[n - 1] = pivot_floor;
  for (std::size_t i = 0; i < n; ++i) {
    if (d_[i] == complex(0.0)) {
      throw Error(ErrorCode::SolverBreakdown, "singular tridiagonal matrix at row " + std::to_string(i));
    }
  }
}

void TridiagonalLU::solve(CVector& b) const {
  const std::size_t n = d_.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!swapped_[i]) {
      b[i + 1] -= dl_[i] * b[i];
    } else {
      const complex temp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = temp - dl_[i] * b[i];
    }
  }
  if (n == 0) return;
  b[n - 1] /= d_[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
  for (std::size_t k = n - 2; k-- > 0;) {
    b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
  }
}

ThomasSolver::ThomasSolver(const CVector& sub, const CVector& diag, const CVector& sup)
    : sub_(sub), inv_pivot_(diag.size()), upper_(sup.size()) {
  const std::size_t n = diag.size();
  complex prev_upper = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const complex w = k == 0 ? diag[0] : diag[0 + k] - sub[k - 1] * prev_upper;
    if (w == complex(0.0) || !std::isfinite(std::abs(w))) {
      throw Error(ErrorCode::SolverBreakdown, "zero pivot in tridiagonal solve at row " + std::to_string(k));
    }
    inv_pivot_[k] = 1.0 / w;
    if (k + 1 < n) {
      upper_[k] = sup[k] * inv_pivot_[k];
      prev_upper = upper_[k];
    }
  }
}

void ThomasSolver::solve(CVector& b) const {
  const std::size_t n = inv_pivot_.size();
  if (n == 0) return;
  b[0] *= inv_pivot_[0];
  for (std::size_t k = 1; k < n; ++k) b[k] = (b[k] - sub_[k - 1] * b[k - 1]) * inv_pivot_[k];
  for (std::size_t k = n - 1; k-- > 0;) b[k] -= upper_[k] * b[k + 1];
}

}  // namespace genqm::linalg

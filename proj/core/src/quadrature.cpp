// SPDX-License-Identifier: Apache-2.0
#include "topoflock/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace topoflock::quad {

namespace {

constexpr int max_depth = 48;
constexpr double tip_cut = 1e-5;

double adapt(const std::function<double(double)>& f, double a, double b,
             double fa, double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double flm = f(0.5 * (a + m));
  const double frm = f(0.5 * (m + b));
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) < 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double simpson_whole(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return adapt(f, a, b, fa, fm, fb, simpson_whole(a, b, fa, fm, fb), tol, max_depth);
}

double integrate_split(const std::function<double(double)>& f, double a, double b,
                       const std::vector<double>& interior_splits, double tol) {
  if (b <= a) return 0.0;
  std::vector<double> pts{a};
  for (double p : interior_splits) {
    if (p > a && p < b) pts.push_back(p);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  const double seg_tol = tol / static_cast<double>(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    total += integrate_auto(f, pts[i], pts[i + 1], seg_tol);
  }
  return total;
}

double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          bool singular_at_b, double tol) {
  if (b <= a) return 0.0;
  const double w = b - a;
  // r = b - w u^2 (singularity at b) or r = a + w u^2 (at a); either way the
  // substituted integrand is g(u) = f(r(u)) * 2 w u on u in (0, 1].
  auto g = [&](double u) {
    const double r = singular_at_b ? b - w * u * u : a + w * u * u;
    return f(r) * 2.0 * w * u;
  };
  const double g1 = g(tip_cut);
  const double g2 = g(2.0 * tip_cut);
  if (!std::isfinite(g1) || !std::isfinite(g2) || g1 <= 0.0 || g2 <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  // Near u = 0 the integrand behaves like c u^q; q <= -1 is non-integrable.
  const double q = std::log(g2 / g1) / std::log(2.0);
  if (q <= -0.999) return std::numeric_limits<double>::infinity();
  const double tip = g1 * tip_cut / (1.0 + q);
  return tip + integrate(g, tip_cut, 1.0, tol);
}

double integrate_auto(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const bool bad_a = !std::isfinite(f(a));
  const bool bad_b = !std::isfinite(f(b));
  if (bad_a && bad_b) return std::numeric_limits<double>::infinity();
  if (bad_a || bad_b) return integrate_singular(f, a, b, bad_b, tol);
  return integrate(f, a, b, tol);
}

}  // namespace topoflock::quad

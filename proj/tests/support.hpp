// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

// Independent numerical oracles for the test suite. Everything here is
// deliberately written against different algorithms than the library code it
// checks (fixed-panel Simpson instead of adaptive, eigendecompositions
// instead of time stepping, brute-force scans instead of closed forms).
namespace oracle {

using real_fn = std::function<double(double)>;

// Composite Simpson with a fixed even panel count.
inline double simpson(const real_fn& f, double a, double b, int panels) {
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  long double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) {
    acc += f(a + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  return static_cast<double>(acc * h / 3.0L);
}

// Recursive adaptive Simpson, independent of the library quadrature.
inline double adaptive_simpson_rec(const real_fn& f, double a, double b, double fa,
                                   double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const real_fn& f, double a, double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Gamma function by its integral definition (argument lifted into [1, 2] by
// the recurrence, then Gamma(x) = 2 int_0^inf u^{2x-1} e^{-u^2} du).
inline double gamma_integral(double x) {
  double factor = 1.0;
  while (x < 1.0) {
    factor /= x;
    x += 1.0;
  }
  const double val = 2.0 * simpson([x](double u) {
                       return std::pow(u, 2.0 * x - 1.0) * std::exp(-u * u);
                     },
                     0.0, 14.0, 200000);
  return factor * val;
}

// Godunov flux for flux function A on [0, 1]: min over [Ml, Mr] when
// Ml <= Mr, max over [Mr, Ml] otherwise. A is scanned at the supplied
// breakpoints (plus the interval ends), which is exact for piecewise-linear A.
inline double godunov_flux(const real_fn& A, double m_left, double m_right,
                           const std::vector<double>& breakpoints) {
  const double lo = std::min(m_left, m_right);
  const double hi = std::max(m_left, m_right);
  double mn = std::min(A(lo), A(hi));
  double mx = std::max(A(lo), A(hi));
  for (double b : breakpoints) {
    if (b > lo && b < hi) {
      mn = std::min(mn, A(b));
      mx = std::max(mx, A(b));
    }
  }
  return m_left <= m_right ? mn : mx;
}

// exp(-G t) v0 for a symmetric generator G, by dense eigendecomposition.
inline Eigen::VectorXd heat_flow(const Eigen::MatrixXd& G, const Eigen::VectorXd& v0,
                                 double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const Eigen::VectorXd coef = es.eigenvectors().transpose() * v0;
  Eigen::VectorXd damped = coef;
  for (Eigen::Index i = 0; i < damped.size(); ++i) {
    damped[i] *= std::exp(-es.eigenvalues()[i] * t);
  }
  return es.eigenvectors() * damped;
}

// Smallest eigenvalue of a symmetric positive-definite matrix by inverse
// power iteration (LU solves), independent of SelfAdjointEigenSolver.
inline double smallest_eigenvalue_inverse_iteration(const Eigen::MatrixXd& B,
                                                    int iters = 400) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(B.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += 0.01 * std::sin(1.0 + 3.7 * i);
  x.normalize();
  for (int k = 0; k < iters; ++k) {
    x = lu.solve(x);
    x.normalize();
  }
  return x.dot(B * x);
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::vector<double> random_uniform(std::mt19937_64& gen, int n, double lo,
                                          double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& x : out) x = dist(gen);
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("topoflock_tests_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Byte-compare every regular file under two directories (same relative set).
inline bool directories_identical(const std::filesystem::path& a,
                                  const std::filesystem::path& b,
                                  std::string* detail = nullptr) {
  namespace fs = std::filesystem;
  std::vector<fs::path> rel_a, rel_b;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a));
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b));
  }
  std::sort(rel_a.begin(), rel_a.end());
  std::sort(rel_b.begin(), rel_b.end());
  if (rel_a != rel_b) {
    if (detail) *detail = "file sets differ";
    return false;
  }
  for (const auto& rel : rel_a) {
    if (read_file(a / rel) != read_file(b / rel)) {
      if (detail) *detail = "content differs: " + rel.string();
      return false;
    }
  }
  return true;
}

}  // namespace oracle

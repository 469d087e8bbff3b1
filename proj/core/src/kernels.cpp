// SPDX-License-Identifier: Apache-2.0
#include "topoflock/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "topoflock/errors.hpp"
#include "topoflock/quadrature.hpp"

namespace topoflock {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double vanish_eps = 1e-300;

double interp1(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

void require_grid(const std::vector<double>& xs, const char* what) {
  if (xs.size() < 2) throw config_error(std::string(what) + ": need at least two points");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw config_error(std::string(what) + ": grid must be strictly increasing");
    }
  }
}

}  // namespace

double fractional_constant(double s) {
  if (!(s > 0.0 && s < 1.0)) throw config_error("fractional order s must lie in (0, 1)");
  return s * std::pow(4.0, s) * std::tgamma(0.5 + s) /
         (std::sqrt(M_PI) * std::tgamma(1.0 - s));
}

Kernel Kernel::constant(double value, kernel_kind kind) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw config_error("constant kernel value must be positive and finite");
  }
  Kernel k;
  k.family_ = family::constant;
  k.kind_ = kind;
  k.p0_ = value;
  return k;
}

Kernel Kernel::power_law(double s) {
  Kernel k;
  k.family_ = family::power_law;
  k.kind_ = kernel_kind::pure;
  k.p0_ = s;
  k.p1_ = fractional_constant(s);
  return k;
}

Kernel Kernel::affine_decay(double scale, double slope, double alpha) {
  if (!(scale > 0.0) || !(slope > 0.0) || !(alpha > 0.0 && alpha <= 1.0)) {
    throw config_error("affine_decay requires scale > 0, slope > 0, alpha in (0, 1]");
  }
  Kernel k;
  k.family_ = family::affine;
  k.kind_ = kernel_kind::pure;
  k.p0_ = scale;
  k.p1_ = slope;
  k.p2_ = alpha;
  return k;
}

Kernel Kernel::affine_decay_general(double a, double b, double halfwidth) {
  if (!(a > 0.0) || !(b >= 0.0) || !(halfwidth > 0.0)) {
    throw config_error("affine_decay (general) requires a > 0, b >= 0, halfwidth > 0");
  }
  Kernel k;
  k.family_ = family::affine_general;
  k.kind_ = kernel_kind::general;
  k.p0_ = a;
  k.p1_ = b;
  k.p2_ = halfwidth;
  return k;
}

Kernel Kernel::custom_table(std::vector<double> d, std::vector<double> phi) {
  require_grid(d, "custom_table d");
  if (phi.size() != d.size()) throw config_error("custom_table: d and phi sizes differ");
  if (d.front() < 0.0) throw config_error("custom_table: d must start at >= 0");
  for (double v : phi) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw config_error("custom_table: phi values must be finite and >= 0");
    }
  }
  Kernel k;
  k.family_ = family::table;
  k.kind_ = kernel_kind::pure;
  k.tab_d_ = std::move(d);
  k.tab_phi_ = std::move(phi);
  return k;
}

Kernel Kernel::custom_table_general(std::vector<double> d, std::vector<double> z,
                                    std::vector<double> phi) {
  require_grid(d, "custom_table d");
  require_grid(z, "custom_table z");
  if (d.front() < 0.0 || z.front() < 0.0) {
    throw config_error("custom_table: d and z must start at >= 0");
  }
  if (phi.size() != d.size() * z.size()) {
    throw config_error("custom_table: phi size must be |d| * |z| (row-major over d)");
  }
  for (double v : phi) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw config_error("custom_table: phi values must be finite and >= 0");
    }
  }
  Kernel k;
  k.family_ = family::table_general;
  k.kind_ = kernel_kind::general;
  k.tab_d_ = std::move(d);
  k.tab_z_ = std::move(z);
  k.tab_phi_ = std::move(phi);
  return k;
}

bool Kernel::bounded() const { return family_ != family::power_law; }

double Kernel::fractional_order() const {
  if (family_ != family::power_law) {
    throw unsupported_operation("fractional_order: not a power-law kernel");
  }
  return p0_;
}

double Kernel::eval_raw(double d, double z) const {
  d = std::abs(d);
  z = std::abs(z);
  switch (family_) {
    case family::constant:
      return p0_;
    case family::power_law:
      if (d == 0.0) return inf;
      return p1_ * std::pow(d, -1.0 - 2.0 * p0_);
    case family::affine: {
      const double base = 1.0 - p1_ * d;
      if (base <= 0.0) return 0.0;
      return p0_ * std::pow(base, p2_);
    }
    case family::affine_general:
      if (z > p2_) return 0.0;
      return std::max(p0_ - p1_ * d, 0.0);
    case family::table:
      return interp1(tab_d_, tab_phi_, d);
    case family::table_general: {
      if (d <= tab_d_.front() || d >= tab_d_.back()) {
        const std::size_t row = (d <= tab_d_.front()) ? 0 : tab_d_.size() - 1;
        std::vector<double> slice(tab_z_.size());
        for (std::size_t j = 0; j < tab_z_.size(); ++j) {
          slice[j] = tab_phi_[row * tab_z_.size() + j];
        }
        return interp1(tab_z_, slice, z);
      }
      const auto it = std::upper_bound(tab_d_.begin(), tab_d_.end(), d);
      const std::size_t i = static_cast<std::size_t>(it - tab_d_.begin());
      const double t = (d - tab_d_[i - 1]) / (tab_d_[i] - tab_d_[i - 1]);
      std::vector<double> lo(tab_z_.size()), hi(tab_z_.size());
      for (std::size_t j = 0; j < tab_z_.size(); ++j) {
        lo[j] = tab_phi_[(i - 1) * tab_z_.size() + j];
        hi[j] = tab_phi_[i * tab_z_.size() + j];
      }
      return (1.0 - t) * interp1(tab_z_, lo, z) + t * interp1(tab_z_, hi, z);
    }
  }
  return 0.0;
}

double Kernel::eval(double d) const {
  if (kind_ != kernel_kind::pure) {
    throw unsupported_operation("eval(d): kernel is not pure; pass the offset z");
  }
  return eval(d, 0.0);
}

double Kernel::eval(double d, double z) const {
  const double v = eval_raw(d, z);
  if (!std::isfinite(v)) {
    throw std::domain_error("kernel evaluation is unbounded at d = " + std::to_string(d));
  }
  return v;
}

double Kernel::antiderivative(double d, double z) const {
  if (!bounded()) {
    throw unsupported_operation("antiderivative: kernel is unbounded");
  }
  const double sign = (z < 0.0) ? -1.0 : 1.0;
  const double az = std::abs(z);
  switch (family_) {
    case family::constant:
      return sign * p0_ * az;
    case family::affine:
    case family::table:
      // z-independent phi: Phi(d, z) = phi(d) * z.
      return sign * eval_raw(d, 0.0) * az;
    case family::affine_general:
      return sign * std::max(p0_ - p1_ * std::abs(d), 0.0) * std::min(az, p2_);
    case family::table_general: {
      auto f = [&](double zeta) { return eval_raw(d, zeta); };
      std::vector<double> splits(tab_z_.begin(), tab_z_.end());
      return sign * quad::integrate_split(f, 0.0, az, splits, 1e-12);
    }
    default:
      break;
  }
  throw unsupported_operation("antiderivative: unhandled kernel family");
}

double Kernel::sup_norm() const {
  switch (family_) {
    case family::constant:
      return p0_;
    case family::power_law:
      return inf;
    case family::affine:
      return p0_;
    case family::affine_general:
      return p0_;
    case family::table:
      return *std::max_element(tab_phi_.begin(), tab_phi_.end());
    case family::table_general:
      return *std::max_element(tab_phi_.begin(), tab_phi_.end());
  }
  return 0.0;
}

double Kernel::vanishing_radius() const {
  switch (family_) {
    case family::constant:
    case family::power_law:
      return inf;
    case family::affine:
      return 1.0 / p1_;
    case family::affine_general:
      return (p1_ > 0.0) ? p0_ / p1_ : inf;
    case family::table: {
      // phi clamps to the last value beyond the table; zero tail only if the
      // trailing values vanish.
      double r = inf;
      for (std::size_t i = tab_phi_.size(); i-- > 0;) {
        if (tab_phi_[i] > vanish_eps) break;
        r = tab_d_[i];
      }
      return r;
    }
    case family::table_general: {
      double r = inf;
      const std::size_t nz = tab_z_.size();
      for (std::size_t i = tab_d_.size(); i-- > 0;) {
        bool all_zero = true;
        for (std::size_t j = 0; j < nz; ++j) {
          if (tab_phi_[i * nz + j] > vanish_eps) all_zero = false;
        }
        if (!all_zero) break;
        r = tab_d_[i];
      }
      return r;
    }
  }
  return inf;
}

std::string Kernel::describe() const {
  std::ostringstream os;
  switch (family_) {
    case family::constant:
      os << "constant(" << p0_ << ")";
      break;
    case family::power_law:
      os << "power_law(s=" << p0_ << ", C_s=" << p1_ << ")";
      break;
    case family::affine:
      os << "affine_decay(scale=" << p0_ << ", slope=" << p1_ << ", alpha=" << p2_ << ")";
      break;
    case family::affine_general:
      os << "affine_decay(a=" << p0_ << ", b=" << p1_ << ", halfwidth=" << p2_ << ")";
      break;
    case family::table:
      os << "custom_table(" << tab_d_.size() << " points)";
      break;
    case family::table_general:
      os << "custom_table(" << tab_d_.size() << "x" << tab_z_.size() << " lattice)";
      break;
  }
  return os.str();
}

double poincare_constant(const Kernel& kernel, int n_grid) {
  if (kernel.kind() != kernel_kind::pure) {
    throw unsupported_operation("poincare_constant: pure kernels only");
  }
  if (n_grid < 2) throw config_error("poincare_constant: n_grid must be >= 2");

  // Vanishing on a set of positive measure within [0, 1] means the essential
  // sup is infinite; sample midpoints so an isolated zero at r = 1 is not
  // flagged.
  for (int j = 0; j < n_grid; ++j) {
    const double r = (j + 0.5) / n_grid;
    if (kernel.eval_raw(r, 0.0) < vanish_eps) {
      return std::numeric_limits<double>::infinity();
    }
  }

  auto g = [&](double r) {
    const double phi = kernel.eval_raw(r, 0.0);
    if (phi < vanish_eps) return std::numeric_limits<double>::infinity();
    return 1.0 / phi;
  };

  // I(m) = G(m) + G(1 - m) with G(x) = int_0^x g; G accumulated over the
  // grid segments so each segment is integrated once.
  const int n = n_grid;
  std::vector<double> G(static_cast<std::size_t>(n) + 1, 0.0);
  const double seg_tol = 1e-11 / n;
  for (int i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / n;
    const double b = static_cast<double>(i + 1) / n;
    G[i + 1] = G[i] + quad::integrate_auto(g, a, b, seg_tol);
  }
  double best = 0.0;
  for (int i = 0; i <= n; ++i) {
    best = std::max(best, G[i] + G[n - i]);
  }
  return best;
}

}  // namespace topoflock

// SPDX-License-Identifier: Apache-2.0
#include "topoflock/spectral.hpp"

#include <cmath>

#include "topoflock/csv.hpp"
#include "topoflock/errors.hpp"
#include "topoflock/kernels.hpp"

namespace topoflock {

namespace {

// Double antiderivative of r^{-1-2s}; linear terms drop out of the second
// difference, so constants of integration are omitted.
double g2(double r, double s) {
  if (std::abs(s - 0.5) < 1e-14) return -std::log(r);
  return std::pow(r, 1.0 - 2.0 * s) / ((2.0 * s) * (2.0 * s - 1.0));
}

// Double antiderivative of r^{1-2s} (the kernel times r^2), finite at 0 for
// all s in (0, 1).
double f2(double r, double s) {
  return std::pow(r, 3.0 - 2.0 * s) / ((3.0 - 2.0 * s) * (2.0 - 2.0 * s));
}

}  // namespace

SpectralOperator::SpectralOperator(double s, spectral_bc bc, int n)
    : s_(s), bc_(bc), n_(n) {
  if (!(s > 0.0 && s < 1.0)) throw config_error("spectral operator: s must lie in (0, 1)");
  if (n < 4) throw config_error("spectral operator: n must be >= 4");
  if (n > 2048) throw config_error("spectral operator: dense path is capped at n = 2048");
  c_s_ = fractional_constant(s);

  const double h = 1.0 / n;
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  for (int k = 2; k < n; ++k) {
    w[static_cast<std::size_t>(k)] =
        g2((k + 1) * h, s) - 2.0 * g2(k * h, s) + g2((k - 1) * h, s);
  }
  if (n >= 2) {
    if (s < 0.5) {
      // g2(0) = 0 for s < 1/2: the exact adjacent integral is finite.
      w[1] = g2(2.0 * h, s) - 2.0 * g2(h, s);
    } else {
      w[1] = (f2(2.0 * h, s) - 2.0 * f2(h, s)) / (h * h);
    }
  }

  form_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    long double row = 0.0L;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      row += w[static_cast<std::size_t>(std::abs(i - j))];
    }
    for (int j = 0; j < n; ++j) {
      form_(i, j) = (i == j)
                        ? c_s_ * static_cast<double>(row)
                        : -c_s_ * w[static_cast<std::size_t>(std::abs(i - j))];
    }
  }

  // Eigenproblem of the generator in the (1/n) inner product: A = n K.
  if (bc_ == spectral_bc::neumann) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(static_cast<double>(n) * form_);
    if (es.info() != Eigen::Success) throw stability_error("spectral eigensolve failed");
    lambda_.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    modes_.reserve(static_cast<std::size_t>(n));
    const double scale = std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) {
      modes_.push_back(scale * es.eigenvectors().col(i));
    }
  } else {
    const int m = n - 2;
    Eigen::MatrixXd interior = static_cast<double>(n) * form_.block(1, 1, m, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(interior);
    if (es.info() != Eigen::Success) throw stability_error("spectral eigensolve failed");
    lambda_.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
    modes_.reserve(static_cast<std::size_t>(m));
    const double scale = std::sqrt(static_cast<double>(n));
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
      full.segment(1, m) = scale * es.eigenvectors().col(i);
      modes_.push_back(std::move(full));
    }
  }
}

double SpectralOperator::pair_weight(int k) const {
  if (k < 1 || k >= n_) throw config_error("pair_weight: cell distance out of range");
  const double h = 1.0 / n_;
  if (k >= 2) return g2((k + 1) * h, s_) - 2.0 * g2(k * h, s_) + g2((k - 1) * h, s_);
  if (s_ < 0.5) return g2(2.0 * h, s_) - 2.0 * g2(h, s_);
  return (f2(2.0 * h, s_) - 2.0 * f2(h, s_)) / (h * h);
}

double SpectralOperator::lambda1() const {
  return bc_ == spectral_bc::neumann ? lambda_[1] : lambda_[0];
}

VelocityGrid SpectralOperator::evolve(const VelocityGrid& v0, double t) const {
  if (v0.n != n_) throw config_error("spectral evolve: grid size mismatch");
  Eigen::Map<const Eigen::VectorXd> v(v0.values.data(), n_);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_);
  for (std::size_t i = 0; i < lambda_.size(); ++i) {
    const double c = modes_[i].dot(v) / n_;
    acc += std::exp(-lambda_[i] * t) * c * modes_[i];
  }
  VelocityGrid out(n_, v0.time + t);
  Eigen::Map<Eigen::VectorXd>(out.values.data(), n_) = acc;
  return out;
}

double SpectralOperator::dirichlet_form(const std::vector<double>& v,
                                        const std::vector<double>& w) const {
  if (static_cast<int>(v.size()) != n_ || static_cast<int>(w.size()) != n_) {
    throw config_error("dirichlet_form: size mismatch");
  }
  Eigen::Map<const Eigen::VectorXd> vv(v.data(), n_);
  Eigen::Map<const Eigen::VectorXd> ww(w.data(), n_);
  return vv.dot(form_ * ww);
}

double SpectralOperator::rayleigh(const std::vector<double>& v) const {
  Eigen::Map<const Eigen::VectorXd> vv(v.data(), n_);
  const double norm2 = vv.squaredNorm() / n_;
  if (!(norm2 > 0.0)) throw config_error("rayleigh: zero vector");
  return dirichlet_form(v, v) / norm2;
}

double SpectralOperator::sobolev_norm(const std::vector<double>& v) const {
  Eigen::Map<const Eigen::VectorXd> vv(v.data(), n_);
  return std::sqrt(vv.squaredNorm() / n_ + dirichlet_form(v, v));
}

void SpectralOperator::save_spectrum_csv(const std::string& path) const {
  csv::Writer out(path, "index,lambda");
  for (std::size_t i = 0; i < lambda_.size(); ++i) {
    out.row({static_cast<double>(i), lambda_[i]});
  }
  out.close();
}

}  // namespace topoflock

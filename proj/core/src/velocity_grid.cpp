// SPDX-License-Identifier: Apache-2.0
#include "topoflock/velocity_grid.hpp"

#include <algorithm>
#include <cmath>

#include "topoflock/csv.hpp"
#include "topoflock/errors.hpp"

namespace topoflock {

VelocityGrid::VelocityGrid(int n_cells, double t) : n(n_cells), time(t) {
  if (n_cells < 1) throw config_error("velocity grid: n must be positive");
  values.assign(static_cast<std::size_t>(n_cells), 0.0);
}

VelocityGrid VelocityGrid::sample(int n_cells, const std::function<double(double)>& v,
                                  double t) {
  VelocityGrid g(n_cells, t);
  for (int i = 0; i < n_cells; ++i) {
    g.values[static_cast<std::size_t>(i)] = v(g.midpoint(i));
  }
  return g;
}

double VelocityGrid::at_mass(double m) const {
  const int i = std::clamp(static_cast<int>(m * n), 0, n - 1);
  return values[static_cast<std::size_t>(i)];
}

double VelocityGrid::interp(double m) const {
  const double pos = m * n - 0.5;
  if (pos <= 0.0) return values.front();
  if (pos >= n - 1.0) return values.back();
  const int i = static_cast<int>(pos);
  const double t = pos - i;
  return values[static_cast<std::size_t>(i)] * (1.0 - t) +
         values[static_cast<std::size_t>(i) + 1] * t;
}

double VelocityGrid::mean() const {
  long double acc = 0.0L;
  for (double v : values) acc += v;
  return static_cast<double>(acc / n);
}

double VelocityGrid::energy() const {
  long double acc = 0.0L;
  for (double v : values) acc += static_cast<long double>(v) * v;
  return static_cast<double>(acc / n);
}

double VelocityGrid::deviation_energy() const {
  const double m = mean();
  long double acc = 0.0L;
  for (double v : values) {
    const long double d = static_cast<long double>(v) - m;
    acc += d * d;
  }
  return static_cast<double>(acc / n);
}

double VelocityGrid::sup_deviation() const {
  const double m = mean();
  double best = 0.0;
  for (double v : values) best = std::max(best, std::abs(v - m));
  return best;
}

double VelocityGrid::sup_norm() const {
  double best = 0.0;
  for (double v : values) best = std::max(best, std::abs(v));
  return best;
}

void VelocityGrid::save_csv(const std::string& path) const {
  csv::Writer w(path, "m,v");
  for (int i = 0; i < n; ++i) {
    w.row({midpoint(i), values[static_cast<std::size_t>(i)]});
  }
  w.close();
}

VelocityGrid VelocityGrid::load_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  auto [m, v] = csv::two_columns(t, path);
  VelocityGrid g(static_cast<int>(v.size()));
  g.values = v;
  return g;
}

FluxPrimitive::FluxPrimitive(const VelocityGrid& v) : n_(v.n), values_(v.values) {
  prefix_.resize(values_.size() + 1, 0.0);
  prefix_pos_.resize(values_.size() + 1, 0.0);
  prefix_neg_.resize(values_.size() + 1, 0.0);
  const double h = 1.0 / n_;
  long double acc = 0.0L, acc_p = 0.0L, acc_n = 0.0L;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double vi = values_[i];
    acc += static_cast<long double>(vi) * h;
    acc_p += static_cast<long double>(std::max(vi, 0.0)) * h;
    acc_n += static_cast<long double>(std::min(vi, 0.0)) * h;
    prefix_[i + 1] = static_cast<double>(acc);
    prefix_pos_[i + 1] = static_cast<double>(acc_p);
    prefix_neg_[i + 1] = static_cast<double>(acc_n);
    lipschitz_ = std::max(lipschitz_, std::abs(vi));
  }
}

namespace {
double eval_prefix(const std::vector<double>& prefix, const std::vector<double>& values,
                   int n, double m, double (*part)(double)) {
  m = std::clamp(m, 0.0, 1.0);
  const int k = std::min(static_cast<int>(m * n), n - 1);
  const double left = static_cast<double>(k) / n;
  return prefix[static_cast<std::size_t>(k)] +
         part(values[static_cast<std::size_t>(k)]) * (m - left);
}
}  // namespace

double FluxPrimitive::operator()(double m) const {
  return eval_prefix(prefix_, values_, n_, m, [](double v) { return v; });
}

double FluxPrimitive::positive_part(double m) const {
  return eval_prefix(prefix_pos_, values_, n_, m,
                     [](double v) { return std::max(v, 0.0); });
}

double FluxPrimitive::negative_part(double m) const {
  return eval_prefix(prefix_neg_, values_, n_, m,
                     [](double v) { return std::min(v, 0.0); });
}

double FluxPrimitive::total() const { return prefix_.back(); }

}  // namespace topoflock

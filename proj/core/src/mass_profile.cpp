// SPDX-License-Identifier: Apache-2.0
#include "topoflock/mass_profile.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "topoflock/csv.hpp"
#include "topoflock/errors.hpp"

namespace topoflock {

namespace {
constexpr double mass_tol = 1e-9;
}

MassProfile MassProfile::from_cdf(std::vector<double> nodes, std::vector<double> values,
                                  std::vector<Atom> atoms) {
  if (nodes.empty() || nodes.size() != values.size()) {
    throw config_error("mass profile: nodes and values must be non-empty and equal-sized");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw config_error("mass profile: nodes must be strictly increasing");
    }
  }
  if (std::abs(values.front()) > mass_tol) {
    throw config_error("mass profile: continuous CDF part must start at 0; "
                       "declare point mass at the first node as an atom");
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[i - 1] - 1e-12) {
      throw config_error("mass profile: CDF values must be nondecreasing");
    }
    values[i] = std::max(values[i], values[i - 1]);
  }
  double atom_total = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.mass > 0.0)) throw config_error("mass profile: atom masses must be positive");
    if (a.position < nodes.front() - 1e-12 || a.position > nodes.back() + 1e-12) {
      throw config_error("mass profile: atom outside the node range");
    }
    atom_total += a.mass;
  }
  const double base = values.front();
  const double total = (values.back() - base) + atom_total;
  if (std::abs(total - 1.0) > mass_tol) {
    throw config_error("mass profile: total mass is " + std::to_string(total) +
                       ", expected 1");
  }

  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });

  // Continuous part, exactly normalized.
  auto cont = [&](double x) {
    if (x <= nodes.front()) return 0.0;
    if (x >= nodes.back()) return (values.back() - base) / total;
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
    const double t = (x - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
    return ((values[i - 1] - base) + t * (values[i] - values[i - 1])) / total;
  };

  // Merge nodes and atom positions into one breakpoint list.
  std::map<double, double> atom_at;
  for (const Atom& a : atoms) atom_at[a.position] += a.mass / total;
  std::vector<double> bp(nodes.begin(), nodes.end());
  for (const auto& [p, m] : atom_at) bp.push_back(p);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end(),
                       [](double a, double b) { return a == b; }),
           bp.end());

  MassProfile out;
  out.x_ = bp;
  out.left_.resize(bp.size());
  out.right_.resize(bp.size());
  double jumped = 0.0;
  for (std::size_t i = 0; i < bp.size(); ++i) {
    out.left_[i] = cont(bp[i]) + jumped;
    const auto it = atom_at.find(bp[i]);
    if (it != atom_at.end()) jumped += it->second;
    out.right_[i] = cont(bp[i]) + jumped;
  }
  out.right_.back() = 1.0;
  for (const auto& [p, m] : atom_at) out.atoms_.push_back({p, m});
  return out;
}

MassProfile MassProfile::from_density_samples(const std::vector<double>& x,
                                              const std::vector<double>& rho) {
  if (x.size() < 2 || x.size() != rho.size()) {
    throw config_error("density samples: need >= 2 equal-sized columns");
  }
  for (double r : rho) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw config_error("density samples: values must be finite and >= 0");
    }
  }
  std::vector<double> values(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw config_error("density samples: x must be increasing");
    values[i] = values[i - 1] + 0.5 * (rho[i] + rho[i - 1]) * (x[i] - x[i - 1]);
  }
  const double total = values.back();
  if (!(total > 0.0)) throw config_error("density samples: total mass is zero");
  for (double& v : values) v /= total;
  MassProfile out = from_cdf(x, values);
  out.renormalization_ = 1.0 / total;
  return out;
}

MassProfile MassProfile::uniform(double lo, double hi) {
  if (!(hi > lo)) throw config_error("uniform profile: hi must exceed lo");
  return from_cdf({lo, hi}, {0.0, 1.0});
}

MassProfile MassProfile::two_block(double a0, double b0, double a1, double b1, double mass0) {
  if (!(a0 < b0 && b0 <= a1 && a1 < b1)) {
    throw config_error("two_block profile: need a0 < b0 <= a1 < b1");
  }
  if (!(mass0 > 0.0 && mass0 < 1.0)) {
    throw config_error("two_block profile: mass0 must lie in (0, 1)");
  }
  if (b0 == a1) return from_cdf({a0, b0, b1}, {0.0, mass0, 1.0});
  return from_cdf({a0, b0, a1, b1}, {0.0, mass0, mass0, 1.0});
}

double MassProfile::operator()(double x) const {
  if (x < x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double seg = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / seg;
  return right_[i] + t * (left_[i + 1] - right_[i]);
}

double MassProfile::quantile(double m) const {
  if (!(m > 0.0 && m <= 1.0)) {
    throw config_error("quantile: mass level must lie in (0, 1]");
  }
  // First breakpoint whose right value reaches m.
  const auto it = std::lower_bound(right_.begin(), right_.end(), m);
  const std::size_t i = static_cast<std::size_t>(it - right_.begin());
  if (i == 0) return x_.front();
  // The continuous rise on (x_{i-1}, x_i) may reach m before x_i.
  if (left_[i] >= m && left_[i] > right_[i - 1]) {
    const double t = (m - right_[i - 1]) / (left_[i] - right_[i - 1]);
    return x_[i - 1] + t * (x_[i] - x_[i - 1]);
  }
  return x_[i];
}

double MassProfile::topo_distance(double x, double y) const {
  return std::abs((*this)(y) - (*this)(x));
}

std::vector<double> MassProfile::pushforward_uniform(int n) const {
  if (n < 1) throw config_error("pushforward_uniform: n must be positive");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = quantile((i + 0.5) / n);
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> MassProfile::density() const {
  if (has_atoms()) {
    throw unsupported_operation("density: profile has atoms");
  }
  std::vector<double> vals(x_.size() - 1);
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    vals[i] = (left_[i + 1] - right_[i]) / (x_[i + 1] - x_[i]);
  }
  return {x_, vals};
}

MassProfile MassProfile::shifted(double dx) const {
  MassProfile out = *this;
  for (double& x : out.x_) x += dx;
  for (Atom& a : out.atoms_) a.position += dx;
  return out;
}

MassProfile MassProfile::load_csv(const std::string& path) {
  const csv::Table table = csv::read(path);
  std::vector<double> nodes, values;
  std::vector<Atom> atoms;
  for (const auto& row : table.rows) {
    if (!row.labels.empty() && row.labels[0] == "atom") {
      if (row.numbers.size() != 2) throw io_error(path + ": atom rows need position,mass");
      atoms.push_back({row.numbers[0], row.numbers[1]});
      continue;
    }
    if (row.numbers.size() != 2) throw io_error(path + ": expected rows x,M");
    nodes.push_back(row.numbers[0]);
    values.push_back(row.numbers[1]);
  }
  try {
    return from_cdf(std::move(nodes), std::move(values), std::move(atoms));
  } catch (const config_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

void MassProfile::save_csv(const std::string& path) const {
  csv::Writer w(path, "x,M");
  // Continuous part: subtract accumulated atom mass from the stored totals.
  double jumped = 0.0;
  std::size_t next_atom = 0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    while (next_atom < atoms_.size() && atoms_[next_atom].position <= x_[i]) {
      jumped += atoms_[next_atom].mass;
      ++next_atom;
    }
    w.row({x_[i], right_[i] - jumped});
  }
  for (const Atom& a : atoms_) {
    w.labeled_row("atom", {a.position, a.mass});
  }
}

std::function<double(double)> to_mass_velocity(const MassProfile& M,
                                               std::function<double(double)> u) {
  return [M, u = std::move(u)](double m) { return u(M.quantile(m)); };
}

std::function<double(double)> to_space_velocity(const MassProfile& M,
                                                std::function<double(double)> v) {
  return [M, v = std::move(v)](double x) {
    const double m = M(x);
    return v(m);
  };
}

}  // namespace topoflock

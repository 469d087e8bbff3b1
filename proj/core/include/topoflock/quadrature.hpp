// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

namespace topoflock::quad {

// Adaptive Simpson integration of f over [a, b]. `tol` is an absolute
// tolerance on the whole interval. Integrands must be finite on [a, b];
// integrable endpoint singularities are handled by integrate_singular.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-11);

// Same, but the interval is first split at the given interior points
// (kinks of the integrand), so each panel is smooth.
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       const std::vector<double>& interior_splits, double tol = 1e-11);

// Integrates f over [a, b] when f has an integrable singularity at one
// endpoint (f evaluates to a non-finite value there). A sqrt substitution
// is applied toward the singular end; the remaining tip below the
// substituted coordinate 1e-5 is estimated with a local power fit.
// Returns +inf when the tip fit indicates a non-integrable singularity.
double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          bool singular_at_b, double tol = 1e-11);

// Dispatches between integrate and integrate_singular based on endpoint
// evaluations. Both endpoints singular is not supported and returns +inf.
double integrate_auto(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-11);

}  // namespace topoflock::quad

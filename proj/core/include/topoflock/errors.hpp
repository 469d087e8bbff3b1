// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace topoflock {

// Invalid or inconsistent user-facing configuration (CLI exit code 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A runtime solver invariant was violated mid-run, e.g. the discrete maximum
// principle (CLI exit code 3). Statically checkable step bounds (CFL number,
// explicit dt * sup phi) are configuration errors instead; the conservation
// monitors record violations in the run report rather than throwing.
struct stability_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File system or format failures while reading or writing artifacts
// (CLI exit code 4).
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation that is undefined for the given object, e.g. the kernel
// antiderivative of an unbounded kernel or the density of a profile with
// atoms.
struct unsupported_operation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace topoflock

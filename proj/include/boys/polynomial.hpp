#pragma once

// Real polynomials in ascending coefficient order and their complex roots.

#include <span>
#include <vector>

#include "boys/real.hpp"

namespace boys::poly {

struct Complex {
  Real re;
  Real im;
};

Real horner(std::span<const Real> coeffs, const Real& x);

// All complex roots of sum_k coeffs[k] x^k (leading coefficient nonzero),
// by Aberth-Ehrlich simultaneous iteration: a long double pass for starting
// values, then refinement at the coefficients' precision.
// Throws RootRefinementError if the iteration does not settle.
std::vector<Complex> roots(std::span<const Real> coeffs);

// Product of two polynomials.
std::vector<Real> multiply(std::span<const Real> a, std::span<const Real> b);

}  // namespace boys::poly

#pragma once

#include <functional>
#include <vector>

#include "pwb/precision.hpp"

namespace pwb {

// Gauss-Legendre rule on [-1, 1] at the current working precision.
struct GaussRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

const GaussRule& gauss_legendre(unsigned npoints);

using RealFn = std::function<Real(const Real&)>;

Real integrate_panels(const RealFn& f, const Real& a, const Real& b, unsigned panels,
                      unsigned npoints = 24);

// Panel-doubling integration; QuadratureFailure when successive refinements
// do not agree within tol.
Real integrate_adaptive(const RealFn& f, const Real& a, const Real& b, const Real& tol,
                        unsigned npoints = 24, unsigned max_doublings = 14);

}  // namespace pwb

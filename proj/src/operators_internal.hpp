#pragma once

#include "nematic/operators.hpp"

namespace nematic::detail {

/// All nonlinear terms of the coupled system from one pass over the padded grid.
struct NonlinearTerms {
    DivergenceFreeField convection;  // B(u)
    VectorField advection;           // B~(u, theta)
    DivergenceFreeField stress;      // M(theta)
    VectorField f;                   // f(theta), truncated
};

NonlinearTerms evaluate_nonlinear(const DivergenceFreeField& u, const VectorField& theta,
                                  const PolynomialNonlinearity& nl, int f_grid);

}  // namespace nematic::detail

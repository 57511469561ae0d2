#pragma once

#include <cstdint>

#include "nematic/spectral.hpp"

namespace nematic {

/// Random real field with independent Gaussian coefficients on |k_i| <= max_k,
/// scaled by (1 + |k|^2)^(-decay/2) and normalized to unit L2 norm.
ScalarField random_scalar(const TorusGrid& grid, std::uint64_t seed, int max_k = -1, double decay = 0.0);
VectorField random_vector(const TorusGrid& grid, std::uint64_t seed, int max_k = -1, double decay = 0.0);
DivergenceFreeField random_divergence_free(const TorusGrid& grid, std::uint64_t seed, int max_k = -1,
                                           double decay = 0.0);

}  // namespace nematic

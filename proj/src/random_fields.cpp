#include "nematic/random_fields.hpp"

#include <cmath>
#include <random>

#include "nematic/rng.hpp"

namespace nematic {

ScalarField random_scalar(const TorusGrid& grid, std::uint64_t seed, int max_k, double decay) {
    const int km = max_k < 0 ? grid.max_wavenumber() : std::min(max_k, grid.max_wavenumber());
    CounterRng rng(seed);
    std::normal_distribution<double> normal;
    ScalarField f(grid);
    // Half plane k2 > 0, or k2 == 0 and k1 >= 0; set_mode fills the partner.
    for (int k2 = 0; k2 <= km; ++k2)
        for (int k1 = -km; k1 <= km; ++k1) {
            if (k2 == 0 && k1 < 0) continue;
            const double scale = std::pow(1.0 + k1 * k1 + k2 * k2, -0.5 * decay);
            const double re = normal(rng), im = normal(rng);
            f.set_mode(k1, k2, scale * cplx(re, (k1 == 0 && k2 == 0) ? 0.0 : im));
        }
    const double n = l2(f);
    if (n > 0.0) f *= 1.0 / n;
    return f;
}

VectorField random_vector(const TorusGrid& grid, std::uint64_t seed, int max_k, double decay) {
    VectorField v(random_scalar(grid, mix64(seed ^ 0x1), max_k, decay), random_scalar(grid, mix64(seed ^ 0x2), max_k, decay));
    v *= 1.0 / l2(v);
    return v;
}

DivergenceFreeField random_divergence_free(const TorusGrid& grid, std::uint64_t seed, int max_k, double decay) {
    DivergenceFreeField u = leray_project(random_vector(grid, seed, max_k, decay));
    u *= 1.0 / l2(u.field());
    return u;
}

}  // namespace nematic

#pragma once

#include <optional>
#include <vector>

#include "nematic/spectral.hpp"

namespace nematic {

/// f(theta) = f~(|theta|^2) theta with f~(r) = sum_j b_j r^j.
class PolynomialNonlinearity {
public:
    /// Requires every coefficient strictly positive. Throws std::invalid_argument otherwise.
    explicit PolynomialNonlinearity(std::vector<double> coefficients);

    /// f~(r) = 1 + r.
    static PolynomialNonlinearity standard() { return PolynomialNonlinearity({1.0, 1.0}); }
    /// f == 0. Test configuration only; bypasses the positivity requirement.
    static PolynomialNonlinearity disabled();

    const std::vector<double>& coefficients() const { return b_; }
    int degree() const { return static_cast<int>(b_.size()) - 1; }
    /// Integrability exponent q = 4N + 2.
    int q() const { return 4 * degree() + 2; }
    bool is_disabled() const;

    double f_tilde(double r) const;
    /// Antiderivative Phi(r) = sum_j b_j r^{j+1} / (j+1).
    double potential(double r) const;

private:
    PolynomialNonlinearity() = default;
    std::vector<double> b_;
};

struct EnergyReport {
    double kinetic = 0.0;      // |u|^2 / 2
    double elastic = 0.0;      // ||theta||^2 / 2
    double potential = 0.0;    // (1/2) int Phi(|theta|^2)
    double psi_total = 0.0;    // elastic + potential
    double dissipation = 0.0;  // ||u||^2 + |Laplacian theta - f(theta)|^2
};

struct CoercivityReport {
    double lhs = 0.0;       // <f(theta), theta>
    double rhs_main = 0.0;  // |theta|_{L^{2N+2}}^{2N+2}
    double l2_squared = 0.0;
    /// Constant used in lhs >= rhs_main - C |theta|^2. Zero whenever b_N >= 1;
    /// otherwise the smallest value that makes this field satisfy it.
    double constant = 0.0;
    bool structural = true;  // constant does not depend on theta
    double margin() const { return lhs - rhs_main + constant * l2_squared; }
};

// Linear operators.
DivergenceFreeField stokes_A1(const DivergenceFreeField& u);
VectorField neumann_A2(const VectorField& theta);

// Nonlinear operators. All products are dealiased on the grid's padded size.
/// (u . grad) v, truncated to the retained band (no projection).
VectorField advection(const VectorField& u, const VectorField& v);
double trilinear_b(const VectorField& u, const VectorField& v, const VectorField& w);
DivergenceFreeField convection_B(const DivergenceFreeField& u, const VectorField& v);
VectorField advection_Btilde(const DivergenceFreeField& u, const VectorField& theta);
double trilinear_m(const VectorField& theta1, const VectorField& theta2, const VectorField& u);
DivergenceFreeField director_stress_M(const VectorField& theta1, const VectorField& theta2);

/// f(theta) evaluated on a physical grid of size `grid_size` (default: padded size)
/// and truncated to the retained band.
VectorField polynomial_f(const VectorField& theta, const PolynomialNonlinearity& nl,
                         std::optional<int> grid_size = std::nullopt);

CoercivityReport coercivity_check(const VectorField& theta, const PolynomialNonlinearity& nl);

/// (1/2) int Phi(|theta|^2) dx by exact quadrature.
double potential_energy(const VectorField& theta, const PolynomialNonlinearity& nl);

/// Energy components for (u, theta). `f_grid` selects the grid used for f in
/// the dissipation term (default: padded size).
EnergyReport energy_psi(const DivergenceFreeField& u, const VectorField& theta,
                        const PolynomialNonlinearity& nl, std::optional<int> f_grid = std::nullopt);

}  // namespace nematic

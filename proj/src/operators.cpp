#include "nematic/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nematic/kernels.hpp"
#include "operators_internal.hpp"

namespace nematic {

namespace {

const simd::KernelTable& K() { return simd::active_kernels(); }

using Buffer = std::vector<double>;

Buffer grid_of(const ScalarField& f, int m) { return to_grid(f, m); }

// grads[i][k] = d_i theta^k on an m-grid.
std::array<std::array<Buffer, 2>, 2> gradients_on_grid(const VectorField& theta, int m) {
    std::array<std::array<Buffer, 2>, 2> g;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) g[i][k] = grid_of(derivative(theta[k], i), m);
    return g;
}

// S_ij = sum_k d_i theta1^k d_j theta2^k, dealiased and truncated.
std::array<std::array<ScalarField, 2>, 2> stress_tensor(const VectorField& theta1,
                                                        const VectorField& theta2) {
    const TorusGrid& grid = theta1.grid();
    const int m = grid.padded_size();
    const std::size_t total = static_cast<std::size_t>(m) * m;
    const auto g1 = gradients_on_grid(theta1, m);
    const auto g2 = (&theta1 == &theta2) ? g1 : gradients_on_grid(theta2, m);
    Buffer prod(total);
    std::array<std::array<ScalarField, 2>, 2> s{{{ScalarField(grid), ScalarField(grid)},
                                                 {ScalarField(grid), ScalarField(grid)}}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            K().dot2(prod.data(), g1[i][0].data(), g2[j][0].data(), g1[i][1].data(), g2[j][1].data(), total);
            s[i][j] = from_grid(grid, prod, m);
        }
    return s;
}

VectorField stress_divergence(const std::array<std::array<ScalarField, 2>, 2>& s) {
    ScalarField a = derivative(s[0][0], 0);
    a += derivative(s[0][1], 1);
    ScalarField b = derivative(s[1][0], 0);
    b += derivative(s[1][1], 1);
    return VectorField(std::move(a), std::move(b));
}

}  // namespace

// ---- PolynomialNonlinearity -------------------------------------------------

PolynomialNonlinearity::PolynomialNonlinearity(std::vector<double> coefficients) : b_(std::move(coefficients)) {
    if (b_.empty()) throw std::invalid_argument("nonlinearity needs at least one coefficient");
    for (double b : b_)
        if (!(b > 0.0) || !std::isfinite(b))
            throw std::invalid_argument("nonlinearity coefficients b_j must be strictly positive");
}

PolynomialNonlinearity PolynomialNonlinearity::disabled() {
    PolynomialNonlinearity nl;
    nl.b_ = {0.0};
    return nl;
}

bool PolynomialNonlinearity::is_disabled() const {
    return std::all_of(b_.begin(), b_.end(), [](double b) { return b == 0.0; });
}

double PolynomialNonlinearity::f_tilde(double r) const {
    double s = 0.0;
    for (std::size_t j = b_.size(); j-- > 0;) s = s * r + b_[j];
    return s;
}

double PolynomialNonlinearity::potential(double r) const {
    double s = 0.0;
    for (std::size_t j = b_.size(); j-- > 0;) s = s * r + b_[j] / static_cast<double>(j + 1);
    return s * r;
}

// ---- linear operators ---------------------------------------------------------------

DivergenceFreeField stokes_A1(const DivergenceFreeField& u) {
    VectorField out = u.field();
    const auto ksq = u.grid().k_squared();
    for (int c = 0; c < 2; ++c) K().scale_real(out[c].coefficients().data(), ksq.data(), ksq.size());
    return DivergenceFreeField::unchecked(std::move(out));
}

VectorField neumann_A2(const VectorField& theta) {
    VectorField out = laplacian(theta);
    out *= -1.0;
    return out;
}

// ---- nonlinear operators -----------------------------------------------------------

VectorField advection(const VectorField& u, const VectorField& v) {
    const TorusGrid& grid = u.grid();
    const int m = grid.padded_size();
    const std::size_t total = static_cast<std::size_t>(m) * m;
    const Buffer u1 = grid_of(u[0], m);
    const Buffer u2 = grid_of(u[1], m);
    Buffer prod(total);
    VectorField out(grid);
    for (int j = 0; j < 2; ++j) {
        const Buffer d1 = grid_of(derivative(v[j], 0), m);
        const Buffer d2 = grid_of(derivative(v[j], 1), m);
        K().dot2(prod.data(), u1.data(), d1.data(), u2.data(), d2.data(), total);
        out[j] = from_grid(grid, prod, m);
    }
    return out;
}

double trilinear_b(const VectorField& u, const VectorField& v, const VectorField& w) {
    return inner(advection(u, v), w);
}

DivergenceFreeField convection_B(const DivergenceFreeField& u, const VectorField& v) {
    return leray_project(advection(u.field(), v));
}

VectorField advection_Btilde(const DivergenceFreeField& u, const VectorField& theta) {
    return advection(u.field(), theta);
}

double trilinear_m(const VectorField& theta1, const VectorField& theta2, const VectorField& u) {
    const auto s = stress_tensor(theta1, theta2);
    double acc = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) acc += inner(s[i][j], derivative(u[i], j));
    return -acc;
}

DivergenceFreeField director_stress_M(const VectorField& theta1, const VectorField& theta2) {
    return leray_project(stress_divergence(stress_tensor(theta1, theta2)));
}

VectorField polynomial_f(const VectorField& theta, const PolynomialNonlinearity& nl, std::optional<int> grid_size) {
    const TorusGrid& grid = theta.grid();
    const int m = grid_size.value_or(grid.padded_size());
    const std::size_t total = static_cast<std::size_t>(m) * m;
    const Buffer t1 = grid_of(theta[0], m);
    const Buffer t2 = grid_of(theta[1], m);
    Buffer o1(total), o2(total);
    const auto& b = nl.coefficients();
    K().poly_field(o1.data(), o2.data(), t1.data(), t2.data(), b.data(), b.size(), total);
    return VectorField(from_grid(grid, o1, m), from_grid(grid, o2, m));
}

CoercivityReport coercivity_check(const VectorField& theta, const PolynomialNonlinearity& nl) {
    const int n = nl.degree();
    const int m = exact_quadrature_size(theta.grid(), 2 * n + 2);
    const Buffer a = grid_of(theta[0], m);
    const Buffer b = grid_of(theta[1], m);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = a[i] * a[i] + b[i] * b[i];
        lhs += nl.f_tilde(r) * r;
        rhs += std::pow(r, n + 1);
    }
    const double w = kArea / static_cast<double>(a.size());
    CoercivityReport rep;
    rep.lhs = lhs * w;
    rep.rhs_main = rhs * w;
    rep.l2_squared = std::pow(l2(theta), 2);
    if (nl.coefficients().back() >= 1.0) {
        rep.constant = 0.0;
        rep.structural = true;
    } else {
        rep.structural = false;
        rep.constant = rep.l2_squared > 0.0 ? std::max(0.0, (rep.rhs_main - rep.lhs) / rep.l2_squared) : 0.0;
    }
    return rep;
}

double potential_energy(const VectorField& theta, const PolynomialNonlinearity& nl) {
    const int m = exact_quadrature_size(theta.grid(), 2 * nl.degree() + 2);
    const Buffer a = grid_of(theta[0], m);
    const Buffer b = grid_of(theta[1], m);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += nl.potential(a[i] * a[i] + b[i] * b[i]);
    return 0.5 * kArea * acc / static_cast<double>(a.size());
}

EnergyReport energy_psi(const DivergenceFreeField& u, const VectorField& theta, const PolynomialNonlinearity& nl,
                        std::optional<int> f_grid) {
    EnergyReport r;
    const double ul2 = l2(u.field());
    const double uh1 = h1_semi(u.field());
    r.kinetic = 0.5 * ul2 * ul2;
    r.elastic = 0.5 * std::pow(h1_semi(theta), 2);
    r.potential = potential_energy(theta, nl);
    r.psi_total = r.elastic + r.potential;
    VectorField residual = laplacian(theta);
    residual -= polynomial_f(theta, nl, f_grid);
    r.dissipation = uh1 * uh1 + std::pow(l2(residual), 2);
    return r;
}

// ---- fused evaluation ----------------------------------------------------------------

namespace detail {

NonlinearTerms evaluate_nonlinear(const DivergenceFreeField& u, const VectorField& theta,
                                  const PolynomialNonlinearity& nl, int f_grid) {
    const TorusGrid& grid = theta.grid();
    const int m = grid.padded_size();
    const std::size_t total = static_cast<std::size_t>(m) * m;

    const Buffer u1 = grid_of(u[0], m);
    const Buffer u2 = grid_of(u[1], m);
    std::array<std::array<Buffer, 2>, 2> du;  // du[i][k] = d_i u^k
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) du[i][k] = grid_of(derivative(u[k], i), m);
    const auto dtheta = gradients_on_grid(theta, m);

    Buffer prod(total);
    VectorField conv(grid), adv(grid);
    for (int k = 0; k < 2; ++k) {
        K().dot2(prod.data(), u1.data(), du[0][k].data(), u2.data(), du[1][k].data(), total);
        conv[k] = from_grid(grid, prod, m);
        K().dot2(prod.data(), u1.data(), dtheta[0][k].data(), u2.data(), dtheta[1][k].data(), total);
        adv[k] = from_grid(grid, prod, m);
    }
    std::array<std::array<ScalarField, 2>, 2> s{{{ScalarField(grid), ScalarField(grid)},
                                                 {ScalarField(grid), ScalarField(grid)}}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            K().dot2(prod.data(), dtheta[i][0].data(), dtheta[j][0].data(), dtheta[i][1].data(),
                     dtheta[j][1].data(), total);
            s[i][j] = from_grid(grid, prod, m);
        }

    NonlinearTerms t{leray_project(conv), std::move(adv), leray_project(stress_divergence(s)),
                     nl.is_disabled() ? VectorField(grid) : polynomial_f(theta, nl, f_grid)};
    return t;
}

}  // namespace detail

}  // namespace nematic

#include <doctest.h>

#include <cmath>

#include "nematic/operators.hpp"
#include "nematic/random_fields.hpp"
#include "nematic/rng.hpp"
#include "oracles.hpp"

using namespace nematic;

namespace {

std::uint64_t key(int i) { return derive_seed(77, Purpose::testing, static_cast<std::uint64_t>(i)); }

ScalarField sampled(const TorusGrid& g, double (*fn)(double, double)) { return ScalarField::sample(g, fn); }

VectorField zero_second(const ScalarField& a) { return VectorField(a, ScalarField(a.grid())); }
VectorField zero_first(const ScalarField& b) { return VectorField(ScalarField(b.grid()), b); }

}  // namespace

TEST_CASE("trilinear form on a hand-computed triple equals pi^2") {
    const TorusGrid g(16);
    const VectorField u = zero_second(sampled(g, [](double, double y) { return std::sin(y); }));
    const VectorField v = zero_first(sampled(g, [](double x, double) { return std::sin(x); }));
    const VectorField w = zero_first(sampled(g, [](double x, double y) { return std::sin(y) * std::cos(x); }));
    CHECK(trilinear_b(u, v, w) == doctest::Approx(kPi * kPi).epsilon(1e-13));
}

TEST_CASE("director advection of (sin x1, 0) by (sin x2, 0)") {
    const TorusGrid g(16);
    const DivergenceFreeField u =
        DivergenceFreeField::checked(zero_second(sampled(g, [](double, double y) { return std::sin(y); })));
    const VectorField theta = zero_second(sampled(g, [](double x, double) { return std::sin(x); }));
    const VectorField bt = advection_Btilde(u, theta);
    const VectorField ref = zero_second(sampled(g, [](double x, double y) { return std::sin(y) * std::cos(x); }));
    CHECK(l2(bt - ref) <= 1e-13);
}

TEST_CASE("trilinear forms agree with direct quadrature") {
    const TorusGrid g(8);
    const VectorField u = random_vector(g, key(1));
    const VectorField v = random_vector(g, key(2));
    const VectorField w = random_vector(g, key(3));
    CHECK(trilinear_b(u, v, w) == doctest::Approx(oracle::trilinear_b(u, v, w, 16)).epsilon(1e-11));
    CHECK(trilinear_m(u, v, w) == doctest::Approx(oracle::trilinear_m(u, v, w, 16)).epsilon(1e-11));
}

TEST_CASE("antisymmetry of b in its last two arguments") {
    for (int n : {16, 32}) {
        const TorusGrid g(n);
        for (int i = 0; i < 10; ++i) {
            const DivergenceFreeField u = random_divergence_free(g, key(100 + i));
            const VectorField v = random_vector(g, key(200 + i));
            const VectorField w = random_vector(g, key(300 + i));
            CHECK(std::abs(trilinear_b(u.field(), v, v)) <= 1e-10);
            const DivergenceFreeField dv = leray_project(v);
            CHECK(std::abs(inner(convection_B(u, dv.field()).field(), dv.field())) <= 1e-10);
            CHECK(trilinear_b(u.field(), v, w) ==
                  doctest::Approx(-trilinear_b(u.field(), w, v)).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("stress operator is the Riesz representative of m") {
    const TorusGrid g(16);
    for (int i = 0; i < 5; ++i) {
        const VectorField t = random_vector(g, key(400 + i), 4);
        const DivergenceFreeField u = random_divergence_free(g, key(500 + i));
        const DivergenceFreeField m = director_stress_M(t, t);
        CHECK(divergence_residual(m.field()) <= 1e-12);
        CHECK(inner(m.field(), u.field()) == doctest::Approx(trilinear_m(t, t, u.field())).epsilon(1e-12));
    }
}

TEST_CASE("advection and stress cancel against the chemical potential") {
    const TorusGrid g(32);
    const auto nl = PolynomialNonlinearity::standard();
    const int fm = exact_quadrature_size(g, 2 * nl.degree() + 2);
    for (int i = 0; i < 10; ++i) {
        const DivergenceFreeField u = random_divergence_free(g, key(600 + i));
        const VectorField t = random_vector(g, key(700 + i), 5);
        VectorField h = polynomial_f(t, nl, fm);
        h -= laplacian(t);
        const double a = inner(advection_Btilde(u, t), h);
        const double b = inner(director_stress_M(t, t).field(), u.field());
        CHECK(std::abs(a + b) <= 1e-8 * (std::abs(a) + std::abs(b)));
    }
}

TEST_CASE("polynomial nonlinearity values") {
    const auto nl = PolynomialNonlinearity::standard();
    CHECK(nl.f_tilde(1.0) == 2.0);
    CHECK(nl.q() == 6);
    CHECK(nl.potential(1.0) == doctest::Approx(1.5));
    const TorusGrid g(8);
    const VectorField f10 = polynomial_f(VectorField::constant(g, 1, 0), nl);
    CHECK(f10[0].coefficient(0, 0).real() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(f10[1].coefficient(0, 0)) <= 1e-15);
    const VectorField f11 = polynomial_f(VectorField::constant(g, 1, 1), nl);
    CHECK(f11[0].coefficient(0, 0).real() == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(f11[1].coefficient(0, 0).real() == doctest::Approx(3.0).epsilon(1e-14));
    CHECK_THROWS_AS(PolynomialNonlinearity({1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(PolynomialNonlinearity(std::vector<double>{}), std::invalid_argument);
    CHECK(PolynomialNonlinearity::disabled().is_disabled());
}

TEST_CASE("f on the exact grid matches pointwise evaluation") {
    const TorusGrid g(8);
    const auto nl = PolynomialNonlinearity::standard();
    const VectorField t = random_vector(g, key(800), 1);
    const VectorField f = polynomial_f(t, nl, exact_quadrature_size(g, 2 * nl.degree() + 2));
    const auto t1 = oracle::as_function(t[0]), t2 = oracle::as_function(t[1]);
    for (int c = 0; c < 2; ++c) {
        const auto ref = oracle::project(
            g,
            [&](double x, double y) {
                const double a = t1(x, y), b = t2(x, y);
                return (1 + a * a + b * b) * (c == 0 ? a : b);
            },
            24);
        CHECK(l2(f[c] - ref) <= 1e-13);
    }
}

TEST_CASE("energy of simple directors") {
    const TorusGrid g(16);
    const auto nl = PolynomialNonlinearity::standard();
    const DivergenceFreeField zero(g);
    CHECK(potential_energy(VectorField::constant(g, 1, 0), nl) == doctest::Approx(3 * kPi * kPi).epsilon(1e-13));
    CHECK(std::abs(potential_energy(VectorField::constant(g, 1, 0), nl) - 29.608) < 1e-3);
    const VectorField t = zero_second(sampled(g, [](double x, double) { return std::sin(x); }));
    const EnergyReport e = energy_psi(zero, t, nl);
    CHECK(e.elastic == doctest::Approx(kPi * kPi).epsilon(1e-13));
    CHECK(e.kinetic == 0.0);
    CHECK(e.psi_total == doctest::Approx(e.elastic + e.potential).epsilon(1e-15));
}

TEST_CASE("Stokes operator scales mode (2,1) by 5") {
    const TorusGrid g(16);
    ScalarField psi(g);
    psi.set_mode(2, 1, cplx(0.3, -0.2));
    const DivergenceFreeField u = DivergenceFreeField::from_stream_function(psi);
    const DivergenceFreeField a = stokes_A1(u);
    CHECK(l2((a - 5.0 * u).field()) <= 1e-14);
    const VectorField t = random_vector(g, key(900));
    CHECK(l2(neumann_A2(t) + laplacian(t)) <= 1e-14);
}

TEST_CASE("energy functional satisfies the chain rule") {
    const TorusGrid g(16);
    const auto nl = PolynomialNonlinearity::standard();
    const DivergenceFreeField zero(g);
    const int fm = exact_quadrature_size(g, 2 * nl.degree() + 2);
    for (int i = 0; i < 3; ++i) {
        const VectorField t = random_vector(g, key(1000 + i), 3);
        const VectorField eta = random_vector(g, key(1100 + i), 3);
        const double h = 1e-5;
        const double plus = energy_psi(zero, t + h * eta, nl).psi_total;
        const double minus = energy_psi(zero, t - (h * eta), nl).psi_total;
        const double fd = (plus - minus) / (2 * h);
        VectorField mu = polynomial_f(t, nl, fm);
        mu -= laplacian(t);
        const double exact = inner(mu, eta);
        CHECK(std::abs(fd - exact) <= 1e-4 * std::abs(exact));
    }
}

TEST_CASE("coercivity of f") {
    const TorusGrid g(16);
    const auto nl = PolynomialNonlinearity::standard();
    for (int i = 0; i < 5; ++i) {
        const VectorField t = random_vector(g, key(1200 + i), 3);
        const CoercivityReport c = coercivity_check(t, nl);
        CHECK(c.structural);
        CHECK(c.margin() >= 0.0);
        CHECK(c.lhs >= c.rhs_main);
    }
    const CoercivityReport weak = coercivity_check(random_vector(g, key(1300), 3), PolynomialNonlinearity({1.0, 0.5}));
    CHECK_FALSE(weak.structural);
    CHECK(weak.margin() >= -1e-12);
}

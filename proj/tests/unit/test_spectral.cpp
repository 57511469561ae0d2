#include <doctest.h>

#include <cmath>

#include "nematic/random_fields.hpp"
#include "nematic/rng.hpp"
#include "nematic/spectral.hpp"
#include "oracles.hpp"

using namespace nematic;

namespace {

std::uint64_t key(int i) { return derive_seed(2024, Purpose::testing, static_cast<std::uint64_t>(i)); }

ScalarField sampled(const TorusGrid& g, double (*fn)(double, double)) { return ScalarField::sample(g, fn); }

}  // namespace

TEST_CASE("grid geometry") {
    const TorusGrid g(16);
    CHECK(g.modes() == 16);
    CHECK(g.max_wavenumber() == 7);
    CHECK(g.padded_size() >= 24);
    CHECK(g.padded_size() % 2 == 0);
    CHECK(g.wavenumber(8) == -8);
    CHECK(g.index_of(-1) == 15);
    CHECK(g.retained()[g.flat_index(-8, 0)] == 0.0);
    CHECK(g.retained()[g.flat_index(7, -7)] == 1.0);
    CHECK(g.inv_k_squared()[g.flat_index(0, 0)] == 0.0);
    CHECK_THROWS_AS(TorusGrid(7), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(2), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(16, Rational{1, 2}), std::invalid_argument);
}

TEST_CASE("sin x1 has coefficients -+ i/2 and L2 norm sqrt(2 pi^2)") {
    const TorusGrid g(16);
    const ScalarField f = sampled(g, [](double x, double) { return std::sin(x); });
    CHECK(std::abs(f.coefficient(1, 0) - cplx(0, -0.5)) <= 1e-14);
    CHECK(std::abs(f.coefficient(-1, 0) - cplx(0, 0.5)) <= 1e-14);
    CHECK(l2(f) == doctest::Approx(std::sqrt(2.0) * kPi).epsilon(1e-13));
    CHECK(std::abs(l2(f) - 4.4429) < 1e-4);
    CHECK(h1_semi(f) == doctest::Approx(l2(f)).epsilon(1e-13));
}

TEST_CASE("transform agrees with the direct Fourier sum") {
    for (int n : {8, 16}) {
        const TorusGrid g(n);
        const ScalarField f = random_scalar(g, key(n));
        const int m = g.padded_size();
        const auto v = to_grid(f, m);
        double err = 0.0;
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i)
                err = std::max(err, std::abs(v[static_cast<std::size_t>(j) * m + i] -
                                             oracle::point_value(f, kSide * i / m, kSide * j / m)));
        CHECK(err <= 1e-13);
    }
}

TEST_CASE("forward transform agrees with direct projection") {
    const TorusGrid g(8);
    const auto fn = [](double x, double y) { return std::exp(std::sin(x)) * std::cos(2 * y) + std::sin(x + 3 * y); };
    const ScalarField a = ScalarField::sample(g, fn, 4);
    const ScalarField b = oracle::project(g, fn, 32);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(a.coefficients()[i] - b.coefficients()[i]));
    CHECK(err <= 1e-13);
}

TEST_CASE("laplacian of sin(2x1)cos(x2) is -5 times the field") {
    const TorusGrid g(16);
    const ScalarField f = sampled(g, [](double x, double y) { return std::sin(2 * x) * std::cos(y); });
    const ScalarField lf = laplacian(f);
    CHECK(l2(lf + 5.0 * f) <= 1e-12);
}

TEST_CASE("derivative matches term-by-term differentiation") {
    const TorusGrid g(8);
    const ScalarField f = random_scalar(g, key(3));
    for (int axis : {0, 1}) {
        const ScalarField d = derivative(f, axis);
        const auto ref = oracle::partial(f, axis);
        for (double x : {0.1, 1.7, 4.0})
            for (double y : {0.3, 2.2, 5.9}) CHECK(std::abs(oracle::point_value(d, x, y) - ref(x, y)) <= 1e-12);
    }
}

TEST_CASE("Leray projection annihilates gradients and keeps divergence-free fields") {
    const TorusGrid g(16);
    const VectorField grad(sampled(g, [](double x, double) { return std::sin(x); }), ScalarField(g));
    CHECK(l2(leray_project(grad).field()) <= 1e-14);
    const VectorField shear(sampled(g, [](double, double y) { return std::sin(y); }), ScalarField(g));
    CHECK(l2((leray_project(shear).field() - shear)) <= 1e-14);

    for (int i = 0; i < 10; ++i) {
        const VectorField w = random_vector(g, key(100 + i));
        const DivergenceFreeField p = leray_project(w);
        CHECK(divergence_residual(p.field()) <= 1e-13);
        CHECK(l2((leray_project(p.field()) - p).field()) <= 1e-14);
        // Orthogonal projection: the residual is orthogonal to the range.
        CHECK(std::abs(inner(w - p.field(), p.field())) <= 1e-12);
        CHECK(std::abs(p[0].coefficient(0, 0)) == 0.0);
    }
}

TEST_CASE("divergence-free construction and checking") {
    const TorusGrid g(16);
    const DivergenceFreeField u = DivergenceFreeField::from_stream_function(random_scalar(g, key(7)));
    CHECK(divergence_residual(u.field()) <= 1e-14);
    CHECK_NOTHROW(DivergenceFreeField::checked(u.field()));
    const VectorField grad(sampled(g, [](double x, double) { return std::sin(x); }), ScalarField(g));
    CHECK_THROWS_AS(DivergenceFreeField::checked(grad), std::invalid_argument);
}

TEST_CASE("dealiased product of sin x1 with itself is 1/2 - cos(2x1)/2") {
    const TorusGrid g(16);
    const ScalarField s = sampled(g, [](double x, double) { return std::sin(x); });
    const ScalarField p = dealias_product(s, s);
    const ScalarField ref = sampled(g, [](double x, double) { return 0.5 - 0.5 * std::cos(2 * x); });
    CHECK(l2(p - ref) <= 1e-13);
}

TEST_CASE("dealiased product equals the truncated exact product") {
    const TorusGrid g(8);
    const ScalarField a = random_scalar(g, key(11));
    const ScalarField b = random_scalar(g, key(12));
    const ScalarField p = dealias_product(a, b);
    const auto fa = oracle::as_function(a), fb = oracle::as_function(b);
    const ScalarField ref = oracle::project(g, [&](double x, double y) { return fa(x, y) * fb(x, y); }, 16);
    CHECK(l2(p - ref) <= 1e-12);
}

TEST_CASE("Parseval and inner products against quadrature") {
    const TorusGrid g(8);
    const ScalarField a = random_scalar(g, key(21));
    const ScalarField b = random_scalar(g, key(22));
    const auto fa = oracle::as_function(a), fb = oracle::as_function(b);
    CHECK(inner(a, b) == doctest::Approx(oracle::integrate([&](double x, double y) { return fa(x, y) * fb(x, y); }, 16))
                             .epsilon(1e-12));
    CHECK(l2(a) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(v_norm(a) == doctest::Approx(std::hypot(l2(a), h1_semi(a))).epsilon(1e-14));
}

TEST_CASE("L^q norms by exact quadrature") {
    const TorusGrid g(16);
    const ScalarField s = sampled(g, [](double x, double) { return std::sin(x); });
    // int sin^4 over the torus = 4 pi^2 * 3/8.
    CHECK(std::pow(lq(s, 4), 4) == doctest::Approx(kArea * 3.0 / 8.0).epsilon(1e-12));
    CHECK(lq(s, 2) == doctest::Approx(l2(s)).epsilon(1e-13));
    CHECK_THROWS_AS(lq(s, 3), std::invalid_argument);
    const ScalarField r = random_scalar(TorusGrid(8), key(30));
    const auto fr = oracle::as_function(r);
    const double ref = oracle::integrate([&](double x, double y) { return std::pow(fr(x, y), 6); }, 32);
    CHECK(std::pow(lq(r, 6), 6) == doctest::Approx(ref).epsilon(1e-11));
}

TEST_CASE("exact quadrature size grows with degree") {
    const TorusGrid g(16);
    CHECK(exact_quadrature_size(g, 2) >= 16);
    CHECK(exact_quadrature_size(g, 4) > exact_quadrature_size(g, 2));
    CHECK(exact_quadrature_size(g, 4) % 2 == 0);
}

TEST_CASE("resample and band truncation") {
    const TorusGrid g(16), big(32);
    const ScalarField f = random_scalar(g, key(40));
    const ScalarField up = resample(f, big);
    CHECK(l2(resample(up, g) - f) == 0.0);
    CHECK(l2(up) == doctest::Approx(l2(f)).epsilon(1e-14));
    const ScalarField t = truncate_band(f, 3);
    CHECK(l2(t) <= l2(f));
    CHECK(std::abs(t.coefficient(4, 0)) == 0.0);
    CHECK(t.coefficient(3, -3) == f.coefficient(3, -3));
}

TEST_CASE("random fields are real and normalized") {
    const TorusGrid g(16);
    const ScalarField f = random_scalar(g, key(50), 3, 1.0);
    CHECK(f.conjugate_symmetry_defect() == 0.0);
    CHECK(l2(f) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(f.coefficient(4, 0)) == 0.0);
    const DivergenceFreeField u = random_divergence_free(g, key(51));
    CHECK(l2(u.field()) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(divergence_residual(u.field()) <= 1e-14);
    CHECK(l2(random_scalar(g, key(52)) - random_scalar(g, key(52))) == 0.0);
}

TEST_CASE("dual norm is dominated by the L2 norm") {
    const TorusGrid g(16);
    for (int i = 0; i < 5; ++i) {
        const VectorField w = random_vector(g, key(60 + i));
        CHECK(dual_norm(w) <= l2(w) * (1 + 1e-14));
    }
}

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "nematic/noise.hpp"
#include "nematic/random_fields.hpp"
#include "nematic/rng.hpp"

using namespace nematic;

namespace {

std::uint64_t key(int i) { return derive_seed(5, Purpose::testing, static_cast<std::uint64_t>(i)); }

JumpCoefficientSpec spec_on(const TorusGrid& g, std::vector<double> gains) {
    JumpCoefficientSpec s;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        DivergenceFreeField f = random_divergence_free(g, key(900 + static_cast<int>(i)), 3);
        f *= 0.2 * static_cast<double>(i + 1);
        s.shapes.push_back(f);
    }
    s.gains = std::move(gains);
    return s;
}

}  // namespace

TEST_CASE("mark space validation") {
    const MarkSpace ms({1.0, 0.5});
    CHECK(ms.size() == 2);
    CHECK(ms.total_mass() == 1.5);
    CHECK(ms.labels() == std::vector<std::string>{"v1", "v2"});
    CHECK_THROWS_AS(MarkSpace({}), std::invalid_argument);
    CHECK_THROWS_AS(MarkSpace({1.0, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(MarkSpace({1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("control layout and validation") {
    Control g(1.0, 4, 2, 1.0);
    CHECK(g.is_identity());
    g.set(2, 1, 3.0);
    CHECK(g.at(2, 1) == 3.0);
    CHECK(g.cell_of(0.0) == 0);
    CHECK(g.cell_of(0.5) == 2);
    CHECK(g.cell_of(1.0) == 3);
    CHECK(g.value(0.6, 1) == 3.0);
    CHECK(g.max_over_time(1) == 3.0);
    CHECK_FALSE(g.is_identity());
    CHECK_THROWS_AS(Control(1.0, 1, 2, std::vector<double>{1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Control(1.0, 1, 2, std::vector<double>{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Control(1.0, 1, 1, std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}

TEST_CASE("entropy function values and shape") {
    CHECK(entropy_l(1.0) == 0.0);
    CHECK(entropy_l(0.0) == 1.0);
    CHECK(std::abs(entropy_l(2.0) - (2 * std::log(2.0) - 1)) <= 1e-12);
    CHECK(std::abs(entropy_l(2.0) - 0.386294) < 1e-6);
    CHECK_THROWS_AS(entropy_l(-0.1), std::domain_error);
    const int n = 1000;
    const double h = 4.0 / n;
    for (int i = 1; i < n; ++i) {
        const double r = i * h;
        CHECK(entropy_l(r) >= 0.0);
        if (std::abs(r - 1.0) > 1e-9) CHECK(entropy_l(r) > 0.0);
        CHECK(entropy_l(r - h) + entropy_l(r + h) - 2 * entropy_l(r) >= -1e-15);
    }
}

TEST_CASE("cost of piecewise-constant controls") {
    const MarkSpace one({1.0});
    CHECK(cost_LT(Control(1.0, 1, 1, 1.0), one) == 0.0);
    CHECK(std::abs(cost_LT(Control(1.0, 1, 1, 2.0), one) - (2 * std::log(2.0) - 1)) <= 1e-12);
    const Control half(1.0, 2, 1, std::vector<double>{2.0, 1.0});
    CHECK(std::abs(cost_LT(half, one) - (std::log(2.0) - 0.5)) <= 1e-12);
    CHECK(std::abs(cost_LT(half, one) - 0.193147) < 1e-6);
    const MarkSpace two({2.0, 0.5});
    const Control g(2.0, 2, 2, std::vector<double>{0.0, 1.0, 1.0, 3.0});
    CHECK(std::abs(cost_LT(g, two) - (1.0 * 2.0 + entropy_l(3.0) * 0.5)) <= 1e-12);
    CHECK(check_SM(Control(1.0, 1, 1, 1.0), one, 0.0));
    CHECK_FALSE(check_SM(Control(1.0, 1, 1, 2.0), one, 0.3));
    CHECK(check_SM(Control(1.0, 1, 1, 2.0), one, 0.4));
}

TEST_CASE("Poisson random measure statistics") {
    const MarkSpace ms({1.0});
    CHECK(sample_prm(ms, 1.0, 100.0, 42) == sample_prm(ms, 1.0, 100.0, 42));
    const int n = 10000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const JumpSample s = sample_prm(ms, 1.0, 100.0, key(i));
        sum += static_cast<double>(s.events.size());
        if (i < 50)
            for (std::size_t j = 0; j < s.events.size(); ++j) {
                CHECK(s.events[j].time > 0.0);
                CHECK(s.events[j].time <= 1.0);
                if (j) CHECK(s.events[j - 1].time <= s.events[j].time);
            }
    }
    CHECK(std::abs(sum / n - 100.0) <= 3.0 * std::sqrt(100.0 / n));
}

TEST_CASE("thinning at phi == 2 doubles the mean count") {
    const MarkSpace ms({1.0});
    const Control phi(1.0, 1, 1, 2.0);
    const int n = 10000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(thin_to_control(ms, phi, 50.0, key(20000 + i)).events.size());
    CHECK(std::abs(sum / n - 100.0) <= 3.0 * std::sqrt(100.0 / n));
    CHECK(thin_to_control(ms, Control(1.0, 3, 1, 0.0), 50.0, 1).events.empty());
    CHECK(thin_to_control(ms, phi, 50.0, 9) == thin_to_control(ms, phi, 50.0, 9));
}

TEST_CASE("jump coefficient evaluation and sums") {
    const TorusGrid g(16);
    const MarkSpace ms({2.0, 0.5});
    const JumpCoefficientSpec spec = spec_on(g, {0.0, 0.3});
    const DivergenceFreeField u = random_divergence_free(g, key(1));
    const DivergenceFreeField zero(g);

    CHECK(l2((eval_G(0.0, u, 0, spec) - spec.shapes[0]).field()) == 0.0);
    CHECK(l2((eval_G(0.0, zero, 1, spec) - spec.shapes[1]).field()) == 0.0);
    const DivergenceFreeField v = random_divergence_free(g, key(2));
    CHECK(l2((eval_G(0.0, u, 1, spec) - eval_G(0.0, v, 1, spec)).field()) ==
          doctest::Approx(0.3 * l2((u - v).field())).epsilon(1e-13));
    CHECK_THROWS(eval_G(0.0, u, 2, spec));

    DivergenceFreeField manual = 2.0 * eval_G(0.0, u, 0, spec);
    manual.axpy(0.5, eval_G(0.0, u, 1, spec));
    CHECK(l2((compensator_integral(0.0, u, ms, spec) - manual).field()) <= 1e-15);

    CHECK(l2(control_drift(0.0, u, Control(1.0, 1, 2, 1.0), ms, spec).field()) == 0.0);
    const Control g02(1.0, 1, 2, std::vector<double>{0.0, 2.0});
    DivergenceFreeField expect = -2.0 * eval_G(0.0, u, 0, spec);
    expect.axpy(0.5, eval_G(0.0, u, 1, spec));
    CHECK(l2((control_drift(0.0, u, g02, ms, spec) - expect).field()) <= 1e-15);
}

TEST_CASE("linear growth constants bound the coefficient integrals") {
    const TorusGrid g(16);
    const MarkSpace ms({1.0, 0.5, 0.5, 0.25});
    const JumpCoefficientSpec spec = spec_on(g, {0.2, -0.1, 0.1, 0.0});
    for (double p : {1.0, 2.0, 4.0}) {
        const double cp = spec.growth_constant(ms, p);
        for (int i = 0; i < 20; ++i) {
            DivergenceFreeField u = random_divergence_free(g, key(100 + i));
            u *= std::pow(10.0, i / 4.0 - 2.0);
            double lhs = 0.0;
            for (int v = 0; v < ms.size(); ++v) lhs += ms.weight(v) * std::pow(l2(eval_G(0.0, u, v, spec).field()), p);
            CHECK(lhs <= cp * (1.0 + std::pow(l2(u.field()), p)) * (1 + 1e-12));
        }
    }
    const DivergenceFreeField a = random_divergence_free(g, key(300));
    const DivergenceFreeField b = random_divergence_free(g, key(301));
    double lip = 0.0;
    for (int v = 0; v < ms.size(); ++v)
        lip += ms.weight(v) * std::pow(l2((eval_G(0, a, v, spec) - eval_G(0, b, v, spec)).field()), 2);
    CHECK(lip <= spec.lipschitz_constant(ms) * std::pow(l2((a - b).field()), 2) * (1 + 1e-12));
}

TEST_CASE("change-of-measure density closed forms") {
    const MarkSpace one({1.0});
    const JumpSample empty{{}, 1.0, 2.0};
    for (double c : {0.5, 1.5, 3.0}) {
        const double eps = 0.5;
        CHECK(girsanov_log_density(Control(1.0, 1, 1, c), empty, eps, one) ==
              doctest::Approx((1 - 1 / c) / eps).epsilon(1e-14));
    }
    const JumpSample some = sample_prm(one, 1.0, 10.0, 3);
    CHECK(girsanov_log_density(Control(1.0, 2, 1, 1.0), some, 0.1, one) == 0.0);
    CHECK(tilted_log_likelihood_ratio(Control(1.0, 2, 1, 1.0), some, 0.1, one) == 0.0);
    REQUIRE_FALSE(some.events.empty());
    CHECK_THROWS_AS(girsanov_log_density(Control(1.0, 1, 1, 0.0), some, 0.1, one), std::domain_error);
}

TEST_CASE("density is mean one under its reference law") {
    const MarkSpace ms({1.0, 0.5});
    const double eps = 0.5;
    const Control phi(1.0, 1, 2, 1.5);
    const int n = 10000;
    double w = 0.0, w2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = std::exp(girsanov_log_density(phi, sample_prm(ms, 1.0, 1 / eps, key(40000 + i)), eps, ms));
        w += x;
        w2 += x * x;
    }
    const double mean = w / n;
    CHECK(std::abs(mean - 1.0) <= 3.0 * std::sqrt((w2 / n - mean * mean) / n));
}

TEST_CASE("likelihood ratio is mean one under the tilted law") {
    const MarkSpace ms({1.0, 0.5});
    const double eps = 0.5;
    const Control phi(1.0, 2, 2, std::vector<double>{1.5, 0.7, 0.8, 2.0});
    const int n = 10000;
    double w = 0.0, w2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const JumpSample s = thin_to_control(ms, phi, 1 / eps, key(60000 + i));
        const double x = std::exp(tilted_log_likelihood_ratio(phi, s, eps, ms));
        w += x;
        w2 += x * x;
    }
    const double mean = w / n;
    CHECK(std::abs(mean - 1.0) <= 3.0 * std::sqrt((w2 / n - mean * mean) / n));
}

TEST_CASE("jump sample and control text round trips") {
    const MarkSpace ms({1.0, 0.5});
    const JumpSample s = sample_prm(ms, 2.0, 5.0, 11);
    std::stringstream js;
    write_jump_sample(js, s);
    CHECK(read_jump_sample(js, 2.0, 5.0) == s);

    const Control g(2.0, 3, 2, std::vector<double>{0.1, 1.0, 2.5, 0.3333333333333333, 7.0, 1e-9});
    std::stringstream cs;
    write_control_csv(cs, g);
    CHECK(read_control_csv(cs, 2.0) == g);
}

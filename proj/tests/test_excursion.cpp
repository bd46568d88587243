#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "parex/excursion.hpp"

#include <cmath>
#include <numbers>

using namespace parex;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(ExcursionSpec(0.5, 1.0), DomainError);
    CHECK_THROWS_AS(ExcursionSpec(0.5, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(ExcursionSpec(-0.5, 1.0, 0.3), DomainError);
    CHECK_THROWS_AS(ExcursionSpec(0.0, 0.0), DomainError);
    CHECK(ExcursionSpec(0.5, 1.0, 0.3).kind() == Case::II);
    CHECK(ExcursionSpec(-0.5, 1.0).delta() == 1.0);
}

TEST_CASE("no mass before the threshold") {
    const ExcursionSpec c1(-0.5, 1.0), c2(0.5, 1.0, 0.3);
    for (double y : {-1.0, 0.0, 2.0}) {
        CHECK(density(c1, 0.9, y) == 0.0);
        CHECK(density(c1, 1.0, y) == 0.0);
        CHECK(density(c2, 0.2, y) == 0.0);
    }
    CHECK(achievement_cdf(c1, 1.0) == 0.0);
    CHECK(achievement_cdf(c2, 0.3) == 0.0);
}

TEST_CASE("Case I: layer sum against transform inversion") {
    for (const auto& spec : {ExcursionSpec(0.0, 1.0), ExcursionSpec(-0.2, 0.5)})
        for (double u : {1.3, 2.7})
            for (double y : {-1.5, 0.0, 1.0}) {
                const double a = density_case1(spec, u * spec.D(), y);
                CHECK(rel(density_case1_inversion(spec, u * spec.D(), y), a) < 1e-4);
            }
}

TEST_CASE("Brownian scaling: h_{sqrt(c) b, cD}(cu, sqrt(c) y) = h_{b,D}(u, y) / sqrt(c)") {
    const double c = 2.0, s = std::sqrt(c);
    const ExcursionSpec a(-0.4, 1.0), b(-0.4 * s, c);
    for (double u : {1.5, 3.2})
        for (double y : {-1.0, 0.5}) CHECK(rel(density(b, c * u, s * y), density(a, u, y) / s) < 1e-7);
}

TEST_CASE("achievement CDF") {
    const ExcursionSpec spec(0.0, 1.0);
    // Only the first layer contributes on (D, 2D]; the integral is 1/pi.
    CHECK(std::abs(achievement_cdf(spec, 2.0) - 1.0 / std::numbers::pi) < 1e-7);
    // Regression values, reproduced by both routes below.
    CHECK(std::abs(achievement_cdf(spec, 3.0) - 0.43650482) < 1e-7);
    CHECK(std::abs(achievement_cdf(spec, 5.0) - 0.55918471) < 1e-7);

    const ExcursionSpec s2(-0.3, 1.0);
    CHECK(std::abs(achievement_cdf(s2, 5.0) - achievement_cdf_inversion(s2, 5.0)) < 1e-4);
    double prev = 0.0;
    for (double u : {1.2, 1.8, 2.5, 4.0}) {
        const double F = achievement_cdf(s2, u);
        CHECK(F >= prev);
        CHECK(F <= 1.0);
        prev = F;
    }
}

TEST_CASE("Case II: layer terms against inversion") {
    const ExcursionSpec spec(1.0, 1.0, 0.3);
    for (double u : {1.5, 2.4})
        for (double y : {-0.5, 1.5}) {
            CHECK(rel(h_b21_inversion(spec, u, y), h_b21(spec, u, y)) < 1e-4);
            CHECK(rel(h_b22_inversion(spec, u, y), h_b22(spec, u, y)) < 1e-4);
        }
    const auto parts = case2_parts(spec, 2.4, 0.2);
    CHECK(parts.total() == doctest::Approx(density(spec, 2.4, 0.2)).epsilon(1e-14));
}

TEST_CASE("closed-form terms") {
    // mpmath quadrature of the defining integral at 30 digits
    const ExcursionSpec spec(1.0, 1.0, 0.3);
    CHECK(rel(closed_form_terms(spec, 2.0, 0.0).h11, 0.0171400714621588390691) < 1e-10);
    CHECK(closed_form_terms(spec, 2.0, 1.0).h12 == doctest::Approx(0.0).scale(1e-300));
    CHECK(closed_form_terms(spec, 0.25, 0.0).h11 == 0.0);
}

TEST_CASE("closed-form variants differ only in the killed-density argument") {
    const ExcursionSpec spec(0.5, 1.0, 0.5);
    const auto p = closed_form_terms(spec, 1.2, 0.1, H12Variant::printed);
    const auto s = closed_form_terms(spec, 1.2, 0.1, H12Variant::shifted);
    CHECK(p.h11 == s.h11);
    CHECK(p.h12 != s.h12);
    const double qgt = 1.0 - hit_probability(0.5, 0.5);
    CHECK(p.h12 == doctest::Approx(qgt * killed_density(0.5, 1.2, 0.1)).epsilon(1e-14));
    CHECK(s.h12 == doctest::Approx(qgt * killed_density(0.5, 0.7, 0.1)).epsilon(1e-14));
}

TEST_CASE("denormalize shifts level, time and space") {
    const auto f = denormalize(0.7, 2.0, 1.0, 1.0);
    const ExcursionSpec spec(-0.3, 1.0);
    CHECK(f(4.5, 0.6) == doctest::Approx(density(spec, 2.5, -0.4)).epsilon(1e-12));
    CHECK(f(2.5, 0.0) == 0.0);
}

TEST_CASE("density grid is independent of the thread count") {
    const ExcursionSpec spec(-0.2, 0.5);
    const std::vector<double> us{0.8, 1.7}, ys{-1.0, 0.0, 1.0};
    const auto a = density_grid(spec, us, ys, Method::analytic, {}, 1);
    const auto b = density_grid(spec, us, ys, Method::analytic, {}, 3);
    CHECK(a.values == b.values);
    CHECK(method_from_string(to_string(Method::inversion)) == Method::inversion);
    CHECK_THROWS_AS(method_from_string("spline"), DomainError);
}

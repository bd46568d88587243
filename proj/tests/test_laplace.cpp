#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "parex/excursion.hpp"
#include "parex/laplace.hpp"

#include <cmath>
#include <numbers>

using namespace parex;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TransformSpec make(Target t, double b, double D, std::optional<double> y = {}, std::optional<double> delta = {}) {
    TransformSpec s;
    s.target = t;
    s.b = b;
    s.D = D;
    s.y = y;
    s.delta = delta;
    return s;
}

}  // namespace

TEST_CASE("forward transform of elementary functions") {
    CHECK(rel(forward_lt([](double u) { return std::exp(-u); }, CutPlanePoint(2.0)), cplx(1.0 / 3.0)) < 1e-12);
    const CutPlanePoint z(cplx(1.0, 3.0));
    CHECK(rel(forward_lt([](double u) { return u; }, z), 1.0 / (z.value() * z.value())) < 1e-10);
    ForwardOptions opt;
    opt.sing0 = Sing::inv_sqrt;
    CHECK(rel(forward_lt([](double u) { return 1.0 / std::sqrt(kPi * u); }, CutPlanePoint(3.0), opt),
              cplx(1.0 / std::sqrt(3.0))) < 1e-10);
}

TEST_CASE("Talbot and de Hoog invert rational and branch-cut transforms") {
    const Transform F = [](const CutPlanePoint& z) { return 1.0 / (z.value() + 1.0); };
    const Transform G = [](const CutPlanePoint& z) { return std::exp(-z.sqrt()) / z.sqrt(); };  // chi_1
    for (double t : {0.2, 1.0, 4.0}) {
        CHECK(std::abs(talbot_invert(F, t) - std::exp(-t)) < 1e-10);
        CHECK(std::abs(dehoog_invert(F, t) - std::exp(-t)) < 1e-9);
        const double chi = std::exp(-1.0 / (4.0 * t)) / std::sqrt(kPi * t);
        CHECK(std::abs(talbot_invert(G, t) - chi) < 1e-10);
        CHECK(std::abs(dehoog_invert(G, t) - chi) < 1e-9);
    }
    const auto r = talbot_invert_checked(F, 1.0);
    CHECK(r.converged);
    CHECK(r.change < 1e-8);
    const DeHoogInverter inv(F, 5.0);
    CHECK(std::abs(inv(2.5) - std::exp(-2.5)) < 1e-9);
    CHECK_THROWS(inv(20.0));
}

TEST_CASE("H0 transform is 1/Psi(sqrt(2Dz)) and the shifted form carries e^{Dz}") {
    const auto s = make(Target::H0, 0.0, 1.5);
    for (cplx zv : {cplx(0.7), cplx(2.0, 1.0)}) {
        const CutPlanePoint z(zv);
        const cplx expect = 1.0 / psi(std::sqrt(2.0 * 1.5 * zv));
        CHECK(rel(assemble_transform(s, z), expect) < 1e-12);
        CHECK(rel(assemble_transform_shifted(s, z), std::exp(1.5 * zv) * expect) < 1e-12);
    }
}

TEST_CASE("recip_psi_scaled") {
    for (cplx v : {cplx(0.5), cplx(3.0, 1.0), cplx(20.0, -5.0)}) {
        const cplx direct = std::exp(0.5 * v * v) / psi(v);
        CHECK(rel(recip_psi_scaled(v), direct) < 1e-11);
    }
    CHECK_THROWS_AS(recip_psi_scaled(cplx(1.0, 2.0)), DomainError);
}

TEST_CASE("Case I transform equals the forward transform of the density") {
    // Two independent routes: layer sum in the time domain, quotient in the
    // transform domain. Panels end at the layer onsets u = nD; the tail past
    // u = 13 is below 1e-16 at these z.
    const ExcursionSpec spec(-0.5, 1.0);
    const auto ts = make(Target::case1, -0.5, 1.0, 0.3);
    for (cplx zv : {cplx(3.0), cplx(2.0, 2.0)}) {
        cplx fwd = 0.0;
        for (int k = 1; k < 13; ++k)
            fwd += integrate([&](double u) { return std::exp(-zv * u) * density_case1(spec, u, 0.3); }, double(k),
                             k + 1.0, QuadTol{1e-17, 1e-9, 14});
        CHECK(rel(fwd, assemble_transform(ts, CutPlanePoint(zv))) < 1e-7);
    }
}

TEST_CASE("CDF transform inverts to 1/pi at u = 2D for b = 0, D = 1") {
    // On (D, 2D] only the first layer contributes and the integral is
    // elementary: P(H <= 2) = 1/pi.
    const auto ts = make(Target::cdf_case1, 0.0, 1.0);
    const double F = dehoog_invert([&](const CutPlanePoint& z) { return assemble_transform_shifted(ts, z); }, 1.0);
    CHECK(std::abs(F - 1.0 / kPi) < 1e-7);
    CHECK(std::abs(achievement_cdf(ExcursionSpec(0.0, 1.0), 2.0) - 1.0 / kPi) < 1e-7);
}

TEST_CASE("geometric series and growth slope") {
    const CutPlanePoint z(cplx(2.0, 1.0));
    const cplx R(0.7, -0.2);
    CHECK(std::abs(series_ratio(z)) < 1.0);
    CHECK(rel(geometric_partial(R, z, 60), R / psi(z.sqrt())) < 1e-13);
    const double slope = growth_slope([](const CutPlanePoint& s) { return std::pow(s.value(), -1.5); }, 1e2, 1e6);
    CHECK(std::abs(slope + 1.5) < 1e-12);
}

TEST_CASE("transform spec validation") {
    CHECK_THROWS_AS(make(Target::case1, -0.5, 1.0).validate(), DomainError);
    CHECK_THROWS_AS(make(Target::case1, 0.5, 1.0, 0.0).validate(), DomainError);
    CHECK_THROWS_AS(make(Target::case2_k2, 0.5, 1.0, 0.5, 1.5).validate(), DomainError);
    CHECK_NOTHROW(make(Target::case2_k1, 0.5, 1.0, 0.0, 0.4).validate());
}

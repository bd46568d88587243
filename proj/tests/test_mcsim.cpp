#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "parex/csvio.hpp"
#include "parex/mcsim.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace parex;

namespace {

// Independent scanner: the first grid time e*dt such that the window of
// `need` steps ending there is all below, or (Case II) the whole path up to
// e*dt is below and e*dt = delta.
std::optional<double> brute_force_H(const std::vector<double>& x, const std::vector<bool>& ok, double dt,
                                    const ExcursionSpec& spec) {
    const long need = std::lround(spec.D() / dt);
    const long first = spec.kind() == Case::II ? std::lround(spec.delta() / dt) : need;
    auto below = [&](long k) { return x[k] < spec.b() && x[k + 1] < spec.b() && ok[k]; };
    auto all_below = [&](long from, long to) {
        for (long k = from; k < to; ++k)
            if (!below(k)) return false;
        return true;
    };
    const long steps = long(x.size()) - 1;
    for (long e = 1; e <= steps; ++e) {
        if (e >= need && all_below(e - need, e)) return double(e) * dt;
        if (e == first && all_below(0, e)) return double(e) * dt;
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("clock on hand-made paths") {
    const double dt = 0.01;
    SUBCASE("constant path below the level, Case II") {
        const ExcursionSpec spec(1.0, 1.0, 0.3);
        const std::vector<double> x(200, 0.0);
        const auto H = achievement_time_of_path(x, dt, spec);
        REQUIRE(H);
        CHECK(*H == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("above until s = 1, then below: H = 1 + D") {
        const ExcursionSpec spec(0.0, 1.0);
        std::vector<double> x(301);
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = k <= 100 ? 1.0 : -1.0;
        const auto H = achievement_time_of_path(x, dt, spec);
        REQUIRE(H);
        // the step from 1.00 to 1.01 straddles the level
        CHECK(*H == doctest::Approx(2.01).epsilon(1e-12));
        x[100] = -1.0;
        CHECK(*achievement_time_of_path(x, dt, spec) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("zig-zag crossing every D/2 never achieves") {
        const ExcursionSpec spec(0.0, 1.0);
        std::vector<double> x(1001);
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = (k / 50) % 2 ? 1.0 : -1.0;
        CHECK_FALSE(achievement_time_of_path(x, dt, spec));
    }
    SUBCASE("touching the level resets the run") {
        const ExcursionSpec spec(0.0, 0.1);
        std::vector<double> x(40, -1.0);
        x[5] = 0.0;
        CHECK(*achievement_time_of_path(x, dt, spec) == doctest::Approx(0.16).epsilon(1e-12));
    }
}

TEST_CASE("clock agrees exactly with a brute-force window scanner on random paths") {
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U;
    const double dt = 0.01;
    const std::vector<ExcursionSpec> specs{ExcursionSpec(0.0, 0.1), ExcursionSpec(-0.1, 0.2),
                                           ExcursionSpec(0.15, 0.1, 0.04), ExcursionSpec(0.05, 0.3, 0.25)};
    int achieved = 0;
    for (int p = 0; p < 1000; ++p) {
        const auto& spec = specs[p % specs.size()];
        std::vector<double> x(301, 0.0);
        std::vector<bool> ok(300);
        for (std::size_t k = 1; k < x.size(); ++k) x[k] = x[k - 1] + 0.1 * N(gen);
        for (std::size_t k = 0; k < ok.size(); ++k) ok[k] = U(gen) > 0.02;
        const auto a = achievement_time_of_path(x, ok, dt, spec);
        const auto b = brute_force_H(x, ok, dt, spec);
        CHECK(a.has_value() == b.has_value());
        if (a && b) CHECK(*a == *b);
        achieved += a.has_value();
    }
    CHECK(achieved > 100);
    CHECK(achieved < 950);
}

TEST_CASE("config validation and budget") {
    McConfig cfg;
    cfg.dt = 0.02;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.dt = 1e-3;
    cfg.probes = {6.0};
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.probes = {};
    cfg.budget = 1e6;
    CHECK_THROWS_AS(run_mc(cfg), ResourceLimitError);
}

TEST_CASE("runs are identical across thread counts") {
    McConfig cfg;
    cfg.spec = ExcursionSpec(0.5, 1.0, 0.4);
    cfg.paths = 4000;
    cfg.T = 3.0;
    cfg.probes = {1.5, 3.0};
    for (bool bridge : {true, false}) {
        cfg.bridge = bridge;
        cfg.engine = bridge ? McEngine::adaptive : McEngine::uniform;
        cfg.threads = 1;
        const McRun a = run_mc(cfg);
        cfg.threads = 3;
        const McRun b = run_mc(cfg);
        CHECK(a.H == b.H);
        CHECK(a.WH == b.WH);
        std::ostringstream sa, sb;
        write_mc_csv(sa, a.hist);
        write_mc_csv(sb, b.hist);
        CHECK(sa.str() == sb.str());
        CHECK(simulate_path(cfg, 17).H == simulate_path(cfg, 17).H);
    }
}

TEST_CASE("no mass before the threshold, with zero variance") {
    McConfig cfg;
    cfg.spec = ExcursionSpec(-0.2, 1.0);
    cfg.paths = 2000;
    cfg.T = 3.0;
    const McRun run = run_mc(cfg);
    const Histogram* cdf = run.find("cdf");
    REQUIRE(cdf);
    for (std::size_t i = 0; i < cdf->hi.size(); ++i)
        if (cdf->hi[i] <= 1.0) {
            CHECK(cdf->estimate[i] == 0.0);
            CHECK(cdf->stderr_[i] == 0.0);
        }
    for (double h : run.H) CHECK(h >= 1.0 - 1e-12);
}

TEST_CASE("MC CSV round-trips through the reader") {
    McConfig cfg;
    cfg.paths = 500;
    cfg.T = 2.0;
    cfg.probes = {1.5, 2.0};
    const McRun run = run_mc(cfg);
    std::ostringstream os;
    write_mc_csv(os, run.hist);
    std::istringstream is(os.str());
    const auto back = read_mc_csv(is);
    REQUIRE(back.size() == run.hist.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].kind == run.hist[i].kind);
        CHECK(back[i].u == run.hist[i].u);
        CHECK(back[i].estimate == run.hist[i].estimate);
        CHECK(back[i].stderr_ == run.hist[i].stderr_);
    }
}

TEST_CASE("statistics helpers") {
    std::vector<double> s;
    for (int i = 0; i < 1000; ++i) s.push_back((i + 0.5) / 1000.0);
    CHECK(ks_statistic(s, [](double x) { return x; }) == doctest::Approx(0.0005));
    CHECK(ks_critical(10000) == doctest::Approx(1.6276 / 100.0).epsilon(1e-3));
    std::vector<double> t(s.rbegin(), s.rend());
    CHECK(correlation(s, s) == doctest::Approx(1.0));
    CHECK(correlation(s, t) == doctest::Approx(-1.0));
}

TEST_CASE("compare: zero grid against an empty run passes") {
    McConfig cfg;
    cfg.spec = ExcursionSpec(0.0, 1.0);
    cfg.paths = 1000;
    cfg.T = 0.5;
    const McRun run = run_mc(cfg);
    CHECK(run.n_achieved == 0);
    DensityGrid g{cfg.spec, Method::analytic, {0.5}, {}, {}};
    for (int i = 0; i <= 80; ++i) g.ys.push_back(-4.0 + 0.1 * i);
    g.values.assign(g.ys.size(), 0.0);
    CHECK(compare(g, run).pass());
}

TEST_CASE("compare passes on the law and fails on a grid scaled by 1.1") {
    McConfig cfg;
    cfg.spec = ExcursionSpec(0.0, 1.0);
    cfg.paths = 200000;
    cfg.T = 3.0;
    cfg.probes = {3.0};
    const McRun run = run_mc(cfg);
    std::vector<double> ys;
    for (int i = 0; i <= 160; ++i) ys.push_back(-4.0 + 0.05 * i);
    DensityGrid g = density_grid(cfg.spec, {3.0}, ys, Method::analytic);
    const auto good = compare(g, run);
    CHECK(good.pass());
    for (auto& v : g.values) v *= 1.1;
    const auto bad = compare(g, run);
    CHECK_FALSE(bad.pass());
    double zmax = 0.0;
    for (const auto& c : bad.checks)
        if (c.name == "max |z|") zmax = c.value;
    CHECK(zmax > 5.0);
    MESSAGE("perturbed grid: max |z| = " << zmax);

    DensityGrid other = g;
    other.spec = ExcursionSpec(0.0, 2.0);
    CHECK_THROWS_AS(compare(other, run), DomainError);
}

TEST_CASE("meander law of |W(H)| at small sample size") {
    McConfig cfg;
    cfg.spec = ExcursionSpec(0.0, 1.0);
    cfg.paths = 40000;
    cfg.T = 10.0;
    const McRun run = run_mc(cfg);
    std::vector<double> a(run.WH.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(run.WH[i]);
    const double ks = ks_statistic(a, [](double x) { return 1.0 - std::exp(-0.5 * x * x); });
    CHECK(ks < ks_critical(a.size()));
    CHECK(std::abs(correlation(run.H, a)) < 3.0 / std::sqrt(double(a.size())));
}

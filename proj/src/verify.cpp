#include "parex/verify.hpp"

#include "parex/convolve.hpp"
#include "parex/excursion.hpp"
#include "parex/laplace.hpp"
#include "parex/quadrature.hpp"
#include "parex/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace parex {

void VerificationReport::add(std::string name, double value, double tol, std::string note) {
    checks.push_back({std::move(name), value, tol, value <= tol, std::move(note)});
}

void VerificationReport::add_flag(std::string name, bool pass, double value, double tol, std::string note) {
    checks.push_back({std::move(name), value, tol, pass, std::move(note)});
}

void VerificationReport::append(const VerificationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

bool VerificationReport::pass() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
    return std::size_t(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
}

void VerificationReport::print(std::ostream& os) const {
    for (const auto& c : checks) {
        os << (c.pass ? "PASS  " : "FAIL  ") << c.name << ": " << std::setprecision(3) << std::scientific << c.value
           << " (tol " << c.tol << ")" << std::defaultfloat;
        if (!c.note.empty()) os << "  " << c.note;
        os << '\n';
    }
    os << (pass() ? "all checks passed" : std::to_string(failures()) + " check(s) failed") << '\n';
}

namespace {

constexpr double kPi = std::numbers::pi;

double tol_or(const VerifyOptions& opt, double t) { return opt.tol ? *opt.tol : t; }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

VerificationReport verify_identities(const VerifyOptions& opt) {
    VerificationReport rep;
    const double s2pi = std::sqrt(2.0 * kPi);

    double worst = 0.0;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j) {
            const cplx w(-3.0 + 0.3 * i, -3.0 + 0.3 * j);
            const cplx lhs = psi(w) - psi(-w);
            const cplx rhs = s2pi * w * std::exp(0.5 * w * w);
            worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(psi(w))));
        }
    rep.add("key identity, 21x21 grid |Re w|,|Im w| <= 3", worst, tol_or(opt, 1e-10));

    worst = 0.0;
    for (int i = 1; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
            const double r = 0.5 * i, th = -0.25 * kPi + 0.05 * kPi * j;
            const cplx w = std::polar(r, th);
            const cplx lhs = psi(-std::sqrt(2.0) * w);
            const cplx rhs = 1.0 - std::sqrt(kPi) * w * std::exp(w * w) * erfc(w);
            worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
        }
    rep.add("partial integration identity, sector |w| <= 5", worst, tol_or(opt, 1e-10));

    worst = 0.0;
    for (int i = 0; i <= 12; ++i)
        for (int j = 0; j < 24; ++j) {
            const cplx w = std::polar(0.25 * i, 2.0 * kPi * j / 24.0);
            worst = std::max(worst, rel(psi_series(w), psi(w)));
        }
    rep.add("series vs closed form, |w| <= 3", worst, tol_or(opt, 1e-9));

    // Direct quadrature of the defining integral at a few points.
    worst = 0.0;
    for (cplx w : {cplx(0.0), cplx(1.0), cplx(-2.0), cplx(0.5, 1.5), cplx(-1.0, -2.0)}) {
        auto f = [&](double x) { return x * std::exp(-0.5 * x * x + w * x); };
        const cplx q = integrate(f, 0.0, 12.0 + std::abs(w.real()) * 2.0, QuadTol{1e-14, 1e-13, 20});
        worst = std::max(worst, rel(psi(w), q));
    }
    rep.add("psi vs quadrature of its integral", worst, tol_or(opt, 1e-10));

    double ratio = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const double r = 2.0 * std::pow(1.5, i);
            const double th = -0.45 * kPi + 0.9 * kPi * j / 9.0;
            const cplx w = std::polar(r, th);
            const double bound = 6.0 / std::pow(std::abs(w), 4);
            ratio = std::max(ratio, std::abs(psi(-w) - 1.0 / (w * w)) / bound);
        }
    rep.add("leading term |Psi(-w) - 1/w^2| / (6/|w|^4), 100 points, |arg w| <= 0.45 pi", ratio, opt.tol ? *opt.tol : 1.0);
    return rep;
}

VerificationReport verify_pairs(const VerifyOptions& opt) {
    VerificationReport rep;
    const double tol = tol_or(opt, 1e-6);
    const std::vector<double> zs{1.0, 2.0, 5.0, 10.0};

    for (double a : {0.5, 1.0, 2.0}) {
        double wp = 0, wc = 0, wf = 0;
        for (double z : zs) {
            const CutPlanePoint Z(z);
            const double e = std::exp(-a * std::sqrt(z));
            wp = std::max(wp, rel(forward_lt([&](double u) { return heat_kernel(HeatKind::psi, a, u); }, Z), e));
            wc = std::max(wc, rel(forward_lt([&](double u) { return heat_kernel(HeatKind::chi, a, u); }, Z),
                                  e / std::sqrt(z)));
            wf = std::max(wf, rel(forward_lt([&](double u) { return heat_kernel(HeatKind::phi, a, u); }, Z), e / z));
        }
        std::ostringstream n;
        n << "alpha=" << a;
        rep.add("L(psi_alpha) = exp(-alpha sqrt z), " + n.str(), wp, tol);
        rep.add("L(chi_alpha) = exp(-alpha sqrt z)/sqrt z, " + n.str(), wc, tol);
        rep.add("L(phi_alpha) = exp(-alpha sqrt z)/z, " + n.str(), wf, tol);
    }

    for (int n = 1; n <= 4; ++n) {
        const auto grid = nu_nfold(n, 50.0, 1.0 / 256.0);
        double worst = 0.0;
        for (double z : zs) {
            const CutPlanePoint Z(z);
            worst = std::max(worst, rel(forward_lt(*grid, Z), std::pow(N1(Z), n)));
        }
        rep.add("L(nu_" + std::to_string(n) + ") = N1^" + std::to_string(n), worst, tol);
    }

    for (double a : {0.5, 1.0, 2.0}) {
        double worst = 0.0;
        for (double z : zs) {
            const CutPlanePoint Z(z);
            const cplx G = F_G(a, Z).G;
            worst = std::max(worst, rel(forward_lt([&](double u) { return g_kernel(a, u); }, Z), G));
        }
        std::ostringstream n;
        n << "L(g_alpha) = G_alpha, alpha=" << a;
        rep.add(n.str(), worst, tol);
    }

    for (double a : {-2.0, -1.0, 0.0}) {
        double worst = 0.0;
        for (double z : zs) {
            const CutPlanePoint Z(z);
            worst = std::max(worst, rel(F_G(a, Z).F, F_nonpositive(a, Z)));
        }
        std::ostringstream n;
        n << "F_alpha = exp(alpha sqrt z) Psi(-sqrt z), alpha=" << a;
        rep.add(n.str(), worst, tol);
    }
    return rep;
}

VerificationReport verify_inversion(const VerifyOptions& opt) {
    VerificationReport rep;
    const double tol = tol_or(opt, 1e-6);

    struct Case {
        const char* name;
        Transform F;
        RealFn f;
        double t0, t1;
    };
    const std::vector<Case> cases{
        {"psi_1", [](const CutPlanePoint& z) { return std::exp(-z.sqrt()); },
         [](double t) { return heat_kernel(HeatKind::psi, 1.0, t); }, 0.1, 5.0},
        {"g_1", [](const CutPlanePoint& z) { return F_fast(1.0, z) / z.sqrt(); }, [](double t) { return g_kernel(1.0, t); },
         0.1, 5.0},
        {"nu", [](const CutPlanePoint& z) { return N1(z); }, [](double t) { return nu(t); }, 0.1, 5.0},
    };
    for (const auto& c : cases) {
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            const double t = c.t0 * std::pow(c.t1 / c.t0, i / 9.0);
            worst = std::max(worst, std::abs(talbot_invert(c.F, t) - c.f(t)) / std::max(1.0, std::abs(c.f(t))));
        }
        rep.add(std::string("Talbot round trip ") + c.name + ", 10 times in [0.1, 5]", worst, tol);
    }

    // Case I: layer sum against inversion of the transform quotient.
    double worst = 0.0;
    const ExcursionSpec spec(-0.5, 1.0);
    for (double u : {1.6, 2.5, 4.0})
        for (double y : {-1.0, 0.0, 0.8}) {
            const double a = density_case1(spec, u, y), b = density_case1_inversion(spec, u, y);
            worst = std::max(worst, std::abs(a - b) / std::max(1e-3, std::abs(a)));
        }
    rep.add("Case I layer sum vs inversion, b=-0.5 D=1", worst, opt.tol ? *opt.tol : 1e-4);
    return rep;
}

VerificationReport verify_series(const VerifyOptions& opt) {
    VerificationReport rep;
    double pmax = 0.0;
    for (double re : {1.0, 2.0, 4.0, 8.0, 16.0})
        for (int k = -8; k <= 8; ++k) pmax = std::max(pmax, std::abs(series_ratio(CutPlanePoint(cplx(re, 2.5 * k)))));
    rep.add("|p(z)| on Re z >= 1 probe grid", pmax, opt.tol ? *opt.tol : 0.999999);

    // Remainder of the partial sum against the geometric tail bound.
    double worst = 0.0;
    for (cplx zv : {cplx(1.0), cplx(2.0, 1.0), cplx(3.0, -2.0), cplx(5.0), cplx(1.0, 4.0)}) {
        const CutPlanePoint z(zv);
        for (const cplx R : {cplx(1.0), F_fast(0.0, z) / z.sqrt()}) {
            const cplx exact = R / psi(z.sqrt());
            const double p = std::abs(series_ratio(z));
            const double scale = std::abs(R * std::exp(-0.5 * zv) / std::sqrt(2.0 * kPi * zv));
            for (int N : {0, 1, 3, 6, 12}) {
                const double bound = scale * std::pow(p, N + 1) / (1.0 - p);
                const double err = std::abs(exact - geometric_partial(R, z, N));
                worst = std::max(worst, err / (bound + 1e-15 * std::abs(exact)));
            }
        }
    }
    rep.add("geometric series remainder / tail bound", worst, opt.tol ? *opt.tol : 1.0);

    struct Growth {
        const char* name;
        TransformSpec spec;
        double expected;
    };
    TransformSpec r1;
    r1.target = Target::case1;
    r1.b = 0.0;
    r1.y = 0.0;
    TransformSpec k2;
    k2.target = Target::case2_k2;
    k2.b = 1.0;
    k2.delta = 0.3;
    k2.y = 1.0;
    TransformSpec k1 = k2;
    k1.target = Target::case2_k1;
    k1.y = 0.0;
    for (const Growth& g : {Growth{"R_I (b=0, y=0)", r1, -1.5}, Growth{"Q G_beta numerator (y=b)", k2, -1.5},
                            Growth{"phi-integral numerator (y<b)", k1, -1.0}}) {
        const TransformSpec s = g.spec;
        const double slope =
            growth_slope([&](const CutPlanePoint& z) { return transform_numerator(s, z); }, 1e2, 1e6);
        std::ostringstream note;
        note << "slope " << std::setprecision(5) << slope << ", expected " << g.expected;
        rep.add(std::string("growth of ") + g.name, std::abs(slope - g.expected), opt.tol ? *opt.tol : 0.02,
                note.str());
    }
    return rep;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"identities", "pairs", "inversion", "series"};
    return names;
}

VerificationReport run_suite(const std::string& name, const VerifyOptions& opt) {
    if (name == "identities") return verify_identities(opt);
    if (name == "pairs") return verify_pairs(opt);
    if (name == "inversion") return verify_inversion(opt);
    if (name == "series") return verify_series(opt);
    if (name == "all") {
        VerificationReport rep;
        for (const auto& n : suite_names()) rep.append(run_suite(n, opt));
        return rep;
    }
    throw DomainError("unknown verification suite: " + name);
}

}  // namespace parex

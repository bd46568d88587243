#include "parex/specialfn.hpp"

#include "parex/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace parex {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kSqrt2Pi = 2.5066282746310005024;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// The Maclaurin series of erf loses about exp(2 (Re q)^2) to cancellation and
// needs O(|q|^2) terms; the continued fraction converges quickly once Re q is
// moderate or |q| is large.
bool use_series(cplx q) { return q.real() < 1.5 && std::abs(q) < 7.0; }

cplx erf_series(cplx q) {
    const cplx q2 = q * q;
    cplx term = q;
    cplx sum = 0.0;
    for (int n = 0; n < 600; ++n) {
        const cplx t = term / double(2 * n + 1);
        sum += t;
        if (std::abs(t) <= 1e-17 * std::abs(sum)) break;
        term *= -q2 / double(n + 1);
    }
    return 2.0 / kSqrtPi * sum;
}

// K with sqrt(pi) erfcx(q) = 1 / (q + K), where
// K = (1/2) / (q + 1 / (q + (3/2) / (q + ...))). Modified Lentz.
cplx cf_tail(cplx q) {
    const double tiny = 1e-300;
    cplx f = q;
    cplx C = f;
    cplx Dn = 0.0;
    for (int k = 2; k < 20000; ++k) {
        const double a = 0.5 * k;
        Dn = q + a * Dn;
        if (Dn == 0.0) Dn = tiny;
        Dn = 1.0 / Dn;
        C = q + a / C;
        if (C == 0.0) C = tiny;
        const cplx d = C * Dn;
        f *= d;
        if (std::abs(d - 1.0) < 1e-16) break;
    }
    return 0.5 / f;
}

}  // namespace

CutPlanePoint::CutPlanePoint(cplx z) : z_(z) {
    if (!(std::isfinite(z.real()) && std::isfinite(z.imag())))
        throw DomainError("CutPlanePoint: non-finite value");
    if (z.imag() == 0.0 && z.real() <= 0.0)
        throw DomainError("CutPlanePoint: z on the cut (-inf, 0]");
    sqrt_ = std::sqrt(z);
}

CutPlanePoint CutPlanePoint::right_half(cplx z) {
    if (!(z.real() > 0.0)) throw DomainError("Laplace argument requires Re z > 0");
    return CutPlanePoint(z);
}

SectorPoint::SectorPoint(cplx a) : a_(a) {
    if (!(a.real() >= 0.0) || std::abs(a.imag()) > a.real() * (1.0 + 1e-15))
        throw DomainError("SectorPoint: |arg alpha| > pi/4");
}

cplx erfcx(cplx q) {
    if (q.real() < 0.0) throw DomainError("erfcx: requires Re q >= 0");
    if (use_series(q)) return std::exp(q * q) * (1.0 - erf_series(q));
    return 1.0 / (kSqrtPi * (q + cf_tail(q)));
}

cplx erfc(cplx z) {
    if (z.imag() == 0.0) return erfc(z.real());
    if (std::abs(z.imag()) > std::abs(z.real()) * (1.0 + 1e-15) || z.real() < 0.0)
        throw DomainError("erfc: argument outside the sector |arg z| <= pi/4");
    if (use_series(z)) return 1.0 - erf_series(z);
    return std::exp(-z * z) * erfcx(z);
}

double erfc(double x) { return std::erfc(x); }

cplx psi_neg_scaled(cplx q) {
    if (q.real() < 0.0) throw DomainError("psi_neg_scaled: requires Re q >= 0");
    if (use_series(q)) return 1.0 - kSqrtPi * q * erfcx(q);
    const cplx K = cf_tail(q);
    return K / (q + K);
}

cplx psi(cplx w) {
    const cplx p = w / kSqrt2;
    if (p.real() <= 0.0) return psi_neg_scaled(-p);
    return psi_neg_scaled(p) + 2.0 * kSqrtPi * p * std::exp(p * p);
}

cplx recip_psi(cplx v) {
    if (v.real() < 0.0) throw DomainError("recip_psi: requires Re v >= 0");
    const cplx p = v / kSqrt2;
    const cplx p2 = p * p;
    const cplx A = psi_neg_scaled(p);
    if (p2.real() < 30.0) return 1.0 / (A + 2.0 * kSqrtPi * p * std::exp(p2));
    const cplx e = std::exp(-p2);
    return e / (A * e + 2.0 * kSqrtPi * p);
}

cplx recip_psi_scaled(cplx v) {
    if (!(v.real() > std::abs(v.imag()))) throw DomainError("recip_psi_scaled: requires |arg v| < pi/4");
    const cplx p = v / kSqrt2;
    return 1.0 / (psi_neg_scaled(p) * std::exp(-p * p) + 2.0 * kSqrtPi * p);
}

double psi_series_coefficient(int n) {
    if (n < 0) throw DomainError("psi_series_coefficient: n < 0");
    return std::exp(0.5 * n * std::log(2.0) + std::lgamma(0.5 * n + 1.0) - std::lgamma(n + 1.0));
}

cplx psi_series(cplx w, int nmax) {
    cplx sum = 0.0;
    cplx wn = 1.0;
    for (int n = 0; n <= nmax; ++n) {
        sum += psi_series_coefficient(n) * wn;
        wn *= w;
    }
    return sum;
}

cplx heat_kernel(HeatKind kind, SectorPoint alpha, double u) {
    if (!(u > 0.0)) throw DomainError("heat_kernel: u must be positive");
    const cplx a = alpha.value();
    switch (kind) {
    case HeatKind::psi:
        if (!(a.real() > 0.0)) throw DomainError("heat_kernel(psi): Re alpha must be positive");
        return a / (2.0 * kSqrtPi) * std::exp(-1.5 * std::log(u) - a * a / (4.0 * u));
    case HeatKind::chi:
        return std::exp(-a * a / (4.0 * u)) / std::sqrt(kPi * u);
    case HeatKind::phi:
        return erfc(a / (2.0 * std::sqrt(u)));
    }
    throw DomainError("heat_kernel: unknown kind");
}

double heat_kernel(HeatKind kind, double alpha, double u) {
    if (!(u > 0.0)) throw DomainError("heat_kernel: u must be positive");
    if (alpha < 0.0) throw DomainError("heat_kernel: alpha must be nonnegative");
    switch (kind) {
    case HeatKind::psi:
        if (!(alpha > 0.0)) throw DomainError("heat_kernel(psi): alpha must be positive");
        return alpha / (2.0 * kSqrtPi) * std::exp(-1.5 * std::log(u) - alpha * alpha / (4.0 * u));
    case HeatKind::chi:
        return std::exp(-alpha * alpha / (4.0 * u)) / std::sqrt(kPi * u);
    case HeatKind::phi:
        return std::erfc(alpha / (2.0 * std::sqrt(u)));
    }
    throw DomainError("heat_kernel: unknown kind");
}

double nu(double u) {
    if (!(u >= 0.0)) throw DomainError("nu: u must be nonnegative");
    return 2.0 / kSqrtPi * std::sqrt(u) / (2.0 * u + 1.0);
}

cplx N1(const CutPlanePoint& z) {
    const cplx s = z.sqrt();
    return psi_neg_scaled(s / kSqrt2) / s;
}

double g_kernel(double alpha, double u) {
    if (!(u > 0.0)) throw DomainError("g_kernel: u must be positive");
    if (!(alpha >= 0.0)) throw DomainError("g_kernel: alpha must be nonnegative");
    const double w = 1.0 + 2.0 * u;
    const double a2 = alpha * alpha;
    const double first = nu(u) * std::exp(-a2 / (4.0 * u * w));
    const double second = alpha * std::pow(w, -1.5) * std::erfc(-alpha / std::sqrt(4.0 * u * w));
    return std::exp(-0.5 * a2 / w) * (first + second);
}

cplx F_nonpositive(double alpha, const CutPlanePoint& z) {
    if (alpha > 0.0) throw DomainError("F_nonpositive: alpha must be <= 0");
    const cplx s = z.sqrt();
    return std::exp(alpha * s) * psi_neg_scaled(s / kSqrt2);
}

namespace {

// int_alpha^inf x exp(-x^2/2 - (x - alpha) s) dx for alpha >= 0, Re s > 0.
cplx F_upper(double alpha, cplx s) {
    const cplx q = (alpha + s) / kSqrt2;
    const double pre = std::exp(-0.5 * alpha * alpha);
    if (use_series(q)) {
        const cplx ex = erfcx(q);
        return pre * (alpha * kSqrtPi / kSqrt2 * ex + 1.0 - kSqrtPi * q * ex);
    }
    const cplx K = cf_tail(q);
    return pre * (alpha + kSqrt2 * K) / (alpha + s + kSqrt2 * K);
}

double x_max(double alpha) { return std::max(alpha, 0.0) + std::sqrt(2.0 * std::log(1.0 / kEps)) + 1.0; }

}  // namespace

FGValue F_G(double alpha, const CutPlanePoint& z) {
    if (!(z.value().real() > 0.0)) throw DomainError("F_G: requires Re z > 0");
    const cplx s = z.sqrt();
    auto f = [&](double x) { return x * std::exp(-0.5 * x * x - std::abs(alpha - x) * s); };
    const QuadTol tol{1e-14, 1e-12, 20};
    const double xm = x_max(alpha);
    cplx F = 0.0;
    if (alpha > 0.0) {
        F = integrate(f, 0.0, alpha, tol) + integrate(f, alpha, xm, tol);
    } else {
        F = integrate(f, 0.0, xm, tol);
    }
    return {F, F / s};
}

cplx F_fast(double alpha, const CutPlanePoint& z) {
    if (alpha <= 0.0) return F_nonpositive(alpha, z);
    const cplx s = z.sqrt();
    auto f = [&](double x) { return x * std::exp(-0.5 * x * x - (alpha - x) * s); };
    const cplx lower = integrate(f, 0.0, alpha, QuadTol{1e-15, 1e-12, 20});
    return lower + F_upper(alpha, s);
}

double first_passage_density(double b, double w) {
    if (!(b > 0.0)) throw DomainError("first_passage_density: b must be positive");
    if (!(w > 0.0)) throw DomainError("first_passage_density: w must be positive");
    return b / std::sqrt(2.0 * kPi) * std::exp(-1.5 * std::log(w) - b * b / (2.0 * w));
}

double hit_probability(double b, double delta) {
    if (!(b >= 0.0) || !(delta > 0.0)) throw DomainError("hit_probability: need b >= 0, delta > 0");
    return std::erfc(b / std::sqrt(2.0 * delta));
}

double killed_density(double b, double u, double y) {
    if (!(u > 0.0)) throw DomainError("killed_density: u must be positive");
    const double c = 1.0 / std::sqrt(2.0 * kPi * u);
    // exp(-y^2/2u) (1 - exp(-2b(b - y)/u)) keeps the difference accurate near y = b.
    return c * std::exp(-y * y / (2.0 * u)) * -std::expm1(-2.0 * b * (b - y) / u);
}

double heat_density(double u, double x, double y) {
    if (!(u > 0.0)) throw DomainError("heat_density: u must be positive");
    const double d = y - x;
    return std::exp(-d * d / (2.0 * u)) / (kSqrt2Pi * std::sqrt(u));
}

}  // namespace parex

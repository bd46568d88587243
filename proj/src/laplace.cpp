#include "parex/laplace.hpp"

#include "parex/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace parex {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

}  // namespace

cplx forward_lt(const RealFn& f, const CutPlanePoint& z, ForwardOptions opt) {
    const cplx zv = z.value();
    if (!(zv.real() > 0.0)) throw DomainError("forward_lt: requires Re z > 0");
    const double re = zv.real();
    auto g = [&](double u) { return std::exp(-zv * u) * f(u); };
    const QuadTol tol{1e-300, 1e-12, 22};
    const double a = std::min(1.0, 1.0 / re);
    cplx sum = integrate_singular(g, 0.0, a, tol);

    // March in panels until the integrand bound falls below the tail level.
    const double width = std::min(std::max(a, 1.0 / re), zv.imag() != 0.0 ? 8.0 * kPi / std::abs(zv.imag()) : 1e300);
    double lo = a;
    for (int panel = 0; panel < 100000; ++panel) {
        const double hi = lo + width;
        sum += integrate(g, lo, hi, tol);
        const double bound = std::max(std::abs(f(hi)), std::abs(f(0.5 * (lo + hi)))) * std::exp(-re * hi);
        if (bound < opt.tail && hi * re > 10.0) return sum;
        lo = hi;
    }
    throw NumericalError("forward_lt: integrand did not decay");
}

cplx forward_lt(const GridFn& f, const CutPlanePoint& z, double tail) {
    const cplx zv = z.value();
    if (!(zv.real() > 0.0)) throw DomainError("forward_lt: requires Re z > 0");
    if (f.is_impulse()) return 1.0;
    const double h = f.step();
    const std::size_t n = f.size();
    if (n < 8) throw NumericalError("forward_lt: grid too short");
    const double T = f.horizon();
    const double last = std::abs(f.node(n - 1)) * std::exp(-zv.real() * T);
    if (!f.decaying() && last > tail)
        throw NumericalError("forward_lt: grid horizon too short for the requested tail");
    cplx sum = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k) sum += std::exp(-zv * (double(k) * h)) * f.node(k);
    sum *= h;
    sum += 0.5 * h * std::exp(-zv * T) * f.node(n - 1);
    std::array<double, 4> re{}, im{};
    for (std::size_t j = 0; j < 4; ++j) {
        const cplx p = std::exp(-zv * (double(j) * h)) * f.smooth_factor(j);
        re[j] = p.real();
        im[j] = p.imag();
    }
    sum += cplx(endpoint_correction(re, h, f.sing0()), endpoint_correction(im, h, f.sing0()));
    return sum;
}

void TransformSpec::validate() const {
    if (!(D > 0.0)) throw DomainError("TransformSpec: D must be positive");
    switch (target) {
    case Target::H0: break;
    case Target::case1:
        if (b > 0.0) throw DomainError("TransformSpec: case1 requires b <= 0");
        if (!y) throw DomainError("TransformSpec: case1 requires y");
        break;
    case Target::cdf_case1:
        if (b > 0.0) throw DomainError("TransformSpec: cdf_case1 requires b <= 0");
        break;
    case Target::case2_k1:
    case Target::case2_k2:
        if (!(b > 0.0)) throw DomainError("TransformSpec: case2 requires b > 0");
        if (!delta || !(*delta > 0.0) || !(*delta < D))
            throw DomainError("TransformSpec: case2 requires 0 < delta < D");
        if (!y) throw DomainError("TransformSpec: case2 requires y");
        break;
    }
}

namespace {

// sqrt(D) int_{-inf}^{b} exp(-|x-y| sigma/sqrt D) / sigma * phi_{b,delta}(x) dx.
cplx phi_numerator(double b, double delta, double D, double y, cplx sigma) {
    const double sd = std::sqrt(D);
    const cplx c = sigma / sd;
    auto f = [&](double x) { return std::exp(-std::abs(x - y) * c) * killed_density(b, delta, x); };
    const double lo = -std::sqrt(2.0 * delta * (std::log(1e18) - 0.5 * std::log(2.0 * kPi * delta)));
    const double w = 10.0 / c.real();
    std::vector<double> cuts{lo};
    for (double p : {y - w, y, y + w})
        if (p > lo && p < b) cuts.push_back(p);
    cuts.push_back(b);
    // phi is O(1/sqrt(delta)); tail panels need only an absolute target.
    const QuadTol tol{1e-16, 1e-12, 22};
    cplx sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += integrate(f, cuts[i], cuts[i + 1], tol);
    return sd * sum / sigma;
}

}  // namespace

cplx transform_numerator(const TransformSpec& spec, const CutPlanePoint& s) {
    spec.validate();
    const double sd = std::sqrt(spec.D);
    const cplx sigma = s.sqrt();
    switch (spec.target) {
    case Target::H0: return 1.0;
    case Target::case1: {
        const double beta = (spec.b - *spec.y) / sd;
        return std::exp(spec.b / sd * sigma) * sd * F_fast(beta, s) / sigma;
    }
    case Target::cdf_case1: return std::exp(spec.b / sd * sigma) * (2.0 * spec.D) / s.value();
    case Target::case2_k1: return phi_numerator(spec.b, *spec.delta, spec.D, *spec.y, sigma);
    case Target::case2_k2: {
        const double beta = (spec.b - *spec.y) / sd;
        return sd * hit_probability(spec.b, *spec.delta) * F_fast(beta, s) / sigma;
    }
    }
    throw DomainError("transform_numerator: unknown target");
}

cplx assemble_transform(const TransformSpec& spec, const CutPlanePoint& z) {
    spec.validate();
    const CutPlanePoint s(2.0 * spec.D * z.value());
    const cplx rp = recip_psi(s.sqrt());
    if (!(std::abs(rp) < 1e12)) throw NumericalError("assemble_transform: singular denominator");
    return transform_numerator(spec, s) * rp;
}

cplx assemble_transform_shifted(const TransformSpec& spec, const CutPlanePoint& z) {
    spec.validate();
    const CutPlanePoint s(2.0 * spec.D * z.value());
    return transform_numerator(spec, s) * recip_psi_scaled(s.sqrt());
}

double talbot_invert(const Transform& F, double t, int M) {
    if (!(t > 0.0)) throw DomainError("talbot_invert: t must be positive");
    if (M < 2) throw DomainError("talbot_invert: M must be >= 2");
    const double r = 2.0 * M / (5.0 * t);
    double sum = 0.5 * std::exp(r * t) * F(CutPlanePoint(r)).real();
    for (int k = 1; k < M; ++k) {
        const double th = k * kPi / M;
        const double cot = 1.0 / std::tan(th);
        const cplx s(r * th * cot, r * th);
        const double sig = th + (th * cot - 1.0) * cot;
        sum += (std::exp(t * s) * F(CutPlanePoint(s)) * cplx(1.0, sig)).real();
    }
    return r / M * sum;
}

InversionResult talbot_invert_checked(const Transform& F, double t, int M, double tol) {
    const double a = talbot_invert(F, t, M);
    const double b = talbot_invert(F, t, std::max(2, M - 8));
    const double change = std::abs(a - b);
    return {a, change, change <= 10.0 * tol * std::max(1.0, std::abs(a))};
}

DeHoogInverter::DeHoogInverter(const Transform& F, double t_max, DeHoogOptions opt)
    : t_max_(t_max), T_(opt.T_factor * t_max), gamma_(0.0), M_(opt.M) {
    if (!(t_max > 0.0)) throw DomainError("dehoog: t must be positive");
    if (M_ < 2) throw DomainError("dehoog: M must be >= 2");
    gamma_ = -0.5 * std::log(opt.tol) / T_;
    const int N = 2 * M_;
    std::vector<cplx> a(N + 1);
    a[0] = 0.5 * F(CutPlanePoint(gamma_));
    for (int k = 1; k <= N; ++k) a[k] = F(CutPlanePoint(cplx(gamma_, k * kPi / T_)));

    // Quotient-difference table; column r of q and e.
    std::vector<std::vector<cplx>> q(N, std::vector<cplx>(M_ + 1)), e(N + 1, std::vector<cplx>(M_ + 1));
    for (int i = 0; i < N; ++i) q[i][1] = a[i + 1] / a[i];
    for (int r = 1; r <= M_; ++r) {
        for (int i = 0; i <= N - 2 * r; ++i) e[i][r] = q[i + 1][r] - q[i][r] + e[i + 1][r - 1];
        if (r < M_)
            for (int i = 0; i < N - 2 * r; ++i) q[i][r + 1] = q[i + 1][r] * e[i + 1][r] / e[i][r];
    }
    d_.assign(N + 1, 0.0);
    d_[0] = a[0];
    for (int r = 1; r <= M_; ++r) {
        d_[2 * r - 1] = -q[0][r];
        d_[2 * r] = -e[0][r];
    }
}

double DeHoogInverter::operator()(double t) const {
    if (!(t > 0.0) || t > T_) throw DomainError("dehoog: t outside (0, T]");
    const int N = 2 * M_;
    const cplx z = std::exp(cplx(0.0, kPi * t / T_));
    std::vector<cplx> A(N + 2), B(N + 2);
    A[0] = 0.0;
    A[1] = d_[0];
    B[0] = 1.0;
    B[1] = 1.0;
    for (int n = 2; n <= N; ++n) {
        A[n] = A[n - 1] + d_[n - 1] * z * A[n - 2];
        B[n] = B[n - 1] + d_[n - 1] * z * B[n - 2];
    }
    const cplx h2M = 0.5 * (1.0 + (d_[N - 1] - d_[N]) * z);
    const cplx R2M = -h2M * (1.0 - std::sqrt(1.0 + d_[N] * z / (h2M * h2M)));
    A[N + 1] = A[N] + R2M * A[N - 1];
    B[N + 1] = B[N] + R2M * B[N - 1];
    return std::exp(gamma_ * t) / T_ * (A[N + 1] / B[N + 1]).real();
}

double dehoog_invert(const Transform& F, double t, DeHoogOptions opt) { return DeHoogInverter(F, t, opt)(t); }

InversionResult dehoog_invert_checked(const Transform& F, double t, DeHoogOptions opt, double tol) {
    const double a = dehoog_invert(F, t, opt);
    DeHoogOptions more = opt;
    more.M += 8;
    const double b = dehoog_invert(F, t, more);
    const double change = std::abs(a - b);
    return {b, change, change <= 10.0 * tol * std::max(1e-3, std::abs(b))};
}

double growth_slope(const Transform& R, double zlo, double zhi, int points) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < points; ++i) {
        const double lz = std::log(zlo) + (std::log(zhi) - std::log(zlo)) * i / (points - 1);
        const double ly = std::log(std::abs(R(CutPlanePoint(std::exp(lz)))));
        sx += lz;
        sy += ly;
        sxx += lz * lz;
        sxy += lz * ly;
    }
    return (points * sxy - sx * sy) / (points * sxx - sx * sx);
}

cplx series_ratio(const CutPlanePoint& z) {
    const cplx zv = z.value();
    return std::exp(-0.5 * zv) * psi_neg_scaled(z.sqrt() / kSqrt2) / std::sqrt(2.0 * kPi * zv);
}

cplx geometric_partial(cplx R, const CutPlanePoint& z, int N) {
    const cplx zv = z.value();
    const cplx n1 = N1(z);
    const cplx step = -std::exp(-0.5 * zv) * n1 / std::sqrt(2.0 * kPi);
    cplx term = std::exp(-0.5 * zv);
    cplx sum = 0.0;
    for (int n = 0; n <= N; ++n) {
        sum += term;
        term *= step;
    }
    return R / std::sqrt(2.0 * kPi * zv) * sum;
}

}  // namespace parex

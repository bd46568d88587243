#include "parex/excursion.hpp"

#include "parex/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>

namespace parex {

namespace {

constexpr double kPi = std::numbers::pi;

// Breakpoints for w-integrals against mu_b: mu_b is concentrated near b^2/3,
// which a single Gauss-Kronrod panel can miss entirely when b is small.
std::vector<double> mu_cuts(double b, double wmax, const std::vector<double>& extra) {
    std::vector<double> cuts{0.0};
    for (double f : {1.0 / 30.0, 1.0 / 3.0, 1.0, 10.0, 100.0}) {
        const double w = f * b * b;
        if (w > 0.0 && w < wmax) cuts.push_back(w);
    }
    for (double w : extra)
        if (w > 0.0 && w < wmax) cuts.push_back(w);
    cuts.push_back(wmax);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

template <class F>
double integrate_mu(double b, double wmax, const std::vector<double>& extra, F&& kernel, const QuadTol& tol,
                    bool sqrt_end = true) {
    auto f = [&](double w) { return w > 0.0 ? first_passage_density(b, w) * kernel(w) : 0.0; };
    const auto cuts = mu_cuts(b, wmax, extra);
    double s = 0.0;
    // The kernel may have a square-root endpoint at wmax.
    const std::size_t n = cuts.size() - 1;
    for (std::size_t i = 0; i < n; ++i)
        s += sqrt_end && i + 1 == n ? integrate_singular(f, cuts[i], cuts[i + 1], tol)
                                    : integrate(f, cuts[i], cuts[i + 1], tol);
    return s;
}

void require_case(const ExcursionSpec& spec, Case c, const char* what) {
    if (spec.kind() != c) throw DomainError(std::string(what) + ": wrong case for this spec");
}

// sum_n (-1)^(n-1) (2 pi)^(-n/2) int_0^{min(delta, u - Dn)} mu_b(w) (rho * nu^{*(n-1)})((u - Dn - w)/(2D)) dw
double mu_layers(const ExcursionSpec& spec, double u, const GridFn& rho, const Numerics& num) {
    const double D = spec.D();
    const double delta = spec.delta();
    double total = 0.0;
    for (int n = 1; double(n) < u / D; ++n) {
        const double span = u - D * n;
        const double wmax = std::min(delta, span);
        GridFn K = n == 1 ? rho : convolve(rho, *nu_nfold(n - 1, nu_horizon(rho.horizon()), rho.step()));
        auto kern = [&](double w) { return K(std::max(0.0, (span - w) / (2.0 * D))); };
        // K is a cubic interpolant, so its kinks at the knots set a floor near 1e-9.
        QuadTol tol = num.w_tol;
        tol.rel = std::max(tol.rel, 1e-8);
        const double v = integrate_mu(spec.b(), wmax, {}, kern, tol);
        const double sign = n % 2 == 1 ? 1.0 : -1.0;
        total += sign * std::pow(2.0 * kPi, -0.5 * n) * v;
    }
    return total;
}

}  // namespace

ExcursionSpec::ExcursionSpec(double b, double D, std::optional<double> delta) : b_(b), D_(D), delta_(delta) {
    if (!std::isfinite(b)) throw DomainError("ExcursionSpec: b must be finite");
    if (!(D > 0.0) || !std::isfinite(D)) throw DomainError("ExcursionSpec: D must be positive");
    if (delta) {
        if (!(b > 0.0)) throw DomainError("ExcursionSpec: delta is only meaningful for b > 0");
        if (!(*delta > 0.0) || !(*delta < D)) throw DomainError("ExcursionSpec: need 0 < delta < D");
    } else if (b > 0.0) {
        throw DomainError("ExcursionSpec: b > 0 requires the remaining duration delta");
    }
}

bool operator==(const ExcursionSpec& a, const ExcursionSpec& b) {
    return a.b() == b.b() && a.D() == b.D() && a.delta_opt() == b.delta_opt();
}

double ExcursionSpec::bstar() const { return b_ / std::sqrt(D_); }

double ExcursionSpec::beta(double y) const { return (b_ - y) / std::sqrt(D_); }

std::string ExcursionSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "b=" << b_ << " D=" << D_;
    if (delta_) os << " delta=" << *delta_;
    return os.str();
}

double Numerics::grid_step(double D) const { return step > 0.0 ? step : std::min(D, 1.0) / 512.0; }

namespace {

// Close to the onset the kernels are sharp on the scale of the largest
// argument smax; the default step is halved until it resolves them.
double layer_step(const Numerics& num, double D, double smax) {
    double h = num.grid_step(D);
    if (num.step > 0.0) return h;
    while (h > smax / 256.0 && h > 1e-7) h *= 0.5;
    return h;
}

}  // namespace

double density_case1(const ExcursionSpec& spec, double u, double y, const Numerics& num) {
    require_case(spec, Case::I, "density_case1");
    const double D = spec.D();
    if (!(u > D)) return 0.0;
    const double sigma1 = 0.5 * (u / D - 1.0);
    const double h = layer_step(num, D, sigma1);
    LayerKernel k{rho_ac(spec.bstar(), spec.beta(y), sigma1 + 4.0 * h, h), std::sqrt(D) / (2.0 * D)};
    return layer_sum(k, D, {u}).front();
}

ClosedFormTerms closed_form_terms(const ExcursionSpec& spec, double u, double y, H12Variant variant) {
    require_case(spec, Case::II, "closed_form_terms");
    const double b = spec.b(), D = spec.D(), delta = spec.delta();
    if (!(u > delta)) return {};
    const double qle = hit_probability(b, delta);
    const double qgt = 1.0 - qle;
    const double v = u - delta;
    auto f = [&](double x) {
        const double d = b - x - y;
        return x * std::exp(-x * x / (2.0 * D) - d * d / (2.0 * v));
    };
    const double xmax = std::sqrt(2.0 * D * std::log(1.0 / std::numeric_limits<double>::epsilon())) + 1.0;
    std::vector<double> cuts{0.0};
    const double c = b - y, w = std::sqrt(v);
    for (double p : {c - 8.0 * w, c, c + 8.0 * w})
        if (p > 0.0 && p < xmax) cuts.push_back(p);
    cuts.push_back(xmax);
    std::sort(cuts.begin(), cuts.end());
    double I = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) I += integrate(f, cuts[i], cuts[i + 1], QuadTol{1e-30, 1e-12});
    ClosedFormTerms t;
    t.h11 = qgt * qle / D / std::sqrt(2.0 * kPi * v) * I;
    t.h12 = qgt * killed_density(b, variant == H12Variant::printed ? u : v, y);
    return t;
}

double h_b21(const ExcursionSpec& spec, double u, double y, const Numerics& num) {
    require_case(spec, Case::II, "h_b21");
    const double D = spec.D();
    if (!(u > D)) return 0.0;
    const double smax = 0.5 * (u / D - 1.0);
    const double h = layer_step(num, D, smax);
    const GridFn rho = rho_b_kernel(spec.b(), spec.delta(), D, y, smax + 4.0 * h, h);
    return std::sqrt(D) / (2.0 * D) * mu_layers(spec, u, rho, num);
}

double h_b22(const ExcursionSpec& spec, double u, double y, const Numerics& num) {
    require_case(spec, Case::II, "h_b22");
    const double D = spec.D();
    if (!(u > D)) return 0.0;
    const double smax = 0.5 * (u / D - 1.0);
    const double h = layer_step(num, D, smax);
    const GridFn rho = rho_ac(0.0, spec.beta(y), smax + 4.0 * h, h);
    const double qle = hit_probability(spec.b(), spec.delta());
    return qle * std::sqrt(D) / (2.0 * D) * mu_layers(spec, u, rho, num);
}

Case2Parts case2_parts(const ExcursionSpec& spec, double u, double y, H12Variant variant, const Numerics& num) {
    require_case(spec, Case::II, "case2_parts");
    const auto cf = closed_form_terms(spec, u, y, variant);
    return {cf.h11, cf.h12, h_b21(spec, u, y, num), h_b22(spec, u, y, num)};
}

double density(const ExcursionSpec& spec, double u, double y, const Numerics& num, H12Variant variant) {
    if (!(u > 0.0)) return 0.0;
    if (spec.kind() == Case::I) return density_case1(spec, u, y, num);
    return case2_parts(spec, u, y, variant, num).total();
}

namespace {

TransformSpec transform_for(const ExcursionSpec& spec, Target target, std::optional<double> y) {
    TransformSpec t;
    t.target = target;
    t.b = spec.b();
    t.D = spec.D();
    t.delta = spec.delta_opt();
    t.y = y;
    return t;
}

double case2_inversion(const ExcursionSpec& spec, double u, double y, Target target, const Numerics& num) {
    const double D = spec.D();
    if (!(u > D)) return 0.0;
    const TransformSpec ts = transform_for(spec, target, y);
    const DeHoogInverter f([&](const CutPlanePoint& z) { return assemble_transform_shifted(ts, z); }, u - D,
                           num.dehoog);
    const double wmax = std::min(spec.delta(), u - D);
    std::vector<double> kinks;
    for (int n = 1; double(n) < u / D; ++n) kinks.push_back(u - D * n);
    // Inverted values carry noise near 1e-9 relative, so the w-rule cannot be
    // held to the layer-sum tolerance.
    QuadTol tol = num.w_tol;
    tol.rel = std::max(tol.rel, 1e-8);
    auto g = [&](double w) { return u - w - D > 0.0 ? f(u - w - D) : 0.0; };
    return integrate_mu(spec.b(), wmax, kinks, g, tol, false);
}

}  // namespace

double density_case1_inversion(const ExcursionSpec& spec, double u, double y, const Numerics& num) {
    require_case(spec, Case::I, "density_case1_inversion");
    if (!(u > spec.D())) return 0.0;
    const TransformSpec ts = transform_for(spec, Target::case1, y);
    return dehoog_invert([&](const CutPlanePoint& z) { return assemble_transform_shifted(ts, z); }, u - spec.D(),
                         num.dehoog);
}

double h_b21_inversion(const ExcursionSpec& spec, double u, double y, const Numerics& num) {
    require_case(spec, Case::II, "h_b21_inversion");
    return case2_inversion(spec, u, y, Target::case2_k1, num);
}

double h_b22_inversion(const ExcursionSpec& spec, double u, double y, const Numerics& num) {
    require_case(spec, Case::II, "h_b22_inversion");
    return case2_inversion(spec, u, y, Target::case2_k2, num);
}

double density_inversion(const ExcursionSpec& spec, double u, double y, const Numerics& num, H12Variant variant) {
    if (!(u > 0.0)) return 0.0;
    if (spec.kind() == Case::I) return density_case1_inversion(spec, u, y, num);
    const auto cf = closed_form_terms(spec, u, y, variant);
    return cf.h11 + cf.h12 + h_b21_inversion(spec, u, y, num) + h_b22_inversion(spec, u, y, num);
}

double achievement_cdf(const ExcursionSpec& spec, double u, const Numerics& num) {
    if (!(u > 0.0)) return 0.0;
    if (spec.kind() == Case::I && !(u > spec.D())) return 0.0;
    if (spec.kind() == Case::II && !(u > spec.delta())) return 0.0;
    const double b = spec.b();
    const double spread = 9.0 * std::sqrt(u) + 9.0 * std::sqrt(spec.D());
    const double lo = std::min(b, 0.0) - spread;
    const double hi = std::max(b, 0.0) + 9.0 * std::sqrt(u);
    std::vector<double> cuts{lo, 2.0 * b, b, 0.0, hi};
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto f = [&](double y) { return density(spec, u, y, num); };
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        // Split each piece further; the density varies on the scale sqrt(u).
        const double a = cuts[i], c = cuts[i + 1];
        const int parts = std::max(1, int(std::ceil((c - a) / (2.0 * std::sqrt(u)))));
        for (int p = 0; p < parts; ++p) {
            const double x0 = a + (c - a) * p / parts, x1 = a + (c - a) * (p + 1) / parts;
            double err = 0.0;
            s += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, x0, x1, 0, 0.0, &err);
        }
    }
    return s;
}

double achievement_cdf_inversion(const ExcursionSpec& spec, double u, const Numerics& num) {
    require_case(spec, Case::I, "achievement_cdf_inversion");
    if (!(u > spec.D())) return 0.0;
    const TransformSpec ts = transform_for(spec, Target::cdf_case1, std::nullopt);
    return dehoog_invert([&](const CutPlanePoint& z) { return assemble_transform_shifted(ts, z); }, u - spec.D(),
                         num.dehoog);
}

std::function<double(double, double)> denormalize(double a, double t, double x_t, double D,
                                                  std::optional<double> delta, const Numerics& num) {
    const double b = a - x_t;
    const ExcursionSpec spec = b <= 0.0 ? ExcursionSpec(b, D) : ExcursionSpec(b, D, delta);
    return [spec, t, x_t, num](double T, double x) {
        if (!(T > t)) return 0.0;
        return density(spec, T - t, x - x_t, num);
    };
}

std::string to_string(Method m) {
    switch (m) {
    case Method::analytic: return "analytic";
    case Method::inversion: return "inversion";
    case Method::mc: return "mc";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "analytic") return Method::analytic;
    if (s == "inversion") return Method::inversion;
    if (s == "mc") return Method::mc;
    throw DomainError("unknown method: " + s);
}

unsigned default_threads() {
    if (const char* env = std::getenv("PAREX_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return unsigned(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

DensityGrid density_grid(const ExcursionSpec& spec, const std::vector<double>& us, const std::vector<double>& ys,
                         Method method, const Numerics& num, unsigned threads) {
    if (method == Method::mc) throw DomainError("density_grid: use run_mc for Monte Carlo estimates");
    DensityGrid g{spec, method, us, ys, std::vector<double>(us.size() * ys.size(), 0.0)};
    const std::size_t total = g.values.size();
    if (threads == 0) threads = default_threads();
    threads = unsigned(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned id) {
        try {
            for (std::size_t i = id; i < total; i += threads) {
                const double u = us[i / ys.size()], y = ys[i % ys.size()];
                try {
                    g.values[i] =
                        method == Method::analytic ? density(spec, u, y, num) : density_inversion(spec, u, y, num);
                    if (!std::isfinite(g.values[i])) throw NumericalError("non-finite density");
                } catch (const NumericalError& e) {
                    std::ostringstream os;
                    os.precision(17);
                    os << e.what() << " at u=" << u << ", y=" << y;
                    throw NumericalError(os.str());
                }
            }
        } catch (...) {
            errors[id] = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned id = 1; id < threads; ++id) pool.emplace_back(work, id);
    work(0);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return g;
}

}  // namespace parex

#include "parex/convolve.hpp"

#include "parex/quadrature.hpp"
#include "parex/specialfn.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <stdexcept>
#include <tuple>

namespace parex {

namespace {

constexpr std::size_t kSmallK = 6;  // nodes handled by product integration
constexpr std::size_t kFitPoints = 6;

// zeta(-gamma - m), m = 0..3, for gamma = 0, 1/2, -1/2.
constexpr std::array<double, 4> kZetaRegular{-0.5, -1.0 / 12.0, 0.0, 1.0 / 120.0};
constexpr std::array<double, 4> kZetaSqrt{-0.20788622497735456602, -0.02548520188983303595,
                                          0.0085169287778503305424, 0.0044410113354794319585};
constexpr std::array<double, 4> kZetaInvSqrt{-1.4603545088095868129, -0.20788622497735456602,
                                             -0.02548520188983303595, 0.0085169287778503305424};

const std::array<double, 4>& zeta_table(Sing s) {
    switch (s) {
    case Sing::sqrt: return kZetaSqrt;
    case Sing::inv_sqrt: return kZetaInvSqrt;
    default: return kZetaRegular;
    }
}

bool same_step(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

// Four-point Lagrange interpolation at fractional position x (in node units)
// relative to the first stencil node.
double lagrange4(const double* v, double x) {
    const double l0 = -(x - 1) * (x - 2) * (x - 3) / 6.0;
    const double l1 = x * (x - 2) * (x - 3) / 2.0;
    const double l2 = -x * (x - 1) * (x - 3) / 2.0;
    const double l3 = x * (x - 1) * (x - 2) / 6.0;
    return l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3];
}

template <class NodeFn>
double interpolate(double t, double h, std::size_t n, Sing tag, NodeFn&& node) {
    if (n < 4) throw std::out_of_range("GridFn: fewer than 4 nodes");
    const double x = t / h;
    std::size_t j = x <= 0.0 ? 0 : std::size_t(std::floor(x));
    std::size_t s0 = j >= 1 ? j - 1 : 0;
    if (s0 + 4 > n) s0 = n - 4;
    std::array<double, 4> v{};
    const double gamma = sing_exponent(tag);
    for (std::size_t i = 0; i < 4; ++i) v[i] = node(s0 + i);
    const double r = lagrange4(v.data(), x - double(s0));
    if (tag == Sing::regular) return r;
    if (t == 0.0) return tag == Sing::sqrt ? 0.0 : std::numeric_limits<double>::infinity();
    return r * std::pow(t, gamma);
}

// Monomial coefficients (in node units) of the polynomial through
// (xi[i], y[i]), i < kFitPoints, by Gaussian elimination.
std::array<double, kFitPoints> fit_poly(const std::array<double, kFitPoints>& xi,
                                        const std::array<double, kFitPoints>& y) {
    constexpr std::size_t m = kFitPoints;
    double A[m][m + 1];
    for (std::size_t r = 0; r < m; ++r) {
        double p = 1.0;
        for (std::size_t c = 0; c < m; ++c) {
            A[r][c] = p;
            p *= xi[r];
        }
        A[r][m] = y[r];
    }
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < m; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        for (std::size_t k = 0; k <= m; ++k) std::swap(A[c][k], A[piv][k]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r == c) continue;
            const double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k <= m; ++k) A[r][k] -= f * A[c][k];
        }
    }
    std::array<double, m> a{};
    for (std::size_t r = 0; r < m; ++r) a[r] = A[r][m] / A[r][r];
    return a;
}

std::array<double, kFitPoints> smooth_poly(const GridFn& f) {
    std::array<double, kFitPoints> xi{}, y{};
    const std::size_t first = f.sing0() == Sing::sqrt ? 1 : 0;
    for (std::size_t i = 0; i < kFitPoints; ++i) {
        xi[i] = double(first + i);
        y[i] = f.smooth_factor(first + i);
    }
    return fit_poly(xi, y);
}

double beta_fn(double x, double y) { return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y)); }

// Exact integral of the product of the two local polynomial-times-power
// models; used for the first few nodes where the end corrections overlap.
double small_node(const GridFn& f, const GridFn& g, std::size_t k) {
    const auto a = smooth_poly(f);
    const auto b = smooth_poly(g);
    const double gf = sing_exponent(f.sing0());
    const double gg = sing_exponent(g.sing0());
    const double t = double(k) * f.step();
    double sum = 0.0;
    for (std::size_t i = 0; i < kFitPoints; ++i) {
        for (std::size_t j = 0; j < kFitPoints; ++j) {
            sum += a[i] * b[j] * std::pow(double(k), double(i + j)) * beta_fn(gf + i + 1.0, gg + j + 1.0);
        }
    }
    return sum * std::pow(t, gf + gg + 1.0);
}

}  // namespace

double endpoint_correction(const std::array<double, 4>& P, double h, Sing tag) {
    const auto& z = zeta_table(tag);
    const double gamma = sing_exponent(tag);
    const double d1 = (-11.0 * P[0] + 18.0 * P[1] - 9.0 * P[2] + 2.0 * P[3]) / (6.0 * h);
    const double d2 = (2.0 * P[0] - 5.0 * P[1] + 4.0 * P[2] - P[3]) / (h * h);
    const double d3 = (-P[0] + 3.0 * P[1] - 3.0 * P[2] + P[3]) / (h * h * h);
    const double hg = std::pow(h, gamma + 1.0);
    return -hg * (z[0] * P[0] + z[1] * d1 * h + z[2] * d2 / 2.0 * h * h + z[3] * d3 / 6.0 * h * h * h);
}

namespace {

void check_pair(const GridFn& f, const GridFn& g) {
    if (!same_step(f.step(), g.step())) throw std::invalid_argument("convolve: step mismatch");
    if (f.sing0() == Sing::inv_sqrt && g.sing0() == Sing::inv_sqrt)
        throw std::invalid_argument("convolve: both inputs singular at the origin");
}

}  // namespace

double sing_exponent(Sing s) {
    switch (s) {
    case Sing::sqrt: return 0.5;
    case Sing::inv_sqrt: return -0.5;
    default: return 0.0;
    }
}

GridFn::GridFn(double step, std::vector<double> values, Sing sing0, bool decaying)
    : step_(step), values_(std::move(values)), sing0_(sing0), decaying_(decaying) {
    if (!(step > 0.0)) throw std::invalid_argument("GridFn: step must be positive");
    if (values_.empty()) throw std::invalid_argument("GridFn: no samples");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("GridFn: non-finite sample");
}

GridFn GridFn::impulse(double step, std::size_t n) {
    GridFn g(step, std::vector<double>(n, 0.0));
    g.impulse_ = true;
    return g;
}

GridFn GridFn::sample(const std::function<double(double)>& f, double horizon, double step, Sing sing0,
                      double coef0) {
    const std::size_t n = grid_nodes(horizon, step);
    std::vector<double> v(n);
    for (std::size_t k = 1; k < n; ++k) v[k] = f(double(k) * step);
    switch (sing0) {
    case Sing::regular: v[0] = f(0.0); break;
    case Sing::sqrt: v[0] = 0.0; break;
    case Sing::inv_sqrt: v[0] = coef0; break;
    }
    return GridFn(step, std::move(v), sing0);
}

double GridFn::smooth_factor(std::size_t k) const {
    switch (sing0_) {
    case Sing::regular: return values_.at(k);
    case Sing::inv_sqrt: return k == 0 ? values_.at(0) : values_.at(k) * std::sqrt(double(k) * step_);
    case Sing::sqrt:
        if (k == 0) {
            return 4.0 * smooth_factor(1) - 6.0 * smooth_factor(2) + 4.0 * smooth_factor(3) - smooth_factor(4);
        }
        return values_.at(k) / std::sqrt(double(k) * step_);
    }
    return values_.at(k);
}

double GridFn::operator()(double t) const {
    if (impulse_) throw std::logic_error("GridFn: the impulse has no pointwise values");
    const double top = horizon();
    if (t < 0.0) throw std::out_of_range("GridFn: negative argument");
    if (t > top * (1.0 + 1e-12)) {
        if (decaying_) return 0.0;
        throw std::out_of_range("GridFn: argument beyond support");
    }
    t = std::min(t, top);
    if (sing0_ == Sing::regular)
        return interpolate(t, step_, values_.size(), sing0_, [&](std::size_t k) { return values_[k]; });
    return interpolate(t, step_, values_.size(), sing0_, [&](std::size_t k) { return smooth_factor(k); });
}

Sing convolved_sing(Sing a, Sing b) {
    if (a == Sing::inv_sqrt && b == Sing::regular) return Sing::sqrt;
    if (b == Sing::inv_sqrt && a == Sing::regular) return Sing::sqrt;
    return Sing::regular;
}

double convolve_at(const GridFn& f, const GridFn& g, std::size_t k) {
    if (f.is_impulse()) return g.node(k);
    if (g.is_impulse()) return f.node(k);
    check_pair(f, g);
    if (k >= f.size() || k >= g.size()) throw std::out_of_range("convolve: node beyond support");
    if (k == 0) return 0.0;
    if (k < kSmallK) {
        if (f.size() < kFitPoints + 2 || g.size() < kFitPoints + 2)
            throw std::out_of_range("convolve: grid too short");
        return small_node(f, g, k);
    }
    const double h = f.step();
    const auto& fv = f.values();
    const auto& gv = g.values();
    double s = 0.0;
    for (std::size_t j = 1; j < k; ++j) s += fv[k - j] * gv[j];
    s *= h;
    std::array<double, 4> PL{}, PR{};
    for (std::size_t j = 0; j < 4; ++j) {
        PL[j] = fv[k - j] * g.smooth_factor(j);
        PR[j] = f.smooth_factor(j) * gv[k - j];
    }
    return s + endpoint_correction(PL, h, g.sing0()) + endpoint_correction(PR, h, f.sing0());
}

GridFn convolve(const GridFn& f, const GridFn& g) {
    if (f.is_impulse()) return g;
    if (g.is_impulse()) return f;
    check_pair(f, g);
    const std::size_t n = std::min(f.size(), g.size());
    std::vector<double> v(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) v[k] = convolve_at(f, g, k);
    return GridFn(f.step(), std::move(v), convolved_sing(f.sing0(), g.sing0()),
                  f.decaying() && g.decaying());
}

std::size_t grid_nodes(double horizon, double step) {
    if (!(step > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("grid: need positive horizon and step");
    return std::size_t(std::ceil(horizon / step - 1e-9)) + 1;
}

std::shared_ptr<const GridFn> nu_nfold(int n, double horizon, double step) {
    if (n < 0) throw std::invalid_argument("nu_nfold: n < 0");
    const std::size_t nodes = std::max<std::size_t>(grid_nodes(horizon, step), kFitPoints + 2);
    using Key = std::tuple<int, std::size_t, double>;
    static std::map<Key, std::shared_ptr<const GridFn>> cache;
    static std::shared_mutex mutex;
    const Key key{n, nodes, step};
    {
        std::shared_lock lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    std::shared_ptr<const GridFn> made;
    const double top = step * double(nodes - 1);
    if (n == 0) {
        made = std::make_shared<const GridFn>(GridFn::impulse(step, nodes));
    } else if (n == 1) {
        made = std::make_shared<const GridFn>(GridFn::sample([](double u) { return nu(u); }, top, step, Sing::sqrt));
    } else {
        auto prev = nu_nfold(n - 1, top, step);
        auto one = nu_nfold(1, top, step);
        made = std::make_shared<const GridFn>(convolve(*prev, *one));
    }
    std::unique_lock lock(mutex);
    auto [it, inserted] = cache.emplace(key, made);
    return it->second;
}

namespace {

// int_0^tau chi(v) k(tau - v) dv. Below tau/2 the variable is x = sqrt(v),
// which removes the v^(-1/2) endpoint of chi; above it y = sqrt(tau - v),
// which removes a square-root endpoint of k. cuts are extra split points in
// s = tau - v.
template <class K>
double chi_convolution(double alpha, double tau, const std::vector<double>& cuts, K&& k, const QuadTol& tol) {
    const double half = 0.5 * tau;
    auto fx = [&](double x) {
        const double e = alpha > 0.0 ? std::exp(-alpha * alpha / (4.0 * x * x)) : 1.0;
        return 2.0 * std::numbers::inv_sqrtpi * e * k(tau - x * x);
    };
    auto fy = [&](double y) { return 2.0 * y * heat_kernel(HeatKind::chi, alpha, tau - y * y) * k(y * y); };
    std::vector<double> ys{0.0};
    for (double c : cuts)
        if (c > 0.0 && c < half) ys.push_back(std::sqrt(c));
    std::sort(ys.begin(), ys.end());
    ys.push_back(std::sqrt(half));
    double s = integrate_singular(fx, 0.0, std::sqrt(half), tol);
    for (std::size_t i = 0; i + 1 < ys.size(); ++i)
        if (ys[i + 1] > ys[i] * (1.0 + 1e-9)) s += integrate_singular(fy, ys[i], ys[i + 1], tol);
    return s;
}

}  // namespace

double rho_ac_value(double a, double c, double tau) {
    if (a > 0.0) throw DomainError("rho_ac: a must be <= 0");
    if (!(tau >= 0.0)) throw DomainError("rho_ac: tau must be >= 0");
    if (tau == 0.0) return 0.0;
    const QuadTol tol{1e-16, 1e-12, 20};
    if (c <= 0.0) {
        auto k = [](double s) { return nu(std::max(s, 0.0)); };
        return chi_convolution(std::abs(a + c), tau, {}, k, tol);
    }
    const double g0 = 2.0 * c * std::exp(-0.5 * c * c);
    auto k = [&](double s) { return s > 0.0 ? g_kernel(c, s) : g0; };
    // g_c has a layer of width c^2 at s = 0.
    return chi_convolution(std::abs(a), tau, {0.1 * c * c, c * c, 10.0 * c * c}, k, tol);
}

GridFn rho_ac(double a, double c, double horizon, double step) {
    if (a > 0.0) throw DomainError("rho_ac: a must be <= 0");
    const Sing tag = (c > 0.0 && a == 0.0) ? Sing::sqrt : Sing::regular;
    const std::size_t n = std::max<std::size_t>(grid_nodes(horizon, step), kFitPoints + 2);
    std::vector<double> v(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) v[k] = rho_ac_value(a, c, double(k) * step);
    return GridFn(step, std::move(v), tag);
}

double rho_b_value(double b, double delta, double D, double y, double tau) {
    if (!(b > 0.0) || !(delta > 0.0) || !(delta < D))
        throw DomainError("rho_b_kernel: need b > 0 and 0 < delta < D");
    if (!(tau >= 0.0)) throw DomainError("rho_b_kernel: tau must be >= 0");
    if (tau == 0.0) return 0.0;
    const double width = 2.0 * std::sqrt(D * tau);
    const double lo = -std::sqrt(2.0 * delta * (std::log(1e18) - 0.5 * std::log(2.0 * std::numbers::pi * delta)));
    auto f = [&](double x) { return killed_density(b, delta, x) * std::erfc(std::abs(x - y) / width); };
    std::vector<double> cuts{lo};
    for (double p : {y - 6.0 * width, y, y + 6.0 * width})
        if (p > lo && p < b) cuts.push_back(p);
    cuts.push_back(b);
    const QuadTol tol{1e-16, 1e-12, 20};
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += integrate(f, cuts[i], cuts[i + 1], tol);
    return sum;
}

GridFn rho_b_kernel(double b, double delta, double D, double y, double horizon, double step) {
    const Sing tag = y < b ? Sing::sqrt : Sing::regular;
    const std::size_t n = std::max<std::size_t>(grid_nodes(horizon, step), kFitPoints + 2);
    std::vector<double> v(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) v[k] = rho_b_value(b, delta, D, y, double(k) * step);
    return GridFn(step, std::move(v), tag);
}

double nu_horizon(double needed) { return std::ceil(needed + 1e-9); }

std::vector<double> layer_terms(const LayerKernel& kernel, double D, double u) {
    const GridFn& rho = kernel.rho;
    const double r = u / D;
    std::vector<double> terms;
    for (int n = 1; double(n) < r; ++n) {
        const double sigma = 0.5 * (r - double(n));
        if (sigma > rho.horizon() * (1.0 + 1e-12)) throw std::out_of_range("layer_sum: kernel support shortfall");
        double value = 0.0;
        if (n == 1) {
            value = rho(sigma);
        } else {
            auto nun = nu_nfold(n - 1, nu_horizon(rho.horizon()), rho.step());
            const std::size_t nodes = std::min(rho.size(), nun->size());
            const Sing tag = convolved_sing(rho.sing0(), nun->sing0());
            std::map<std::size_t, double> memo;
            auto node = [&](std::size_t k) {
                auto it = memo.find(k);
                if (it != memo.end()) return it->second;
                const double v = convolve_at(rho, *nun, k);
                memo.emplace(k, v);
                return v;
            };
            const double h = rho.step();
            auto smooth = [&](std::size_t k) -> double {
                if (tag == Sing::regular) return node(k);
                const double gamma = sing_exponent(tag);
                auto at = [&](std::size_t j) { return node(j) / std::pow(double(j) * h, gamma); };
                if (k > 0) return at(k);
                return 4.0 * at(1) - 6.0 * at(2) + 4.0 * at(3) - at(4);
            };
            value = interpolate(std::min(sigma, rho.horizon()), h, nodes, tag, smooth);
        }
        const double sign = (n % 2 == 1) ? 1.0 : -1.0;
        terms.push_back(sign * std::pow(2.0 * std::numbers::pi, -0.5 * n) * value);
    }
    return terms;
}

std::vector<double> layer_sum(const LayerKernel& kernel, double D, const std::vector<double>& us) {
    std::vector<double> out;
    out.reserve(us.size());
    for (double u : us) {
        double s = 0.0;
        for (double t : layer_terms(kernel, D, u)) s += t;
        out.push_back(kernel.scale * s);
    }
    return out;
}

}  // namespace parex

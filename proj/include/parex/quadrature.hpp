#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace parex {

/// Thrown when an adaptive rule cannot reach the requested tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadTol {
    double abs = 1e-12;
    double rel = 1e-10;
    unsigned max_depth = 18;
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& z) { return std::abs(z); }

template <class R>
void check_error(const R& value, double err, double l1, const QuadTol& tol, const char* what) {
    const double target = std::max(tol.abs, tol.rel * std::max(magnitude(value), 1e-300));
    // Boost reports an error bound relative to the L1 norm; accept either form.
    const double alt = tol.rel * l1;
    if (!(err <= std::max(target, alt) * 1e3)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, ": quadrature did not converge (err=%.3e, L1=%.3e)", err, l1);
        throw NumericalError(std::string(what) + buf);
    }
}

}  // namespace detail

/// Adaptive Gauss-Kronrod on a finite interval. Use for integrands that are
/// smooth on [a, b]; split the interval at known kinks before calling.
template <class F>
auto integrate(F&& f, double a, double b, QuadTol tol = {}) {
    using R = decltype(f(a));
    if (a == b) return R{};
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err = 0.0, l1 = 0.0;
    R v = GK::integrate(f, a, b, 0, 0.0, &err, &l1);
    if (err <= std::max(tol.abs, tol.rel * l1)) return v;
    // Boost stops on a tolerance relative to L1; fold the absolute target in.
    const double rel = std::max(tol.rel, tol.abs / std::max(l1, 1e-300));
    v = GK::integrate(f, a, b, tol.max_depth, rel, &err, &l1);
    detail::check_error(v, err, l1, tol, "gauss_kronrod");
    return v;
}

/// Double-exponential rule; tolerates integrable endpoint singularities and
/// steep endpoint layers.
template <class F>
auto integrate_singular(F&& f, double a, double b, QuadTol tol = {}) {
    using R = decltype(f(a));
    if (a == b) return R{};
    static thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    double err = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    // Integrate from 0: Boost's interval mapping can land exactly on an
    // endpoint of magnitude >= 0.5 and assert.
    R v = rule.integrate([&](double t) { return f(a + t); }, 0.0, b - a, tol.rel, &err, &l1, &levels);
    detail::check_error(v, err, l1, tol, "tanh_sinh");
    return v;
}

/// Integral over [a, inf).
template <class F>
auto integrate_to_infinity(F&& f, double a, QuadTol tol = {}) {
    static thread_local boost::math::quadrature::exp_sinh<double> rule(12);
    double err = 0.0, l1 = 0.0;
    auto v = rule.integrate([&](double t) { return f(a + t); }, 0.0,
                            std::numeric_limits<double>::infinity(), tol.rel, &err, &l1);
    detail::check_error(v, err, l1, tol, "exp_sinh");
    return v;
}

}  // namespace parex

#pragma once

#include "parex/convolve.hpp"
#include "parex/specialfn.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace parex {

using RealFn = std::function<double(double)>;
using Transform = std::function<cplx(const CutPlanePoint&)>;

struct ForwardOptions {
    Sing sing0 = Sing::regular;  // behaviour of f at 0
    double tail = 1e-18;         // truncation threshold for |exp(-zu) f(u)|
};

/// int_0^inf exp(-z u) f(u) du by adaptive quadrature; Re z > 0.
cplx forward_lt(const RealFn& f, const CutPlanePoint& z, ForwardOptions opt = {});

/// Same for a sampled function: endpoint-corrected trapezoid on the grid.
/// Throws NumericalError if the grid ends before the integrand is negligible
/// (unless the function is tagged decaying).
cplx forward_lt(const GridFn& f, const CutPlanePoint& z, double tail = 1e-18);

enum class Target { H0, case1, case2_k1, case2_k2, cdf_case1 };

struct TransformSpec {
    Target target = Target::H0;
    double b = 0.0;
    double D = 1.0;
    std::optional<double> delta;
    std::optional<double> y;

    void validate() const;
};

/// Laplace transforms in physical time u of the excursion quantities:
/// H0 -> 1/Psi(sqrt(2Dz)); case1 -> e^{b sqrt(2z)} sqrt(D) G_beta(2Dz)/Psi;
/// case2_k1 -> sqrt(D) int e^{-|x-y| sqrt(2z)} phi_{b,delta}(x) dx / (sqrt(2Dz) Psi);
/// case2_k2 -> sqrt(D) P(T_b <= delta) G_beta(2Dz)/Psi;
/// cdf_case1 -> e^{b sqrt(2z)} / (z Psi). Works on the whole cut plane.
cplx assemble_transform(const TransformSpec& spec, const CutPlanePoint& z);

/// e^{Dz} times assemble_transform for Re z > 0. Every original vanishes on
/// (0, D), so this transforms the original shifted left by D and moves its
/// onset to the origin.
cplx assemble_transform_shifted(const TransformSpec& spec, const CutPlanePoint& z);

/// The numerator R evaluated at s = 2Dz (denominator stripped).
cplx transform_numerator(const TransformSpec& spec, const CutPlanePoint& s);

struct InversionResult {
    double value = 0.0;
    double change = 0.0;  // difference to the comparison run
    bool converged = true;
};

/// Fixed-Talbot contour sum with M nodes.
double talbot_invert(const Transform& F, double t, int M = 32);

/// Fixed-Talbot with a convergence check against a run with M - 8 nodes.
InversionResult talbot_invert_checked(const Transform& F, double t, int M = 32, double tol = 1e-8);

struct DeHoogOptions {
    int M = 20;           // 2M+1 transform evaluations
    double T_factor = 2.0; // period parameter T = T_factor * t_max
    double tol = 1e-14;   // sets the Bromwich abscissa
};

/// De Hoog, Knight and Stokes accelerated Fourier series on a Bromwich line.
/// One set of transform values serves every t in (0, T]; this is what makes
/// the Case II time integrals affordable.
class DeHoogInverter {
public:
    DeHoogInverter(const Transform& F, double t_max, DeHoogOptions opt = {});
    double operator()(double t) const;
    double t_max() const { return t_max_; }

private:
    double t_max_, T_, gamma_;
    int M_;
    std::vector<cplx> d_;
};

double dehoog_invert(const Transform& F, double t, DeHoogOptions opt = {});

/// De Hoog with a convergence check against a run with M + 8 terms.
InversionResult dehoog_invert_checked(const Transform& F, double t, DeHoogOptions opt = {}, double tol = 1e-8);

/// Least-squares slope of log|R(z)| against log z for real z in [zlo, zhi].
double growth_slope(const Transform& R, double zlo, double zhi, int points = 25);

/// p(z) = exp(-z/2) Psi(-sqrt z) / sqrt(2 pi z), the ratio of the geometric
/// series that resolves 1/Psi(sqrt z).
cplx series_ratio(const CutPlanePoint& z);

/// Partial sum (R/sqrt(2 pi z)) sum_{n<=N} (-1)^n (2pi)^{-n/2} e^{-(n+1)z/2} N1^n.
cplx geometric_partial(cplx R, const CutPlanePoint& z, int N);

}  // namespace parex

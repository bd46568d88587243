#pragma once

#include <complex>
#include <stdexcept>

namespace parex {

using cplx = std::complex<double>;

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A point of the plane cut along (-inf, 0]. The principal square root has a
/// strictly positive real part there.
class CutPlanePoint {
public:
    CutPlanePoint(cplx z);
    CutPlanePoint(double x) : CutPlanePoint(cplx(x, 0.0)) {}

    /// Same, additionally requiring Re z > 0 (Laplace half-plane).
    static CutPlanePoint right_half(cplx z);

    cplx value() const { return z_; }
    cplx sqrt() const { return sqrt_; }

private:
    cplx z_;
    cplx sqrt_;
};

/// Complex parameter with |arg| <= pi/4.
class SectorPoint {
public:
    SectorPoint(cplx a);
    SectorPoint(double a) : SectorPoint(cplx(a, 0.0)) {}
    cplx value() const { return a_; }

private:
    cplx a_;
};

/// Scaled complementary error function exp(q^2) erfc(q) for Re q >= 0.
cplx erfcx(cplx q);

/// Complementary error function on the sector |arg z| <= pi/4 and on the
/// real line. Throws DomainError elsewhere.
cplx erfc(cplx z);
double erfc(double x);

/// Psi(w) = int_0^inf x exp(-x^2/2 + w x) dx, entire in w.
cplx psi(cplx w);

/// 1 - sqrt(pi) q erfcx(q) = Psi(-sqrt(2) q) for Re q >= 0, free of the
/// cancellation in the naive form for large |q|.
cplx psi_neg_scaled(cplx q);

/// 1 / Psi(v) for Re v >= 0, stable when |exp(v^2/2)| is large.
cplx recip_psi(cplx v);

/// exp(v^2/2) / Psi(v) for |arg v| < pi/4.
cplx recip_psi_scaled(cplx v);

/// Taylor coefficient a_n of Psi at 0.
double psi_series_coefficient(int n);

/// Truncated power series sum_{n <= nmax} a_n w^n (independent check of psi).
cplx psi_series(cplx w, int nmax = 60);

enum class HeatKind { psi, chi, phi };

/// psi_a(u) = a / (2 sqrt(pi u^3)) exp(-a^2/(4u)),
/// chi_a(u) = exp(-a^2/(4u)) / sqrt(pi u),
/// phi_a(u) = erfc(a / (2 sqrt u)).
cplx heat_kernel(HeatKind kind, SectorPoint alpha, double u);
double heat_kernel(HeatKind kind, double alpha, double u);

/// Layer kernel nu(u) = (2/sqrt(pi)) sqrt(u) / (2u + 1).
double nu(double u);

/// N_1(z) = Psi(-sqrt z) / sqrt z, the transform of nu.
cplx N1(const CutPlanePoint& z);

/// Original of G_alpha: the function whose Laplace transform is F_alpha/sqrt z.
double g_kernel(double alpha, double u);

struct FGValue {
    cplx F;
    cplx G;
};

/// F_alpha(z) = int_0^inf x exp(-x^2/2 - |alpha - x| sqrt z) dx by adaptive
/// quadrature, G = F / sqrt z. Requires Re z > 0.
FGValue F_G(double alpha, const CutPlanePoint& z);

/// F_alpha(z) valid on the whole cut plane: closed form for alpha <= 0,
/// closed-form tail plus a finite quadrature for alpha > 0.
cplx F_fast(double alpha, const CutPlanePoint& z);

/// exp(alpha sqrt z) Psi(-sqrt z), the closed form of F_alpha for alpha <= 0.
cplx F_nonpositive(double alpha, const CutPlanePoint& z);

/// Density of the first passage time of Brownian motion from 0 to level b.
double first_passage_density(double b, double w);

/// P(T_b <= delta) = erfc(b / sqrt(2 delta)).
double hit_probability(double b, double delta);

/// Transition density from 0 to y over time u of Brownian motion killed at b.
double killed_density(double b, double u, double y);

/// Free Gaussian transition density p(u, x, y).
double heat_density(double u, double x, double y);

}  // namespace parex

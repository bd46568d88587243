#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace parex {

/// Leading behaviour f(u) ~ c u^gamma at the origin.
enum class Sing { regular, sqrt, inv_sqrt };

double sing_exponent(Sing s);

/// Uniformly sampled function on [0, (N-1) step]. For Sing::inv_sqrt the
/// node-0 sample holds the coefficient c of u^(-1/2) instead of a value.
class GridFn {
public:
    GridFn() = default;
    GridFn(double step, std::vector<double> values, Sing sing0 = Sing::regular, bool decaying = false);

    /// The unit impulse at 0 (neutral element of convolution) on n nodes.
    static GridFn impulse(double step, std::size_t n);

    /// Samples f at nodes k*step, k = 0..N-1 with N = ceil(horizon/step) + 1.
    /// coef0 supplies node 0 when sing0 = inv_sqrt; node 0 is f(0) when
    /// regular and 0 when sqrt.
    static GridFn sample(const std::function<double(double)>& f, double horizon, double step,
                         Sing sing0 = Sing::regular, double coef0 = 0.0);

    double step() const { return step_; }
    std::size_t size() const { return values_.size(); }
    double horizon() const { return step_ * double(values_.size() - 1); }
    Sing sing0() const { return sing0_; }
    bool is_impulse() const { return impulse_; }
    bool decaying() const { return decaying_; }
    const std::vector<double>& values() const { return values_; }
    double node(std::size_t k) const { return values_.at(k); }

    /// Smooth factor f(u) / u^gamma at node k (node 0 extrapolated for sqrt).
    double smooth_factor(std::size_t k) const;

    /// Local cubic interpolation, applied to the smooth factor near the
    /// origin. Throws std::out_of_range beyond the support unless decaying.
    double operator()(double t) const;

private:
    double step_ = 0.0;
    std::vector<double> values_;
    Sing sing0_ = Sing::regular;
    bool decaying_ = false;
    bool impulse_ = false;
};

/// Endpoint-corrected trapezoid convolution (f*g)(k step) for all nodes
/// covered by both inputs. At most one input may carry Sing::inv_sqrt.
GridFn convolve(const GridFn& f, const GridFn& g);

/// Single node of convolve(f, g).
double convolve_at(const GridFn& f, const GridFn& g, std::size_t k);

/// Endpoint correction -sum_m zeta(-gamma-m) P^(m)(0)/m! h^(m+gamma+1) of
/// the interior-node trapezoid for x^gamma P(x), from samples P(0..3h).
double endpoint_correction(const std::array<double, 4>& P, double h, Sing tag);

/// Tag of convolve(f, g).
Sing convolved_sing(Sing a, Sing b);

/// nu^{*n} sampled on [0, horizon]; n = 0 gives the impulse. Cached.
std::shared_ptr<const GridFn> nu_nfold(int n, double horizon, double step);

/// Horizon at which cached nu^{*n} grids are built for a kernel reaching
/// `needed`; rounding up keeps the number of cached grids small.
double nu_horizon(double needed);

/// Number of horizon nodes used for a given horizon and step.
std::size_t grid_nodes(double horizon, double step);

/// chi_{|a+c|} * nu for c <= 0 and chi_{|a|} * g_c for c > 0, in
/// dimensionless time, without the sqrt(D) prefactor. Requires a <= 0.
GridFn rho_ac(double a, double c, double horizon, double step);

/// Pointwise value of rho_ac by direct quadrature of the convolution.
double rho_ac_value(double a, double c, double tau);

/// tau -> int_{-inf}^{b} phi_{b,delta}(x) erfc(|x - y| / (2 sqrt(D tau))) dx,
/// the Case II kernel, without the sqrt(D) prefactor.
GridFn rho_b_kernel(double b, double delta, double D, double y, double horizon, double step);

double rho_b_value(double b, double delta, double D, double y, double tau);

struct LayerKernel {
    GridFn rho;
    double scale = 1.0;
};

/// For each u: scale * sum_{1 <= n < u/D} (-1)^(n-1) (2 pi)^(-n/2)
/// (rho * nu^{*(n-1)})((u/D - n)/2).
std::vector<double> layer_sum(const LayerKernel& kernel, double D, const std::vector<double>& us);

/// Signed layer terms of layer_sum for one u (without scale), n = 1, 2, ...
std::vector<double> layer_terms(const LayerKernel& kernel, double D, double u);

}  // namespace parex

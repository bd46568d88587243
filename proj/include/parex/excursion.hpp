#pragma once

#include "parex/laplace.hpp"
#include "parex/quadrature.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace parex {

enum class Case { I, II };

/// Level b, minimal excursion duration D and, in Case II, the remaining
/// duration delta of the excursion in progress.
class ExcursionSpec {
public:
    ExcursionSpec(double b, double D, std::optional<double> delta = std::nullopt);

    double b() const { return b_; }
    double D() const { return D_; }
    /// delta in Case II, D in Case I.
    double delta() const { return delta_.value_or(D_); }
    std::optional<double> delta_opt() const { return delta_; }
    Case kind() const { return delta_ ? Case::II : Case::I; }
    double bstar() const;
    double beta(double y) const;
    std::string describe() const;

private:
    double b_, D_;
    std::optional<double> delta_;
};

bool operator==(const ExcursionSpec& a, const ExcursionSpec& b);

struct Numerics {
    double step = 0.0;  // grid step in dimensionless time; 0 selects min(D,1)/512, refined near the onset
    DeHoogOptions dehoog{};
    QuadTol w_tol{1e-14, 1e-10, 20};

    double grid_step(double D) const;
};

/// Case I density h(u, y) from the alternating layer sum; 0 for u <= D.
double density_case1(const ExcursionSpec& spec, double u, double y, const Numerics& num = {});

/// Which argument the killed density in the second closed form uses.
enum class H12Variant { printed, shifted };

struct ClosedFormTerms {
    double h11 = 0.0;
    double h12 = 0.0;
};

ClosedFormTerms closed_form_terms(const ExcursionSpec& spec, double u, double y,
                                  H12Variant variant = H12Variant::printed);

/// Case II layer terms with the first passage time integrated out.
double h_b21(const ExcursionSpec& spec, double u, double y, const Numerics& num = {});
double h_b22(const ExcursionSpec& spec, double u, double y, const Numerics& num = {});

struct Case2Parts {
    double h11 = 0.0, h12 = 0.0, h21 = 0.0, h22 = 0.0;
    double total() const { return h11 + h12 + h21 + h22; }
};

Case2Parts case2_parts(const ExcursionSpec& spec, double u, double y, H12Variant variant = H12Variant::printed,
                       const Numerics& num = {});

/// The full law: Case I layer sum, or the four-term Case II sum.
double density(const ExcursionSpec& spec, double u, double y, const Numerics& num = {},
               H12Variant variant = H12Variant::printed);

/// Independent route through numerical inversion of the transform quotients.
double density_case1_inversion(const ExcursionSpec& spec, double u, double y, const Numerics& num = {});
double h_b21_inversion(const ExcursionSpec& spec, double u, double y, const Numerics& num = {});
double h_b22_inversion(const ExcursionSpec& spec, double u, double y, const Numerics& num = {});
double density_inversion(const ExcursionSpec& spec, double u, double y, const Numerics& num = {},
                         H12Variant variant = H12Variant::printed);

/// P(H <= u) by integrating the density over y.
double achievement_cdf(const ExcursionSpec& spec, double u, const Numerics& num = {});

/// Case I P(H <= u) by inverting the CDF transform.
double achievement_cdf_inversion(const ExcursionSpec& spec, double u, const Numerics& num = {});

/// The law of (H, X_H) at time t given X_t = x_t, level a: (T, x) ->
/// density(spec(a - x_t), T - t, x - x_t), zero for T <= t.
std::function<double(double, double)> denormalize(double a, double t, double x_t, double D,
                                                  std::optional<double> delta = std::nullopt,
                                                  const Numerics& num = {});

enum class Method { analytic, inversion, mc };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct DensityGrid {
    ExcursionSpec spec{0.0, 1.0};
    Method method = Method::analytic;
    std::vector<double> us, ys;
    std::vector<double> values;  // row-major, u outer

    double at(std::size_t iu, std::size_t iy) const { return values.at(iu * ys.size() + iy); }
};

/// Fills the grid in parallel over (u, y); the result does not depend on the
/// number of threads.
DensityGrid density_grid(const ExcursionSpec& spec, const std::vector<double>& us, const std::vector<double>& ys,
                         Method method, const Numerics& num = {}, unsigned threads = 0);

/// Thread count from PAREX_THREADS, defaulting to the hardware concurrency.
unsigned default_threads();

}  // namespace parex

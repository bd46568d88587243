#pragma once

#include "parex/excursion.hpp"
#include "parex/report.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parex {

struct ResourceLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// adaptive: bridge-resolved blocks with the law of the dt skeleton;
/// uniform: plain dt stepping (the only engine without bridge correction).
enum class McEngine { adaptive, uniform };

struct McConfig {
    ExcursionSpec spec{0.0, 1.0};
    std::uint64_t paths = 100000;
    double dt = 1e-3;
    double T = 5.0;
    std::uint64_t seed = 42;
    bool bridge = true;
    McEngine engine = McEngine::adaptive;

    std::vector<double> probes;  // times u for the density histograms; empty means {T}
    double y_lo = -4.0, y_hi = 4.0;
    int y_bins = 40;
    int h_bins = 50;
    double wh_hi = 5.0;
    int wh_bins = 50;

    double budget = 1e11;  // cap on paths * T / dt
    unsigned threads = 0;  // 0: default_threads()

    void validate() const;
    std::vector<double> probe_times() const;
    std::int64_t steps(double t) const;  // t / dt rounded to the grid
};

struct Histogram {
    std::string kind;  // density, cdf, H, absWH
    double u = 0.0;    // probe time for density rows
    std::vector<double> lo, hi, estimate, stderr_;
};

struct McRun {
    McConfig cfg;
    std::uint64_t n_achieved = 0;  // H <= T
    std::vector<double> H, WH;     // achieved paths, in path order
    std::vector<double> WT;        // W(T) on {H <= T}
    std::vector<std::vector<double>> W_probe;  // W(u) on {H <= u}, per probe time
    std::vector<Histogram> hist;

    const Histogram* find(const std::string& kind, double u = 0.0) const;
    std::string bias_note() const;
};

/// Clock on a uniformly sampled path x[0..n] with step dt: a step is below
/// when both endpoints are strictly below b; H is the end of the first run
/// of below steps reaching D, with Case II starting at D - delta on the
/// clock. Returns std::nullopt if the path ends first.
std::optional<double> achievement_time_of_path(const std::vector<double>& x, double dt, const ExcursionSpec& spec);

/// Same clock with a per-step flag; bridge_ok[k] = false marks step k as
/// crossed between its endpoints even when both are below b.
std::optional<double> achievement_time_of_path(const std::vector<double>& x, const std::vector<bool>& bridge_ok,
                                               double dt, const ExcursionSpec& spec);

struct PathResult {
    std::optional<double> H;
    double WH = 0.0;
    std::vector<double> W;  // W at the probe times (NaN where H > u), then W(T)
};

/// One path with the stream keyed by (seed, index).
PathResult simulate_path(const McConfig& cfg, std::uint64_t index);

McRun run_mc(const McConfig& cfg);

/// Rebuilds the histograms from the stored samples.
void fill_histograms(McRun& run);

/// Kolmogorov-Smirnov distance between samples and a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic critical value of the KS distance at level alpha.
double ks_critical(std::size_t n, double alpha = 0.01);

double correlation(const std::vector<double>& a, const std::vector<double>& b);

struct CompareOptions {
    double z_warn = 3.0;
    double z_fail = 5.0;
    double max_warn_fraction = 0.01;
};

/// Per-bin z-scores of MC density bins against bin averages of the analytic
/// grid, plus the in-range probability mass per probe time.
VerificationReport compare(const DensityGrid& analytic, const McRun& mc, const CompareOptions& opt = {});

struct BinZ {
    double u, lo, hi, analytic, mc, se, z;
};

/// The per-bin detail behind compare().
std::vector<BinZ> compare_bins(const DensityGrid& analytic, const McRun& mc);

/// Average of the grid's row at u over [lo, hi] from the grid points,
/// with linear interpolation at edges that fall between points.
double grid_bin_average(const DensityGrid& g, std::size_t iu, double lo, double hi);

}  // namespace parex

#include "parex/mcsim.hpp"

#include "parex/specialfn.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace parex {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Path i draws from its own generator, so results do not depend on which
// thread runs it.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t index) : gen_(splitmix64(splitmix64(seed) ^ splitmix64(~index))) {}
    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }

private:
    std::mt19937_64 gen_;
    boost::random::normal_distribution<double> normal_;
    boost::random::uniform_01<double> uniform_;
};

struct ClockSteps {
    std::int64_t need = 0;  // below steps that make H
    std::int64_t init = 0;  // steps already on the clock at time 0
};

ClockSteps clock_steps(const ExcursionSpec& spec, double dt) {
    ClockSteps c;
    c.need = std::llround(spec.D() / dt);
    if (spec.kind() == Case::II) c.init = c.need - std::llround(spec.delta() / dt);
    if (c.need < 1 || c.init < 0 || c.init >= c.need) throw DomainError("clock: dt too coarse for D and delta");
    return c;
}

// Law of the dt skeleton with bridge correction, resolved in blocks. A block
// whose endpoints lie strictly on one side of b stays there with the
// continuous bridge probability, which equals the probability that none of
// its dt steps is flagged; only blocks containing a crossing are refined.
class AdaptiveWalker {
public:
    AdaptiveWalker(double b, double dt, ClockSteps c, PathRng& rng) : b_(b), dt_(dt), need_(c.need), run_(c.init), rng_(rng) {}

    bool done() const { return done_; }
    std::int64_t hit() const { return hit_; }
    double hit_x() const { return hit_x_; }

    std::int64_t block_length(double x, std::int64_t left) const {
        const double d = x - b_;
        double L = 0.5 * d * d / dt_;
        L = std::min(L, double(std::int64_t(1) << 30));
        std::int64_t n = std::max<std::int64_t>(1, std::int64_t(L));
        n = std::min(n, left);
        if (x < b_) n = std::min(n, need_ - run_);
        return n;
    }

    // Advances one top-level block from grid index k.
    double step(std::int64_t k, double x, std::int64_t len) {
        const double xe = x + std::sqrt(double(len) * dt_) * rng_.normal();
        const double p = pcross(x, xe, len);
        const bool crossed = p >= 1.0 || rng_.uniform() < p;
        block(k, k + len, x, xe, crossed);
        return xe;
    }

private:
    double pcross(double xa, double xb, std::int64_t len) const {
        const double d = (xa - b_) * (xb - b_);
        if (!(d > 0.0)) return 1.0;
        return std::exp(-2.0 * d / (double(len) * dt_));
    }

    double bridge(std::int64_t ka, std::int64_t m, std::int64_t kb, double xa, double xb) {
        const double w = double(m - ka) / double(kb - ka);
        const double var = dt_ * double(m - ka) * double(kb - m) / double(kb - ka);
        return xa + (xb - xa) * w + std::sqrt(var) * rng_.normal();
    }

    // Midpoint of a block known to stay on one side.
    double uncrossed_point(std::int64_t ka, std::int64_t m, std::int64_t kb, double xa, double xb) {
        for (int it = 0; it < 10000000; ++it) {
            const double xm = bridge(ka, m, kb, xa, xb);
            const double keep = (1.0 - pcross(xa, xm, m - ka)) * (1.0 - pcross(xm, xb, kb - m));
            if (rng_.uniform() < keep) return xm;
        }
        throw NumericalError("mcsim: conditioned bridge sampling did not terminate");
    }

    void block(std::int64_t ka, std::int64_t kb, double xa, double xb, bool crossed) {
        const std::int64_t len = kb - ka;
        if (!crossed) {
            if (!(xa < b_)) {
                run_ = 0;
                return;
            }
            if (run_ + len < need_) {
                run_ += len;
                return;
            }
            if (run_ + len == need_) {
                done_ = true;
                hit_ = kb;
                hit_x_ = xb;
                return;
            }
            const std::int64_t m = ka + (need_ - run_);
            block(ka, m, xa, uncrossed_point(ka, m, kb, xa, xb), false);
            return;
        }
        if (len == 1) {
            run_ = 0;
            return;
        }
        const std::int64_t m = ka + len / 2;
        double xm;
        bool c1, c2;
        const double p = pcross(xa, xb, len);
        if (p >= 1.0) {
            xm = bridge(ka, m, kb, xa, xb);
            const double p1 = pcross(xa, xm, m - ka), p2 = pcross(xm, xb, kb - m);
            c1 = p1 >= 1.0 || rng_.uniform() < p1;
            c2 = p2 >= 1.0 || rng_.uniform() < p2;
        } else {
            // Given a hit, reflecting the path after its first hit gives an
            // unconditioned bridge to 2b - xb.
            const double xr = bridge(ka, m, kb, xa, 2.0 * b_ - xb);
            const double p1 = pcross(xa, xr, m - ka);
            if (p1 >= 1.0 || rng_.uniform() < p1) {
                xm = 2.0 * b_ - xr;
                c1 = true;
                const double p2 = pcross(xm, xb, kb - m);
                c2 = p2 >= 1.0 || rng_.uniform() < p2;
            } else {
                xm = xr;
                c1 = false;
                c2 = true;
            }
        }
        block(ka, m, xa, xm, c1);
        if (done_) return;
        block(m, kb, xm, xb, c2);
    }

    double b_, dt_;
    std::int64_t need_, run_;
    PathRng& rng_;
    bool done_ = false;
    std::int64_t hit_ = -1;
    double hit_x_ = 0.0;
};

}  // namespace

void McConfig::validate() const {
    if (paths < 1) throw DomainError("McConfig: paths must be >= 1");
    if (!(dt > 0.0)) throw DomainError("McConfig: dt must be positive");
    if (dt > spec.D() / 100.0 * (1.0 + 1e-12)) throw DomainError("McConfig: dt must not exceed D/100");
    if (!(T > 0.0)) throw DomainError("McConfig: T must be positive");
    for (double u : probes)
        if (!(u > 0.0) || u > T) throw DomainError("McConfig: probe times must lie in (0, T]");
    if (!(y_lo < y_hi) || y_bins < 1) throw DomainError("McConfig: bad y histogram");
    if (h_bins < 1 || wh_bins < 1 || !(wh_hi > 0.0)) throw DomainError("McConfig: bad histogram");
    clock_steps(spec, dt);
}

std::vector<double> McConfig::probe_times() const {
    std::vector<double> p = probes.empty() ? std::vector<double>{T} : probes;
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
}

std::int64_t McConfig::steps(double t) const { return std::llround(t / dt); }

const Histogram* McRun::find(const std::string& kind, double u) const {
    for (const auto& h : hist)
        if (h.kind == kind && (kind != "density" || std::abs(h.u - u) <= 1e-9 * std::max(1.0, std::abs(u)))) return &h;
    return nullptr;
}

std::string McRun::bias_note() const {
    std::ostringstream os;
    os.precision(17);
    os << "dt=" << cfg.dt << " bridge=" << (cfg.bridge ? "on" : "off")
       << " engine=" << (cfg.bridge && cfg.engine == McEngine::adaptive ? "adaptive" : "uniform")
       << "; H is resolved to the dt grid";
    if (!cfg.bridge) os << "; restarts between grid points are missed";
    return os.str();
}

std::optional<double> achievement_time_of_path(const std::vector<double>& x, double dt, const ExcursionSpec& spec) {
    return achievement_time_of_path(x, std::vector<bool>(x.size() > 0 ? x.size() - 1 : 0, true), dt, spec);
}

std::optional<double> achievement_time_of_path(const std::vector<double>& x, const std::vector<bool>& bridge_ok,
                                               double dt, const ExcursionSpec& spec) {
    if (x.size() < 2) return std::nullopt;
    if (bridge_ok.size() + 1 != x.size()) throw DomainError("achievement_time_of_path: flag count mismatch");
    const ClockSteps c = clock_steps(spec, dt);
    const double b = spec.b();
    std::int64_t run = c.init;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        if (x[k] < b && x[k + 1] < b && bridge_ok[k]) {
            if (++run == c.need) return double(k + 1) * dt;
        } else {
            run = 0;
        }
    }
    return std::nullopt;
}

PathResult simulate_path(const McConfig& cfg, std::uint64_t index) {
    PathRng rng(cfg.seed, index);
    const ClockSteps c = clock_steps(cfg.spec, cfg.dt);
    const double b = cfg.spec.b(), dt = cfg.dt;
    const std::int64_t K = cfg.steps(cfg.T);
    std::int64_t hit = -1;
    double hit_x = 0.0;

    if (cfg.bridge && cfg.engine == McEngine::adaptive) {
        AdaptiveWalker walker(b, dt, c, rng);
        std::int64_t k = 0;
        double x = 0.0;
        while (k < K) {
            const std::int64_t len = walker.block_length(x, K - k);
            x = walker.step(k, x, len);
            if (walker.done()) {
                hit = walker.hit();
                hit_x = walker.hit_x();
                break;
            }
            k += len;
        }
    } else {
        const double sd = std::sqrt(dt);
        std::int64_t run = c.init;
        double x = 0.0;
        for (std::int64_t k = 0; k < K; ++k) {
            const double xn = x + sd * rng.normal();
            bool below = x < b && xn < b;
            if (below && cfg.bridge) below = !(rng.uniform() < std::exp(-2.0 * (b - x) * (b - xn) / dt));
            run = below ? run + 1 : 0;
            x = xn;
            if (run == c.need) {
                hit = k + 1;
                hit_x = x;
                break;
            }
        }
    }

    PathResult r;
    const auto probes = cfg.probe_times();
    r.W.assign(probes.size() + 1, kNaN);
    if (hit < 0) return r;
    r.H = double(hit) * dt;
    r.WH = hit_x;
    // After H the path is a free Brownian motion.
    double t = *r.H, w = hit_x;
    for (std::size_t j = 0; j <= probes.size(); ++j) {
        const double u = j < probes.size() ? probes[j] : cfg.T;
        if (u < *r.H) continue;
        w += std::sqrt(u - t) * rng.normal();
        t = u;
        r.W[j] = w;
    }
    return r;
}

McRun run_mc(const McConfig& cfg) {
    cfg.validate();
    if (double(cfg.paths) * cfg.T / cfg.dt > cfg.budget)
        throw ResourceLimitError("run_mc: paths * T / dt exceeds the budget");
    const auto probes = cfg.probe_times();
    const std::size_t np = probes.size() + 1;
    const std::uint64_t n = cfg.paths;
    std::vector<double> H(n, kNaN), WH(n, kNaN), W(n * np, kNaN);

    unsigned threads = cfg.threads ? cfg.threads : default_threads();
    threads = unsigned(std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads, n)));
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned tid) {
        try {
            const std::uint64_t lo = n * tid / threads, hi = n * (tid + 1) / threads;
            for (std::uint64_t i = lo; i < hi; ++i) {
                const PathResult r = simulate_path(cfg, i);
                if (r.H) {
                    H[i] = *r.H;
                    WH[i] = r.WH;
                }
                std::copy(r.W.begin(), r.W.end(), W.begin() + std::ptrdiff_t(i * np));
            }
        } catch (...) {
            errors[tid] = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    McRun run;
    run.cfg = cfg;
    run.W_probe.resize(probes.size());
    for (std::uint64_t i = 0; i < n; ++i) {
        if (std::isnan(H[i])) continue;
        ++run.n_achieved;
        run.H.push_back(H[i]);
        run.WH.push_back(WH[i]);
        for (std::size_t j = 0; j < probes.size(); ++j)
            if (!std::isnan(W[i * np + j])) run.W_probe[j].push_back(W[i * np + j]);
        run.WT.push_back(W[i * np + probes.size()]);
    }
    fill_histograms(run);
    return run;
}

namespace {

Histogram binned(const std::string& kind, const std::vector<double>& samples, double lo, double hi, int bins,
                 double total) {
    Histogram h;
    h.kind = kind;
    const double w = (hi - lo) / bins;
    std::vector<double> count(bins, 0.0);
    for (double s : samples) {
        if (!(s >= lo && s < hi)) continue;
        const int i = std::min(bins - 1, int((s - lo) / w));
        count[i] += 1.0;
    }
    for (int i = 0; i < bins; ++i) {
        const double p = total > 0.0 ? count[i] / total : 0.0;
        h.lo.push_back(lo + w * i);
        h.hi.push_back(i + 1 == bins ? hi : lo + w * (i + 1));
        h.estimate.push_back(p / w);
        h.stderr_.push_back(total > 0.0 ? std::sqrt(p * (1.0 - p) / total) / w : 0.0);
    }
    return h;
}

}  // namespace

void fill_histograms(McRun& run) {
    const McConfig& cfg = run.cfg;
    const double n = double(cfg.paths);
    const auto probes = cfg.probe_times();
    run.hist.clear();
    for (std::size_t j = 0; j < probes.size() && j < run.W_probe.size(); ++j) {
        Histogram h = binned("density", run.W_probe[j], cfg.y_lo, cfg.y_hi, cfg.y_bins, n);
        h.u = probes[j];
        run.hist.push_back(std::move(h));
    }

    std::vector<double> sorted = run.H;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> grid;
    for (int i = 1; i <= cfg.h_bins; ++i) grid.push_back(cfg.T * i / cfg.h_bins);
    grid.insert(grid.end(), probes.begin(), probes.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    Histogram cdf;
    cdf.kind = "cdf";
    for (double u : grid) {
        // H lives on the dt grid; a relative guard keeps u = k dt inclusive.
        const double edge = u * (1.0 + 1e-12);
        const double p = double(std::upper_bound(sorted.begin(), sorted.end(), edge) - sorted.begin()) / n;
        cdf.lo.push_back(0.0);
        cdf.hi.push_back(u);
        cdf.estimate.push_back(p);
        cdf.stderr_.push_back(std::sqrt(p * (1.0 - p) / n));
    }
    run.hist.push_back(std::move(cdf));

    run.hist.push_back(binned("H", run.H, 0.0, cfg.T * (1.0 + 1e-12), cfg.h_bins, n));
    std::vector<double> absw(run.WH.size());
    std::transform(run.WH.begin(), run.WH.end(), absw.begin(), [](double v) { return std::abs(v); });
    run.hist.push_back(binned("absWH", absw, 0.0, cfg.wh_hi, cfg.wh_bins, double(run.n_achieved)));
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("ks_statistic: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        d = std::max({d, F - double(i) / n, double(i + 1) / n - F});
    }
    return d;
}

double ks_critical(std::size_t n, double alpha) {
    if (n == 0) throw DomainError("ks_critical: n must be positive");
    return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(double(n));
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw DomainError("correlation: need matching samples");
    const double n = double(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

double grid_bin_average(const DensityGrid& g, std::size_t iu, double lo, double hi) {
    const auto& ys = g.ys;
    if (ys.size() < 2 || !(lo < hi) || lo < ys.front() - 1e-12 || hi > ys.back() + 1e-12)
        throw DomainError("grid_bin_average: bin outside the analytic y-range");
    auto value_at = [&](double y) {
        auto it = std::lower_bound(ys.begin(), ys.end(), y - 1e-12);
        std::size_t i = std::size_t(it - ys.begin());
        if (i < ys.size() && std::abs(ys[i] - y) <= 1e-12) return g.at(iu, i);
        i = std::min(std::max<std::size_t>(i, 1), ys.size() - 1);
        const double t = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
        return (1.0 - t) * g.at(iu, i - 1) + t * g.at(iu, i);
    };
    std::vector<double> x{lo}, f{value_at(lo)};
    for (std::size_t i = 0; i < ys.size(); ++i)
        if (ys[i] > lo + 1e-12 && ys[i] < hi - 1e-12) {
            x.push_back(ys[i]);
            f.push_back(g.at(iu, i));
        }
    x.push_back(hi);
    f.push_back(value_at(hi));

    const std::size_t m = x.size() - 1;
    bool uniform = m % 2 == 0;
    const double h = (hi - lo) / double(m);
    for (std::size_t i = 1; uniform && i <= m; ++i) uniform = std::abs(x[i] - x[i - 1] - h) <= 1e-9 * h;
    double s = 0.0;
    if (uniform) {
        for (std::size_t i = 0; i <= m; ++i) s += f[i] * (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0));
        s *= h / 3.0;
    } else {
        for (std::size_t i = 0; i < m; ++i) s += 0.5 * (f[i] + f[i + 1]) * (x[i + 1] - x[i]);
    }
    return s / (hi - lo);
}

std::vector<BinZ> compare_bins(const DensityGrid& analytic, const McRun& mc) {
    if (!(analytic.spec == mc.cfg.spec)) throw DomainError("compare: spec mismatch");
    const double n = double(mc.cfg.paths);
    std::vector<BinZ> out;
    for (const auto& h : mc.hist) {
        if (h.kind != "density") continue;
        std::size_t iu = analytic.us.size();
        for (std::size_t i = 0; i < analytic.us.size(); ++i)
            if (std::abs(analytic.us[i] - h.u) <= 1e-9 * std::max(1.0, h.u)) iu = i;
        if (iu == analytic.us.size()) throw DomainError("compare: analytic grid lacks a probe time");
        for (std::size_t k = 0; k < h.lo.size(); ++k) {
            const double w = h.hi[k] - h.lo[k];
            const double an = grid_bin_average(analytic, iu, h.lo[k], h.hi[k]);
            const double pa = std::clamp(an * w, 0.0, 1.0);
            const double se = std::max(h.stderr_[k], std::sqrt(pa * (1.0 - pa) / n) / w);
            const double diff = h.estimate[k] - an;
            const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
            out.push_back({h.u, h.lo[k], h.hi[k], an, h.estimate[k], se, z});
        }
    }
    return out;
}

VerificationReport compare(const DensityGrid& analytic, const McRun& mc, const CompareOptions& opt) {
    const auto bins = compare_bins(analytic, mc);
    VerificationReport rep;
    double zmax = 0.0;
    std::size_t warn = 0;
    for (const auto& b : bins) {
        zmax = std::max(zmax, std::abs(b.z));
        if (std::abs(b.z) > opt.z_warn) ++warn;
    }
    const double frac = bins.empty() ? 0.0 : double(warn) / double(bins.size());
    std::ostringstream note;
    note << bins.size() << " bins, " << warn << " beyond " << opt.z_warn << " sigma";
    rep.add("bins beyond 3 sigma (fraction)", frac, opt.max_warn_fraction, note.str());
    rep.add("max |z|", zmax, opt.z_fail);

    // In-range probability mass per probe time.
    const double n = double(mc.cfg.paths);
    std::vector<double> us;
    for (const auto& b : bins)
        if (us.empty() || us.back() != b.u) us.push_back(b.u);
    for (double u : us) {
        double pa = 0.0, pm = 0.0;
        for (const auto& b : bins)
            if (b.u == u) {
                pa += b.analytic * (b.hi - b.lo);
                pm += b.mc * (b.hi - b.lo);
            }
        const double p = std::clamp(std::max(pa, pm), 0.0, 1.0);
        const double se = std::sqrt(p * (1.0 - p) / n);
        const double z = se > 0.0 ? std::abs(pm - pa) / se : (pm == pa ? 0.0 : std::numeric_limits<double>::infinity());
        std::ostringstream name;
        name << "in-range mass z at u=" << u;
        std::ostringstream nt;
        nt.precision(6);
        nt << "analytic " << pa << " mc " << pm;
        rep.add(name.str(), z, opt.z_fail, nt.str());
    }
    return rep;
}

}  // namespace parex

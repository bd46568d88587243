// Command-line front end: density and CDF grids, verification suites,
// Monte Carlo runs and analytic-vs-MC comparison.
//
// Exit codes: 0 pass, 1 verification failure, 2 usage or spec error,
// 3 numerical failure.

#include "parex/csvio.hpp"
#include "parex/excursion.hpp"
#include "parex/mcsim.hpp"
#include "parex/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace parex;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpecFlags {
    double b = 0.0;
    double D = 1.0;
    std::optional<double> delta;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--b", b, "level b")->required();
        cmd->add_option("--D", D, "minimal excursion duration")->required();
        cmd->add_option("--delta", delta, "remaining duration of the excursion in progress (b > 0)");
    }
    ExcursionSpec spec() const { return ExcursionSpec(b, D, delta); }
    void record(KeyValues& kv) const {
        kv.set("b", format_real(b));
        kv.set("D", format_real(D));
        if (delta) kv.set("delta", format_real(*delta));
    }
};

ExcursionSpec spec_from_manifest(const KeyValues& kv) {
    std::optional<double> delta;
    if (kv.has("delta")) delta = parse_real(kv.get("delta"));
    return ExcursionSpec(parse_real(kv.get("b")), parse_real(kv.get("D")), delta);
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw UsageError("point count must be >= 1");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

// "2.5", "1:5:9" (start:stop:count) or "2,3,5".
std::vector<double> parse_times(const std::string& s) {
    if (s.empty()) throw UsageError("--u is required");
    std::vector<std::string> parts;
    std::string cur;
    const char sep = s.find(':') != std::string::npos ? ':' : ',';
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) parts.push_back(cur);
    try {
        if (sep == ':') {
            if (parts.size() != 3) throw UsageError("--u range must be start:stop:count");
            return linspace(parse_real(parts[0]), parse_real(parts[1]), std::stoi(parts[2]));
        }
        std::vector<double> v;
        for (const auto& p : parts) v.push_back(parse_real(p));
        return v;
    } catch (const DomainError& e) {
        throw UsageError(std::string("--u: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw UsageError("--u: bad count");
    }
}

// Writes the CSV body through `emit` to --out (or stdout) and the manifest
// beside it. The manifest is the only place timestamps appear.
template <class Emit>
void write_output(const std::string& out, KeyValues manifest, const std::string& started, Emit emit) {
    manifest.set("started", started);
    if (out.empty() || out == "-") {
        emit(std::cout);
        manifest.set("finished", utc_timestamp());
        std::ostringstream m;
        manifest.write(m);
        std::istringstream lines(m.str());
        for (std::string line; std::getline(lines, line);) std::cerr << "# " << line << '\n';
        return;
    }
    {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw UsageError("cannot write " + out);
        emit(f);
    }
    manifest.set("finished", utc_timestamp());
    std::ofstream m(manifest_path(out), std::ios::binary);
    if (!m) throw UsageError("cannot write " + manifest_path(out));
    manifest.write(m);
}

KeyValues base_manifest(const std::string& command) {
    KeyValues kv;
    kv.set("command", command);
    kv.set("version", kVersion);
    return kv;
}

// Config and manifest keys that describe a run rather than set a flag.
const std::set<std::string> kInformational{"command", "version", "started", "finished", "n_achieved", "paths_run"};
const std::set<std::string> kBooleans{"bridge"};

// Splices key=value pairs from --config FILE into the argument list; flags
// given on the command line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (!path) return out;
    if (out.empty()) throw UsageError("--config needs a subcommand");
    KeyValues kv;
    try {
        kv = KeyValues::load(*path);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    if (kv.has("command") && kv.get("command") != out[0])
        throw UsageError("config was written by '" + kv.get("command") + "', not '" + out[0] + "'");
    auto given = [&](const std::string& key) {
        for (const auto& a : out)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0 || (kBooleans.count(key) && a == "--no-" + key))
                return true;
        return false;
    };
    std::vector<std::string> extra;
    for (const auto& [k, v] : kv.items()) {
        if (kInformational.count(k) || given(k)) continue;
        if (k == "suite") {
            extra.push_back(v);
        } else if (kBooleans.count(k)) {
            if (v != "true" && v != "false") throw UsageError("config: " + k + " must be true or false");
            extra.push_back(v == "true" ? "--" + k : "--no-" + k);
        } else {
            extra.push_back("--" + k);
            extra.push_back(v);
        }
    }
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

int cmd_density(const SpecFlags& sf, const std::string& u, double ymin, double ymax, int ny,
                const std::string& method, double step, const std::string& out) {
    const std::string started = utc_timestamp();
    const ExcursionSpec spec = sf.spec();
    const Method m = method_from_string(method);
    if (m == Method::mc) throw UsageError("density: use the mc command for Monte Carlo");
    Numerics num;
    num.step = step;
    const DensityGrid g = density_grid(spec, parse_times(u), linspace(ymin, ymax, ny), m, num);

    KeyValues kv = base_manifest("density");
    sf.record(kv);
    kv.set("u", u);
    kv.set("ymin", format_real(ymin));
    kv.set("ymax", format_real(ymax));
    kv.set("ny", std::to_string(ny));
    kv.set("method", method);
    kv.set("step", format_real(step));
    if (!out.empty()) kv.set("out", out);
    write_output(out, kv, started, [&](std::ostream& os) { write_density_csv(os, g); });
    return kPass;
}

int cmd_cdf(const SpecFlags& sf, const std::string& u, const std::string& method, double step,
            const std::string& out) {
    const std::string started = utc_timestamp();
    const ExcursionSpec spec = sf.spec();
    const Method m = method_from_string(method);
    if (m == Method::mc) throw UsageError("cdf: use the mc command for Monte Carlo");
    Numerics num;
    num.step = step;
    const auto us = parse_times(u);
    std::vector<double> F;
    for (double t : us) {
        try {
            F.push_back(m == Method::analytic ? achievement_cdf(spec, t, num) : achievement_cdf_inversion(spec, t, num));
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " at u=" + format_real(t));
        }
    }
    KeyValues kv = base_manifest("cdf");
    sf.record(kv);
    kv.set("u", u);
    kv.set("method", method);
    kv.set("step", format_real(step));
    if (!out.empty()) kv.set("out", out);
    write_output(out, kv, started, [&](std::ostream& os) { write_cdf_csv(os, us, F); });
    return kPass;
}

int cmd_verify(const std::string& suite, std::optional<double> tol) {
    VerifyOptions opt;
    opt.tol = tol;
    if (suite != "all" && std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
        throw UsageError("unknown suite '" + suite + "'");
    const VerificationReport rep = run_suite(suite, opt);
    rep.print(std::cout);
    return rep.pass() ? kPass : kFail;
}

int cmd_mc(McConfig cfg, const SpecFlags& sf, const std::string& out) {
    const std::string started = utc_timestamp();
    cfg.spec = sf.spec();
    if (!cfg.bridge) cfg.engine = McEngine::uniform;
    const McRun run = run_mc(cfg);

    KeyValues kv = base_manifest("mc");
    sf.record(kv);
    kv.set("paths", std::to_string(cfg.paths));
    kv.set("dt", format_real(cfg.dt));
    kv.set("T", format_real(cfg.T));
    kv.set("seed", std::to_string(cfg.seed));
    kv.set("bridge", cfg.bridge ? "true" : "false");
    std::string probes;
    for (double p : cfg.probe_times()) probes += (probes.empty() ? "" : ",") + format_real(p);
    kv.set("probes", probes);
    kv.set("ymin", format_real(cfg.y_lo));
    kv.set("ymax", format_real(cfg.y_hi));
    kv.set("ybins", std::to_string(cfg.y_bins));
    kv.set("hbins", std::to_string(cfg.h_bins));
    kv.set("whmax", format_real(cfg.wh_hi));
    kv.set("whbins", std::to_string(cfg.wh_bins));
    kv.set("budget", format_real(cfg.budget));
    if (!out.empty()) kv.set("out", out);
    kv.set("n_achieved", std::to_string(run.n_achieved));
    write_output(out, kv, started, [&](std::ostream& os) { write_mc_csv(os, run.hist); });
    std::cerr << "achieved " << run.n_achieved << " of " << cfg.paths << " paths; " << run.bias_note() << '\n';
    return kPass;
}

KeyValues load_manifest_of(const std::string& file) {
    try {
        return KeyValues::load(manifest_path(file));
    } catch (const DomainError& e) {
        throw UsageError(std::string("manifest: ") + e.what());
    }
}

int cmd_compare(const std::string& analytic_file, const std::string& mc_file, CompareOptions opt,
                const std::string& out) {
    const KeyValues am = load_manifest_of(analytic_file);
    const KeyValues mm = load_manifest_of(mc_file);
    if (am.get_or("command", "") != "density") throw UsageError(analytic_file + " is not a density grid");
    if (mm.get_or("command", "") != "mc") throw UsageError(mc_file + " is not a Monte Carlo run");

    std::ifstream af(analytic_file), mf(mc_file);
    if (!af || !mf) throw UsageError("cannot open input files");
    DensityGrid g = read_density_csv(af);
    g.spec = spec_from_manifest(am);
    g.method = method_from_string(am.get("method"));
    McRun run;
    run.cfg.spec = spec_from_manifest(mm);
    if (!(g.spec == run.cfg.spec))
        throw UsageError("spec mismatch: " + g.spec.describe() + " vs " + run.cfg.spec.describe());
    run.cfg.paths = std::stoull(mm.get("paths"));
    run.cfg.T = parse_real(mm.get("T"));
    run.cfg.dt = parse_real(mm.get("dt"));
    run.cfg.bridge = mm.get("bridge") == "true";
    run.hist = read_mc_csv(mf);

    const auto bins = compare_bins(g, run);
    const VerificationReport rep = compare(g, run, opt);
    auto emit = [&](std::ostream& os) {
        os << "u,bin_lo,bin_hi,analytic,mc,stderr,z\n";
        for (const auto& b : bins)
            os << format_real(b.u) << ',' << format_real(b.lo) << ',' << format_real(b.hi) << ','
               << format_real(b.analytic) << ',' << format_real(b.mc) << ',' << format_real(b.se) << ','
               << format_real(b.z) << '\n';
    };
    if (out.empty()) {
        emit(std::cout);
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw UsageError("cannot write " + out);
        emit(f);
    }
    rep.print(std::cerr);
    std::cerr << (rep.pass() ? "PASS" : "FAIL") << " compare " << analytic_file << " vs " << mc_file
              << " (" << run.bias_note() << ")\n";
    return rep.pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parex: Parisian excursion law of Brownian motion"};
    app.require_subcommand(1);

    SpecFlags dspec;
    std::string du, dmethod = "analytic", dout;
    double ymin = -4.0, ymax = 4.0, dstep = 0.0;
    int ny = 81;
    auto* density = app.add_subcommand("density", "density h(u, y) on a grid");
    dspec.add_to(density);
    density->add_option("--u", du, "time: single value, start:stop:count, or a comma list")->required();
    density->add_option("--ymin", ymin);
    density->add_option("--ymax", ymax);
    density->add_option("--ny", ny);
    density->add_option("--method", dmethod)->check(CLI::IsMember({"analytic", "inversion"}));
    density->add_option("--step", dstep, "convolution grid step (0: default)");
    density->add_option("--out", dout, "output CSV (default stdout)");

    SpecFlags cspec;
    std::string cu, cmethod = "analytic", cout_;
    double cstep = 0.0;
    auto* cdf = app.add_subcommand("cdf", "P(H <= u)");
    cspec.add_to(cdf);
    cdf->add_option("--u", cu)->required();
    cdf->add_option("--method", cmethod)->check(CLI::IsMember({"analytic", "inversion"}));
    cdf->add_option("--step", cstep);
    cdf->add_option("--out", cout_);

    std::string suite = "all";
    std::optional<double> vtol;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite, "identities|pairs|inversion|series|all");
    verify->add_option("--tol", vtol, "replace every tolerance of the suite");

    SpecFlags mspec;
    McConfig mcfg;
    std::string mout;
    auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of the law");
    mspec.add_to(mc);
    mc->add_option("--paths", mcfg.paths)->required();
    mc->add_option("--dt", mcfg.dt)->required();
    mc->add_option("--T", mcfg.T)->required();
    mc->add_option("--seed", mcfg.seed)->required();
    mc->add_flag("--bridge,!--no-bridge", mcfg.bridge, "Brownian bridge crossing correction");
    mc->add_option("--probes", mcfg.probes, "density probe times (default T)")->delimiter(',');
    mc->add_option("--ymin", mcfg.y_lo);
    mc->add_option("--ymax", mcfg.y_hi);
    mc->add_option("--ybins", mcfg.y_bins);
    mc->add_option("--hbins", mcfg.h_bins);
    mc->add_option("--whmax", mcfg.wh_hi);
    mc->add_option("--whbins", mcfg.wh_bins);
    mc->add_option("--budget", mcfg.budget, "cap on paths*T/dt");
    mc->add_option("--out", mout);
    mcfg.bridge = false;

    std::string ca, cm, cmp_out;
    CompareOptions copt;
    auto* compare_cmd = app.add_subcommand("compare", "per-bin z-scores of an MC run against a density grid");
    compare_cmd->add_option("analytic", ca)->required();
    compare_cmd->add_option("mc", cm)->required();
    compare_cmd->add_option("--zwarn", copt.z_warn);
    compare_cmd->add_option("--zfail", copt.z_fail);
    compare_cmd->add_option("--max-fraction", copt.max_warn_fraction);
    compare_cmd->add_option("--out", cmp_out, "per-bin CSV (default stdout)");

    app.footer("Any subcommand accepts --config FILE with key=value lines named after its flags;\n"
               "a manifest written beside an output file reproduces it. PAREX_THREADS sets the thread count.");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        if (std::find(args.begin(), args.end(), "--help") == args.end() &&
            std::find(args.begin(), args.end(), "-h") == args.end())
            args = expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*density) return cmd_density(dspec, du, ymin, ymax, ny, dmethod, dstep, dout);
        if (*cdf) return cmd_cdf(cspec, cu, cmethod, cstep, cout_);
        if (*verify) return cmd_verify(suite, vtol);
        if (*mc) return cmd_mc(mcfg, mspec, mout);
        if (*compare_cmd) return cmd_compare(ca, cm, copt, cmp_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ResourceLimitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}

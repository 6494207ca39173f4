// occtime_cli: CSV front end for the occupation-time library.
//
//   occtime_cli <command> --model PATH [flags]
//
// Exit status: 0 ok, 2 invalid input, 3 numerical failure, 4 I/O failure.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "occtime/occtime.hpp"

namespace {

using namespace occtime;

constexpr int kExitOk = 0, kExitValidation = 2, kExitNumerical = 3, kExitIo = 4;

struct Grid {
    double start = 0.0, stop = 0.0;
    std::size_t count = 1;

    std::vector<double> points() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(count == 1 ? start : start + (stop - start) * double(i) / double(count - 1));
        return out;
    }
};

Grid parse_grid(const std::string& text, const char* flag) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
    if (parts.size() != 3) throw ValidationError(std::string(flag) + " expects START,STOP,COUNT");
    Grid g;
    try {
        g.start = std::stod(parts[0]);
        g.stop = std::stod(parts[1]);
        const long n = std::stol(parts[2]);
        if (n < 1) throw ValidationError(std::string(flag) + " COUNT must be at least 1");
        g.count = std::size_t(n);
    } catch (const std::logic_error&) {
        throw ValidationError(std::string(flag) + ": cannot parse '" + text + "'");
    }
    if (!std::isfinite(g.start) || !std::isfinite(g.stop)) throw ValidationError(std::string(flag) + " must be finite");
    return g;
}

/// Rows of a CSV table, written with the classic locale at full precision.
class Csv {
public:
    explicit Csv(std::vector<std::string> header) {
        os_.imbue(std::locale::classic());
        os_ << std::setprecision(17);
        row_strings(header);
    }

    template <class... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cells, first = false), ...);
        os_ << '\n';
    }

    void write(const std::string& path) const {
        if (path.empty() || path == "-") {
            std::cout << os_.str() << std::flush;
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open output file '" + path + "'");
        out << os_.str();
        if (!out) throw IoError("failed writing output file '" + path + "'");
    }

private:
    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
        os_ << '\n';
    }
    std::ostringstream os_;
};

struct Options {
    std::string model_path;
    std::string out;
    double q = 1.0, p = 0.0, b = 0.0;
    std::optional<double> y;
    double x = 0.0;
    std::string x_grid = "0,0,1";
    std::string y_grid;
    double t = 1.0;
    int terms = kDefaultStehfestTerms;
    std::size_t paths = 100000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool strict_roots = false;
    bool fixed_horizon = false;
    std::string side = "below";
    // step option
    double spot = 1.0, strike = 1.0, rate = 0.0, rho = 0.0;
    std::string payoff = "call";
};

RootPolicy policy(const Options& o) { return o.strict_roots ? RootPolicy::Strict : RootPolicy::Perturb; }

double level_y(const Options& o) {
    const double y = o.y.value_or(o.b);
    if (!(y >= o.b)) throw ValidationError("--y must satisfy y >= b");
    return y;
}

void require_rates(const Options& o, bool positive_p) {
    if (!(o.q > 0.0)) throw ValidationError("--q must be positive");
    if (positive_p ? !(o.p > 0.0) : !(o.p > -o.q))
        throw ValidationError(positive_p ? "--p must be positive" : "--p must satisfy p > -q");
}

OccupationSide parse_side(const std::string& s) {
    if (s == "below") return OccupationSide::Below;
    if (s == "above") return OccupationSide::Above;
    throw ValidationError("--side must be 'below' or 'above'");
}

void cmd_roots(const Options& o) {
    if (!(o.q > 0.0)) throw ValidationError("--q must be positive");
    const LaplaceExponent psi(load_model(o.model_path));
    const RootSystem rs = solve_roots(psi, o.q, policy(o));
    Csv csv({"kind", "re", "im"});
    for (const auto& r : rs.betas) csv.row("beta", r.real(), r.imag());
    for (const auto& r : rs.gammas) csv.row("gamma", r.real(), r.imag());
    csv.write(o.out);
}

void cmd_factors(const Options& o) {
    if (!(o.q > 0.0)) throw ValidationError("--q must be positive");
    const LaplaceExponent psi(load_model(o.model_path));
    const auto f = factors_at(psi, o.q, policy(o));
    Csv csv({"kind", "index", "root_re", "root_im", "coef_re", "coef_im"});
    for (std::size_t k = 0; k < f.betas().size(); ++k)
        csv.row("C", k + 1, f.betas()[k].real(), f.betas()[k].imag(), f.C()[k].real(), f.C()[k].imag());
    for (std::size_t k = 0; k < f.gammas().size(); ++k)
        csv.row("D", k + 1, f.gammas()[k].real(), f.gammas()[k].imag(), f.D()[k].real(), f.D()[k].imag());
    csv.write(o.out);
}

void cmd_vq(const Options& o) {
    require_rates(o, false);
    const double y = level_y(o);
    const OccupationEngine eng(load_model(o.model_path), policy(o));
    const auto sol = eng.solve(o.q, o.p, o.b, y);
    Csv csv({"x", "v_q"});
    for (double x : parse_grid(o.x_grid, "--x-grid").points()) csv.row(x, sol(x));
    csv.write(o.out);
}

void cmd_density(const Options& o) {
    require_rates(o, true);
    if (o.y_grid.empty()) throw ValidationError("density needs --y-grid");
    const OccupationEngine eng(load_model(o.model_path), policy(o));
    const OccupationSide side = parse_side(o.side);
    Csv csv({"y", "density"});
    for (double y : parse_grid(o.y_grid, "--y-grid").points()) csv.row(y, eng.joint_density(o.x, o.b, y, o.p, o.q, side));
    csv.write(o.out);
}

void cmd_sn_density(const Options& o) {
    require_rates(o, true);
    if (o.y_grid.empty()) throw ValidationError("sn-density needs --y-grid");
    const ScaleEngine eng{SpectrallyNegativeModel(load_model(o.model_path)), policy(o)};
    const auto k = eng.kernels(o.q, o.p);
    Csv csv({"y", "density"});
    for (double y : parse_grid(o.y_grid, "--y-grid").points())
        csv.row(y, ScaleEngine::joint_density(k, o.x, o.b, y));
    csv.write(o.out);
}

void cmd_fixed_time(const Options& o) {
    if (!(o.p >= 0.0)) throw ValidationError("--p must be nonnegative");
    if (!(o.t > 0.0)) throw ValidationError("--t must be positive");
    const double y = level_y(o);
    const OccupationEngine eng(load_model(o.model_path), policy(o));
    Csv csv({"x", "t", "value"});
    for (double x : parse_grid(o.x_grid, "--x-grid").points())
        csv.row(x, o.t, fixed_time_expectation(eng, x, o.b, y, o.p, o.t, o.terms));
    csv.write(o.out);
}

void cmd_mc(const Options& o) {
    const RationalJumpModel model = load_model(o.model_path);
    SimConfig cfg;
    cfg.n_paths = o.paths;
    cfg.dt = o.dt;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    if (o.fixed_horizon) {
        if (!(o.t > 0.0)) throw ValidationError("--t must be positive");
        cfg.horizon = Horizon::fixed(o.t);
    } else {
        if (!(o.q > 0.0)) throw ValidationError("--q must be positive");
        cfg.horizon = Horizon::exponential(o.q);
    }
    if (!(o.p >= 0.0)) throw ValidationError("--p must be nonnegative");
    McRequest req;
    req.b = o.b;
    req.p = o.p;
    if (!o.y_grid.empty()) {
        req.xs = {o.x};
        req.bin_edges = parse_grid(o.y_grid, "--y-grid").points();
        const auto res = simulate(model, req, cfg);
        Csv csv({"bin_lo", "bin_hi", "mc_mass", "mc_stderr"});
        for (const auto& bin : res.base.histogram[0]) csv.row(bin.lo, bin.hi, bin.mass.mean, bin.mass.std_error);
        csv.write(o.out);
        return;
    }
    req.xs = parse_grid(o.x_grid, "--x-grid").points();
    req.y = level_y(o);
    const auto res = simulate(model, req, cfg);
    Csv csv({"x", "mc_mean", "mc_stderr", "n_paths"});
    for (std::size_t i = 0; i < req.xs.size(); ++i)
        csv.row(req.xs[i], res.base.functional[i].mean, res.base.functional[i].std_error,
                res.base.functional[i].n_effective);
    csv.write(o.out);
}

void cmd_price_step(const Options& o) {
    StepOptionSpec spec;
    spec.spot = o.spot;
    spec.strike = o.strike;
    spec.maturity = o.t;
    spec.rate = o.rate;
    spec.rho = o.rho;
    spec.barrier = o.b;
    spec.payoff = parse_payoff(o.payoff);
    spec.terms = o.terms;
    const OccupationEngine eng(load_model(o.model_path), policy(o));
    const double price = price_step_option(eng, spec);
    Csv csv({"payoff", "spot", "strike", "maturity", "rate", "rho", "b", "price"});
    csv.row(o.payoff, o.spot, o.strike, o.t, o.rate, o.rho, o.b, price);
    csv.write(o.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Occupation-time functionals of rational-jump diffusions"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--model", o.model_path, "JSON model file")->required();
        cmd->add_option("--out", o.out, "output CSV path (default: stdout)");
        cmd->add_flag("--strict-roots", o.strict_roots, "fail on near-multiple roots instead of perturbing q");
    };
    auto add_rates = [&](CLI::App* cmd) {
        cmd->add_option("--q", o.q, "killing rate q > 0");
        cmd->add_option("--p", o.p, "occupation weight p");
        cmd->add_option("--b", o.b, "occupation level b");
    };

    auto* roots = app.add_subcommand("roots", "roots of psi(s) = q");
    add_common(roots);
    roots->add_option("--q", o.q, "killing rate q > 0");

    auto* fac = app.add_subcommand("factors", "Wiener-Hopf coefficients C and D");
    add_common(fac);
    fac->add_option("--q", o.q, "killing rate q > 0");

    auto* vq = app.add_subcommand("vq", "E_x[exp(-p A) 1{X > y}] at an exponential horizon");
    add_common(vq);
    add_rates(vq);
    vq->add_option("--y", o.y, "threshold y >= b (default b)");
    vq->add_option("--x-grid", o.x_grid, "start points START,STOP,COUNT");

    auto* dens = app.add_subcommand("density", "joint density in y at an exponential horizon");
    add_common(dens);
    add_rates(dens);
    dens->add_option("--x", o.x, "start point");
    dens->add_option("--y-grid", o.y_grid, "end points START,STOP,COUNT")->required();
    dens->add_option("--side", o.side, "weight on time 'below' or 'above' b");

    auto* sn = app.add_subcommand("sn-density", "joint density via scale functions (no up-jumps)");
    add_common(sn);
    add_rates(sn);
    sn->add_option("--x", o.x, "start point");
    sn->add_option("--y-grid", o.y_grid, "end points START,STOP,COUNT")->required();

    auto* ft = app.add_subcommand("fixed-time", "E_x[exp(-p A_t) 1{X_t > y}] by Laplace inversion");
    add_common(ft);
    ft->add_option("--p", o.p, "occupation weight p >= 0");
    ft->add_option("--b", o.b, "occupation level b");
    ft->add_option("--y", o.y, "threshold y >= b (default b)");
    ft->add_option("--t", o.t, "horizon t > 0");
    ft->add_option("--terms", o.terms, "Gaver-Stehfest terms (even, 8..20)");
    ft->add_option("--x-grid", o.x_grid, "start points START,STOP,COUNT");

    auto* mc = app.add_subcommand("mc", "Monte Carlo estimates");
    add_common(mc);
    add_rates(mc);
    mc->add_option("--y", o.y, "threshold y >= b (default b)");
    mc->add_option("--x", o.x, "start point for --y-grid histograms");
    mc->add_option("--x-grid", o.x_grid, "start points START,STOP,COUNT");
    mc->add_option("--y-grid", o.y_grid, "histogram edges START,STOP,COUNT");
    mc->add_option("--t", o.t, "fixed horizon (with --fixed-horizon)");
    mc->add_flag("--fixed-horizon", o.fixed_horizon, "simulate to time t instead of e(q)");
    mc->add_option("--paths", o.paths, "number of paths");
    mc->add_option("--dt", o.dt, "time step (<= 1e-2)");
    mc->add_option("--seed", o.seed, "64-bit seed");
    mc->add_option("--threads", o.threads, "worker threads");

    auto* price = app.add_subcommand("price-step", "step option price");
    add_common(price);
    price->add_option("--spot", o.spot, "spot price S_0");
    price->add_option("--strike", o.strike, "strike K");
    price->add_option("--t", o.t, "maturity T");
    price->add_option("--rate", o.rate, "discount rate r");
    price->add_option("--rho", o.rho, "occupation penalty rho >= 0");
    price->add_option("--b", o.b, "log-price level b");
    price->add_option("--payoff", o.payoff, "call, put or digital");
    price->add_option("--terms", o.terms, "Gaver-Stehfest terms (even, 8..20)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*roots) cmd_roots(o);
        else if (*fac) cmd_factors(o);
        else if (*vq) cmd_vq(o);
        else if (*dens) cmd_density(o);
        else if (*sn) cmd_sn_density(o);
        else if (*ft) cmd_fixed_time(o);
        else if (*mc) cmd_mc(o);
        else if (*price) cmd_price_step(o);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

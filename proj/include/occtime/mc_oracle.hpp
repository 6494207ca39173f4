#pragma once

// Monte Carlo for rational-jump diffusions at an exponential or fixed horizon.
//
// Path values on the time grid are exact (Gaussian increments plus the compound Poisson
// jumps that fall in each step); only the occupation integral is a grid approximation,
// by the trapezoid rule on the indicator. Paths are generated from a counter-based
// Philox4x32-10 stream keyed by (seed, path index), in fixed-size blocks that are
// reduced in block order, so results are identical for any thread count.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

#include "occtime/errors.hpp"
#include "occtime/model.hpp"

namespace occtime {

/// Philox4x32-10 (Salmon et al.), one 128-bit block per call.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * ctr[2];
            ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
                   std::uint32_t(p0)};
        }
        return ctr;
    }
};

/// Random stream of one path: key = seed, counter = (path index, draw index).
class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t path)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, path_(path) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        if (pos_ == 2) refill();
        return buf_[pos_++];
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double th = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(th);
        has_spare_ = true;
        return r * std::cos(th);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    void refill() {
        const auto out = Philox4x32::generate(
            {std::uint32_t(path_), std::uint32_t(path_ >> 32), std::uint32_t(draw_), std::uint32_t(draw_ >> 32)}, key_);
        ++draw_;
        for (int i = 0; i < 2; ++i) {
            const std::uint64_t bits = ((std::uint64_t(out[2 * i]) << 32) | out[2 * i + 1]) >> 11;
            buf_[i] = (double(bits) + 0.5) * 0x1p-53;
        }
        pos_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t path_;
    std::uint64_t draw_ = 0;
    std::array<double, 2> buf_{};
    int pos_ = 2;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct Horizon {
    enum class Kind { Fixed, Exponential };
    Kind kind = Kind::Exponential;
    double value = 1.0;  // t for Fixed, q for Exponential

    static Horizon fixed(double t) { return {Kind::Fixed, t}; }
    static Horizon exponential(double q) { return {Kind::Exponential, q}; }
};

struct SimConfig {
    std::size_t n_paths = 100000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    Horizon horizon;
    unsigned threads = 1;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_effective = 0;
};

struct HistogramBin {
    double lo = 0.0, hi = 0.0;  // the first and last bins extend to -inf and +inf
    McEstimate mass;
};

/// Everything one batch of shared paths estimates. Start points differ only by a shift.
struct McRequest {
    std::vector<double> xs{0.0};
    double b = 0.0;
    double y = -std::numeric_limits<double>::infinity();  // functional uses 1{X_T > y}
    double p = 0.0;
    std::vector<double> bin_edges;  // empty: no histogram
    bool coupled_halving = false;   // also estimate at step dt/2 on the same paths
};

struct McGridResult {
    std::vector<McEstimate> functional;                // per x: E[w 1{X_T > y}]
    std::vector<McEstimate> occupation_lt;             // per x: E[w]
    std::vector<std::vector<HistogramBin>> histogram;  // per x
};

struct McResult {
    McGridResult base;  // step dt
    McGridResult fine;  // step dt / 2, filled when coupled_halving
};

namespace detail {

/// Sampler for one side's mixed-Erlang jump sizes; rejection from |weights| when some are negative.
class JumpSizeSampler {
public:
    JumpSizeSampler() = default;
    explicit JumpSizeSampler(const std::vector<ErlangComponent>& comps) : comps_(comps) {
        for (const auto& c : comps)
            for (std::size_t j = 0; j < c.weights.size(); ++j) {
                cum_.push_back((cum_.empty() ? 0.0 : cum_.back()) + std::abs(c.weights[j]));
                negative_ = negative_ || c.weights[j] < 0.0;
            }
    }

    double sample(PathStream& rng) const {
        for (;;) {
            const double u = rng.uniform() * cum_.back();
            std::size_t idx = std::size_t(std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
            idx = std::min(idx, cum_.size() - 1);
            std::size_t flat = 0, comp = 0, order = 0;
            for (comp = 0; comp < comps_.size(); ++comp) {
                if (idx < flat + comps_[comp].weights.size()) {
                    order = idx - flat + 1;
                    break;
                }
                flat += comps_[comp].weights.size();
            }
            double prod = 1.0;
            for (std::size_t i = 0; i < order; ++i) prod *= rng.uniform();
            const double z = -std::log(prod) / comps_[comp].rate;
            if (!negative_) return z;
            const double target = erlang_mixture_density(comps_, z);
            double envelope = 0.0;
            for (const auto& c : comps_) {
                double term = c.rate * std::exp(-c.rate * z);
                for (std::size_t j = 0; j < c.weights.size(); ++j) {
                    envelope += std::abs(c.weights[j]) * term;
                    term *= c.rate * z / double(j + 1);
                }
            }
            if (rng.uniform() * envelope <= target) return z;
        }
    }

private:
    std::vector<ErlangComponent> comps_;
    std::vector<double> cum_;
    bool negative_ = false;
};

struct Accumulator {
    double sum = 0.0, sum_sq = 0.0;
    void add(double v) {
        sum += v;
        sum_sq += v * v;
    }
    void merge(const Accumulator& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    McEstimate estimate(std::size_t n) const {
        McEstimate e;
        e.n_effective = n;
        e.mean = sum / double(n);
        if (n > 1) {
            const double var = std::max(0.0, (sum_sq - sum * e.mean) / double(n - 1));
            e.std_error = std::sqrt(var / double(n));
        }
        return e;
    }
};

/// Accumulators for one grid: [x][0] functional, [x][1] occupation_lt, [x][2 + k] bin k.
using GridAccumulators = std::vector<std::vector<Accumulator>>;

inline constexpr std::size_t kPathBlock = 4096;

}  // namespace detail

/// Simulates shared paths for all start points in the request.
inline McResult simulate(const RationalJumpModel& model_in, const McRequest& req, const SimConfig& cfg) {
    const RationalJumpModel model = normalized(model_in);
    if (cfg.n_paths < 1) throw ValidationError("n_paths must be at least 1");
    if (!(cfg.dt > 0.0) || cfg.dt > 1e-2) throw ValidationError("dt must lie in (0, 1e-2]");
    if (!(cfg.horizon.value > 0.0)) throw ValidationError("horizon parameter must be positive");
    if (req.xs.empty()) throw ValidationError("at least one start point is required");
    if (!std::is_sorted(req.bin_edges.begin(), req.bin_edges.end()))
        throw ValidationError("histogram edges must be increasing");

    const std::size_t nx = req.xs.size();
    const std::size_t nbins = req.bin_edges.empty() ? 0 : req.bin_edges.size() + 1;
    const std::size_t nacc = 2 + nbins;
    const bool halving = req.coupled_halving;
    const double h = halving ? 0.5 * cfg.dt : cfg.dt;
    const double drift_h = model.mu * h, vol_h = model.sigma * std::sqrt(h);
    const double lam_up = model.up.empty() ? 0.0 : model.lambda_plus;
    const double lam_dn = model.down.empty() ? 0.0 : model.lambda_minus;
    const double lam = lam_up + lam_dn;
    const detail::JumpSizeSampler up_sampler = model.up.empty() ? detail::JumpSizeSampler() : detail::JumpSizeSampler(model.up);
    const detail::JumpSizeSampler dn_sampler =
        model.down.empty() ? detail::JumpSizeSampler() : detail::JumpSizeSampler(model.down);

    std::vector<double> thresholds(nx);  // X^0 <= b - x
    for (std::size_t i = 0; i < nx; ++i) thresholds[i] = req.b - req.xs[i];

    const std::size_t nblocks = (cfg.n_paths + detail::kPathBlock - 1) / detail::kPathBlock;
    const std::size_t ngrids = halving ? 2 : 1;
    // results[block][grid][x][acc]
    std::vector<std::vector<detail::GridAccumulators>> results(
        nblocks, std::vector<detail::GridAccumulators>(ngrids, detail::GridAccumulators(nx, std::vector<detail::Accumulator>(nacc))));

    auto record = [&](detail::GridAccumulators& acc, const std::vector<double>& occ, double XT) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double w = std::exp(-req.p * occ[i]);
            const double y_end = req.xs[i] + XT;
            acc[i][0].add(y_end > req.y ? w : 0.0);
            acc[i][1].add(w);
            if (nbins > 0) {
                const std::size_t bin =
                    std::size_t(std::upper_bound(req.bin_edges.begin(), req.bin_edges.end(), y_end) - req.bin_edges.begin());
                for (std::size_t k = 0; k < nbins; ++k) acc[i][2 + k].add(k == bin ? w : 0.0);
            }
        }
    };

    auto run_block = [&](std::size_t blk) {
        auto& out = results[blk];
        std::vector<double> occ_f(nx), occ_c(nx);
        std::vector<char> ind_f(nx), ind_c(nx);
        const std::size_t first = blk * detail::kPathBlock;
        const std::size_t last = std::min(cfg.n_paths, first + detail::kPathBlock);
        for (std::size_t path = first; path < last; ++path) {
            PathStream rng(cfg.seed, path);
            const double T = cfg.horizon.kind == Horizon::Kind::Fixed ? cfg.horizon.value
                                                                      : rng.exponential(cfg.horizon.value);
            double next_jump = lam > 0.0 ? rng.exponential(lam) : std::numeric_limits<double>::infinity();
            double X = 0.0;
            for (std::size_t i = 0; i < nx; ++i) {
                ind_f[i] = ind_c[i] = 0.0 <= thresholds[i];
                occ_f[i] = occ_c[i] = 0.0;
            }
            const auto K = std::uint64_t(std::floor(T / h));
            double t_prev = 0.0, t_coarse = 0.0;
            for (std::uint64_t k = 1; k <= K + 1; ++k) {
                const bool final_step = k == K + 1;
                const double t = final_step ? T : double(k) * h;
                const double step = t - t_prev;
                if (final_step) {
                    if (step > 0.0) X += model.mu * step + model.sigma * std::sqrt(step) * rng.normal();
                } else {
                    X += drift_h + vol_h * rng.normal();
                }
                while (next_jump <= t) {
                    const bool up = lam_dn == 0.0 || (lam_up > 0.0 && rng.uniform() * lam < lam_up);
                    X += up ? up_sampler.sample(rng) : -dn_sampler.sample(rng);
                    next_jump += rng.exponential(lam);
                }
                const bool coarse_node = halving && (final_step || k % 2 == 0);
                for (std::size_t i = 0; i < nx; ++i) {
                    const char ind = X <= thresholds[i];
                    occ_f[i] += 0.5 * double(ind_f[i] + ind) * step;
                    ind_f[i] = ind;
                    if (coarse_node) {
                        occ_c[i] += 0.5 * double(ind_c[i] + ind) * (t - t_coarse);
                        ind_c[i] = ind;
                    }
                }
                if (coarse_node) t_coarse = t;
                t_prev = t;
            }
            if (halving) {
                record(out[0], occ_c, X);
                record(out[1], occ_f, X);
            } else {
                record(out[0], occ_f, X);
            }
        }
    };

    const unsigned nthreads = std::max(1u, std::min<unsigned>(cfg.threads, unsigned(nblocks)));
    if (nthreads == 1) {
        for (std::size_t blk = 0; blk < nblocks; ++blk) run_block(blk);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < nthreads; ++w)
            pool.emplace_back([&] {
                for (std::size_t blk = next++; blk < nblocks; blk = next++) run_block(blk);
            });
        for (auto& th : pool) th.join();
    }

    auto reduce = [&](std::size_t grid) {
        detail::GridAccumulators total(nx, std::vector<detail::Accumulator>(nacc));
        for (std::size_t blk = 0; blk < nblocks; ++blk)
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t a = 0; a < nacc; ++a) total[i][a].merge(results[blk][grid][i][a]);
        McGridResult r;
        for (std::size_t i = 0; i < nx; ++i) {
            r.functional.push_back(total[i][0].estimate(cfg.n_paths));
            r.occupation_lt.push_back(total[i][1].estimate(cfg.n_paths));
            std::vector<HistogramBin> bins;
            for (std::size_t k = 0; k < nbins; ++k) {
                HistogramBin bin;
                bin.lo = k == 0 ? -std::numeric_limits<double>::infinity() : req.bin_edges[k - 1];
                bin.hi = k + 1 == nbins ? std::numeric_limits<double>::infinity() : req.bin_edges[k];
                bin.mass = total[i][2 + k].estimate(cfg.n_paths);
                bins.push_back(bin);
            }
            r.histogram.push_back(std::move(bins));
        }
        return r;
    };

    McResult res;
    res.base = reduce(0);
    if (halving) res.fine = reduce(1);
    return res;
}

/// E_x[exp(-p int_0^T 1{X_s <= b} ds) 1{X_T > y}] at the configured horizon.
inline McEstimate simulate_functional(const RationalJumpModel& model, double x, double b, double y, double p,
                                      const SimConfig& cfg) {
    McRequest req;
    req.xs = {x};
    req.b = b;
    req.y = y;
    req.p = p;
    return simulate(model, req, cfg).base.functional[0];
}

/// Weighted histogram of X_T over the given edges, with underflow and overflow bins.
inline std::vector<HistogramBin> simulate_density_histogram(const RationalJumpModel& model, double x, double b,
                                                            double p, const SimConfig& cfg,
                                                            const std::vector<double>& edges) {
    McRequest req;
    req.xs = {x};
    req.b = b;
    req.p = p;
    req.bin_edges = edges;
    if (edges.empty()) throw ValidationError("histogram needs at least one edge");
    return simulate(model, req, cfg).base.histogram[0];
}

}  // namespace occtime

#pragma once

// Occupation-time weighted laws for rational-jump diffusions:
//   V_q(x) = E_x[exp(-p int_0^{e(q)} 1{X_s <= b} ds) 1{X_{e(q)} > y}],  y >= b,
// the F-kernels, the convolution kernel K_q and the joint densities in y.

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "occtime/errors.hpp"
#include "occtime/expmix.hpp"
#include "occtime/model.hpp"
#include "occtime/wiener_hopf.hpp"

namespace occtime {

enum class FKernelKind { F1, F2, F1hat, F2hat };

/// d(F + 1) = atom_mass delta_0 + density(x) dx on [0, inf).
struct FKernel {
    double atom_mass = 1.0;
    ExpMixFunction density;
    FKernelKind tag = FKernelKind::F1;

    cplx laplace(cplx s) const { return atom_mass + density.laplace(s); }
    /// F(u) for u >= 0; F(inf) = 0.
    double value(double u) const { return -density.integral(u, std::numeric_limits<double>::infinity()); }
};

struct HQCoefficients {
    std::vector<cplx> H;     // M entries
    std::vector<cplx> Q;     // N entries
    std::vector<cplx> Phat;  // N entries; the p = 0 counterpart of P
};

struct OccupationSolution {
    double b = 0.0, y = 0.0, p = 0.0, q = 1.0;
    std::vector<cplx> U, H, Q, P;
    std::vector<cplx> betas_q, gammas_q, betas_xi;

    double xi() const { return p + q; }

    double operator()(double x) const {
        cplx v = 0.0;
        if (x < b) {
            for (std::size_t i = 0; i < U.size(); ++i) v += U[i] * std::exp(betas_xi[i] * (x - b));
            return v.real();
        }
        for (std::size_t i = 0; i < P.size(); ++i) v += P[i] * std::exp(gammas_q[i] * (b - x));
        if (x < y) {
            for (std::size_t i = 0; i < H.size(); ++i) v += H[i] * std::exp(betas_q[i] * (x - y));
        } else {
            v += 1.0;
            for (std::size_t i = 0; i < Q.size(); ++i) v += Q[i] * std::exp(gammas_q[i] * (y - x));
        }
        return v.real();
    }
};

namespace detail {

inline void check_rates(double q, double p) {
    if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("killing rate q must be positive");
    if (!std::isfinite(p) || !(p > -q)) throw ValidationError("occupation weight p must satisfy p > -q");
}

/// Kernel with transform prod_k [a_k/(s + a_k)] [(s + c_k)/c_k]: atom prod a / prod c, density sum r_i e^{-a_i x}.
inline FKernel ratio_kernel(const std::vector<cplx>& a, const std::vector<cplx>& c, FKernelKind tag) {
    cplx ratio = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) ratio *= a[k] / c[k];
    std::vector<ExpTerm> terms;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cplx r = ratio;
        for (std::size_t k = 0; k < a.size(); ++k) {
            r *= c[k] - a[i];
            if (k != i) r /= a[k] - a[i];
        }
        terms.push_back({r, a[i], 0});
    }
    return FKernel{ratio.real(), ExpMixFunction(std::move(terms)), tag};
}

/// coef * int_lo^hi exp(e0 + lambda z) dz, scaled at the endpoint where the exponent is largest.
inline cplx exp_segment(cplx coef, cplx e0, cplx lambda, double lo, double hi) {
    if (hi <= lo) return 0.0;
    const double anchor = (e0 + lambda * lo).real() >= (e0 + lambda * hi).real() ? lo : hi;
    return coef * std::exp(e0 + lambda * anchor) * integrate_power_exp(0, lambda, lo - anchor, hi - anchor);
}

/// int_lo^hi f(u - z) g(z) dz with u - z >= 0 on the range; f and g carry only power-0 terms.
inline double convolution_segment(const ExpMixFunction& f, const TwoSidedExpMix& g, double u, double lo,
                                  double hi) {
    cplx acc = 0.0;
    for (const auto& tf : f.terms()) {
        if (tf.power != 0) throw NumericalError("convolution_segment expects simple exponential terms");
        // tf.coeff e^{-a (u - z)} = tf.coeff e^{-a u} e^{a z}
        const cplx e0 = -tf.rate * u;
        if (hi > 0.0)
            for (const auto& tg : g.positive.terms())
                acc += exp_segment(tf.coeff * tg.coeff, e0, tf.rate - tg.rate, std::max(lo, 0.0), hi);
        if (lo < 0.0)
            for (const auto& tg : g.negative.terms())
                acc += exp_segment(tf.coeff * tg.coeff, e0, tf.rate + tg.rate, lo, std::min(hi, 0.0));
    }
    return acc.real();
}

inline cplx pole_polynomial(const WienerHopfFactors& f, cplx x) {
    cplx v = 1.0;
    for (const auto& [rate, mult] : f.up_poles()) v *= std::pow(x - rate, double(mult));
    for (const auto& [rate, mult] : f.down_poles()) v *= std::pow(x + rate, double(mult));
    return v;
}

}  // namespace detail

/// H, Q and Phat from the factors at q; Phat depends on b - y.
inline HQCoefficients hq_coefficients(const WienerHopfFactors& fq, double b, double y) {
    const auto &beta = fq.betas(), &gamma = fq.gammas();
    const auto &C = fq.C(), &D = fq.D();
    HQCoefficients out;
    for (std::size_t k = 0; k < beta.size(); ++k) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < gamma.size(); ++j) s += D[j] / (beta[k] + gamma[j]);
        out.H.push_back(C[k] / beta[k] * s);
    }
    for (std::size_t k = 0; k < gamma.size(); ++k) {
        cplx s = 0.0, ph = 0.0;
        for (std::size_t i = 0; i < beta.size(); ++i) {
            s += C[i] / (beta[i] * (beta[i] + gamma[k]));
            ph += C[i] / beta[i] * D[k] * std::exp(beta[i] * (b - y)) / (beta[i] + gamma[k]);
        }
        out.Q.push_back(D[k] * s - D[k] / gamma[k]);
        out.Phat.push_back(-ph);
    }
    return out;
}

struct ResidueCoefficients {
    std::vector<cplx> U;  // M entries, region x < b
    std::vector<cplx> P;  // N entries
};

/// U and P as residues of the rational function f at beta_{i,p+q} and -gamma_{i,q}.
/// The factor (beta_{k,q} - beta_{i,p+q}) shared by the weight and the pole is cancelled
/// analytically, so coinciding roots at q and p + q need no special treatment; Strict
/// policy still reports them as DegenerateConfiguration.
inline ResidueCoefficients residue_expansion(double b, double y, const WienerHopfFactors& fq,
                                             const WienerHopfFactors& fxi, const std::vector<cplx>& H,
                                             RootPolicy policy = RootPolicy::Perturb) {
    if (y < b) throw ValidationError("residue_expansion requires y >= b");
    const auto &bq = fq.betas(), &gq = fq.gammas(), &bx = fxi.betas();
    const std::size_t M = bq.size(), N = gq.size();
    if (bx.size() != M || H.size() != M) throw ValidationError("root systems at q and p + q do not match");

    if (policy == RootPolicy::Strict && fq.q() != fxi.q())
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t k = 0; k < M; ++k)
                if (std::abs(bx[i] - bq[k]) < 1e-9 * (1.0 + std::abs(bq[k])))
                    throw DegenerateConfiguration("a root at p + q coincides with a root at q");

    std::vector<cplx> h(M), den_q(M);
    for (std::size_t k = 0; k < M; ++k) {
        h[k] = -H[k] * std::exp(bq[k] * (b - y));
        den_q[k] = detail::pole_polynomial(fq, bq[k]);
    }
    auto weight_without = [&](std::size_t k, std::size_t skip) {
        cplx w = 1.0;
        for (std::size_t l = 0; l < M; ++l)
            if (l != skip) w *= bq[k] - bx[l];
        for (std::size_t l = 0; l < N; ++l) w *= bq[k] + gq[l];
        return w / den_q[k];
    };

    ResidueCoefficients out;
    for (std::size_t i = 0; i < M; ++i) {
        cplx pref = detail::pole_polynomial(fq, bx[i]);
        for (std::size_t l = 0; l < M; ++l)
            if (l != i) pref /= bx[i] - bx[l];
        for (std::size_t l = 0; l < N; ++l) pref /= bx[i] + gq[l];
        cplx s = 0.0;
        for (std::size_t k = 0; k < M; ++k) s -= weight_without(k, i) * h[k];
        out.U.push_back(pref * s);
    }
    for (std::size_t i = 0; i < N; ++i) {
        const cplx z = -gq[i];
        cplx pref = detail::pole_polynomial(fq, z);
        for (std::size_t l = 0; l < M; ++l) pref /= z - bx[l];
        for (std::size_t l = 0; l < N; ++l)
            if (l != i) pref /= z + gq[l];
        cplx s = 0.0;
        for (std::size_t k = 0; k < M; ++k) s += weight_without(k, M) * h[k] / (z - bq[k]);
        out.P.push_back(-pref * s);
    }
    return out;
}

/// Piecewise coefficients of V_q for levels b <= y, weight p > -q.
inline OccupationSolution occupation_solution(const WienerHopfFactors& fq, const WienerHopfFactors& fxi, double b,
                                              double y, double p, RootPolicy policy = RootPolicy::Perturb) {
    detail::check_rates(fq.q(), p);
    if (!(y >= b)) throw ValidationError("V_q requires y >= b");
    OccupationSolution s;
    s.b = b;
    s.y = y;
    s.p = p;
    s.q = fq.q();
    auto hq = hq_coefficients(fq, b, y);
    auto res = residue_expansion(b, y, fq, fxi, hq.H, policy);
    s.H = std::move(hq.H);
    s.Q = std::move(hq.Q);
    s.U = std::move(res.U);
    s.P = std::move(res.P);
    s.betas_q = fq.betas();
    s.gammas_q = fq.gammas();
    s.betas_xi = fxi.betas();
    return s;
}

inline double v_q(double x, const OccupationSolution& s) { return s(x); }

/// F1, F2, F1hat, F2hat built from the factors at q and p + q.
inline FKernel f_kernel(const WienerHopfFactors& fq, const WienerHopfFactors& fxi, FKernelKind which) {
    switch (which) {
        case FKernelKind::F1: return detail::ratio_kernel(fq.betas(), fxi.betas(), which);
        case FKernelKind::F1hat: return detail::ratio_kernel(fxi.betas(), fq.betas(), which);
        case FKernelKind::F2: return detail::ratio_kernel(fq.gammas(), fxi.gammas(), which);
        case FKernelKind::F2hat: return detail::ratio_kernel(fxi.gammas(), fq.gammas(), which);
    }
    throw ValidationError("unknown F-kernel");
}

/// Density of inf X_{e(q)} + sup X_{e(p+q)} for independent exponential times.
inline TwoSidedExpMix kq_density(const WienerHopfFactors& fq, const WienerHopfFactors& fxi) {
    const auto &g = fq.gammas(), &D = fq.D();
    const auto &bt = fxi.betas(), &C = fxi.C();
    std::vector<ExpTerm> pos, neg;
    for (std::size_t i = 0; i < bt.size(); ++i) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) s += D[j] * C[i] / (bt[i] + g[j]);
        pos.push_back({s, bt[i], 0});
    }
    for (std::size_t j = 0; j < g.size(); ++j) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < bt.size(); ++i) s += D[j] * C[i] / (bt[i] + g[j]);
        neg.push_back({s, g[j], 0});
    }
    return {ExpMixFunction(std::move(pos)), ExpMixFunction(std::move(neg))};
}

/// Density of X_{e(q)} started at 0.
inline TwoSidedExpMix killed_density(const WienerHopfFactors& fq) { return kq_density(fq, fq); }

/// P_x(X_{e(q)} > y) from the sup/inf convolution.
inline double killed_tail(const WienerHopfFactors& fq, double x, double y) {
    return killed_density(fq).integral(y - x, std::numeric_limits<double>::infinity());
}

/// Density in y of E_x[exp(-p int_0^{e(q)} 1{X_s <= b} ds) 1{X_{e(q)} in dy}], p > 0.
inline double joint_density_below(const WienerHopfFactors& fq, const WienerHopfFactors& fxi, double x, double b,
                                  double y, double p) {
    if (!(p > 0.0)) throw ValidationError("the joint density requires p > 0");
    detail::check_rates(fq.q(), p);
    const TwoSidedExpMix K = kq_density(fq, fxi);
    if (y >= b) {
        const FKernel F1 = f_kernel(fq, fxi, FKernelKind::F1);
        const double u = y - x;
        return F1.atom_mass * K(u) + detail::convolution_segment(F1.density, K, u, b - x, u);
    }
    const FKernel F2h = f_kernel(fq, fxi, FKernelKind::F2hat);
    const TwoSidedExpMix L = K.reflected();
    const double v = x - y;
    const double inner = F2h.atom_mass * L(v) + detail::convolution_segment(F2h.density, L, v, x - b, v);
    return fq.q() / (p + fq.q()) * inner;
}

enum class OccupationSide {
    Below,  // weight on {X_s <= b}
    Above,  // weight on {X_s >= b}
};

/// Analytic engine for one model, caching the Wiener-Hopf factors per killing rate.
class OccupationEngine {
public:
    explicit OccupationEngine(const RationalJumpModel& model, RootPolicy policy = RootPolicy::Perturb)
        : psi_(model), policy_(policy) {}
    OccupationEngine(const OccupationEngine&) = delete;
    OccupationEngine& operator=(const OccupationEngine&) = delete;

    const LaplaceExponent& exponent() const { return psi_; }
    const RationalJumpModel& model() const { return psi_.model(); }
    RootPolicy policy() const { return policy_; }

    const WienerHopfFactors& factors(double q) const {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(q);
        if (it == cache_.end()) it = cache_.emplace(q, factors_at(psi_, q, policy_)).first;
        return it->second;
    }

    const OccupationEngine& dual() const {
        std::lock_guard lock(mutex_);
        if (!dual_) dual_ = std::make_unique<OccupationEngine>(dual_model(psi_.model()), policy_);
        return *dual_;
    }

    OccupationSolution solve(double q, double p, double b, double y) const {
        detail::check_rates(q, p);
        const auto& fq = factors(q);
        const auto& fx = p == 0.0 ? fq : factors(p + q);
        return occupation_solution(fq, fx, b, y, p, policy_);
    }

    double v_q(double x, double q, double p, double b, double y) const { return solve(q, p, b, y)(x); }

    FKernel f_kernel(double q, double p, FKernelKind which) const {
        detail::check_rates(q, p);
        return occtime::f_kernel(factors(q), factors(p + q), which);
    }

    TwoSidedExpMix kq_density(double q, double p) const {
        detail::check_rates(q, p);
        return occtime::kq_density(factors(q), factors(p + q));
    }

    TwoSidedExpMix killed_density(double q) const { return occtime::killed_density(factors(q)); }
    double killed_tail(double x, double y, double q) const { return occtime::killed_tail(factors(q), x, y); }

    double joint_density(double x, double b, double y, double p, double q,
                         OccupationSide side = OccupationSide::Below) const {
        if (side == OccupationSide::Above) return dual().joint_density(-x, -b, -y, p, q, OccupationSide::Below);
        detail::check_rates(q, p);
        return joint_density_below(factors(q), factors(p + q), x, b, y, p);
    }

    /// E_x[exp(-p int_0^{e(q)} 1{X_s <= b} ds)].
    double occupation_lt(double x, double b, double p, double q) const {
        if (!(p > 0.0)) throw ValidationError("occupation_lt requires p > 0");
        detail::check_rates(q, p);
        const double above = solve(q, p, b, b)(x);
        // Mass ending below b: rate p + q, weight -p on the reflected path.
        const double below = dual().solve(p + q, -p, -b, -b)(-x);
        return above + q / (p + q) * below;
    }

private:
    LaplaceExponent psi_;
    RootPolicy policy_;
    mutable std::mutex mutex_;
    mutable std::map<double, WienerHopfFactors> cache_;
    mutable std::unique_ptr<OccupationEngine> dual_;
};

}  // namespace occtime

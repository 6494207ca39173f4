#pragma once

// Roots of psi(s) = q, the rational Wiener-Hopf factors
//   psi_q^+(s) = E[e^{-s sup X_{e(q)}}],  psi_q^-(s) = E[e^{s inf X_{e(q)}}],
// and the one-sided first-passage laws at an exponential killing rate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "occtime/errors.hpp"
#include "occtime/expmix.hpp"
#include "occtime/model.hpp"
#include "occtime/partial_fraction.hpp"
#include "occtime/polynomial.hpp"

namespace occtime {

enum class RootPolicy {
    Perturb,  // on near-multiple roots retry once at q + 1e-6 (1 + q)
    Strict,   // raise NearMultipleRoots
};

struct RootSystem {
    double q = 0.0;              // rate the roots were computed at
    double requested_q = 0.0;    // differs from q only after a perturbation retry
    std::vector<cplx> betas;     // psi(beta) = q, Re beta > 0, beta_1 real and smallest
    std::vector<cplx> gammas;    // psi(-gamma) = q, Re gamma > 0, gamma_1 real and smallest

    bool perturbed() const { return q != requested_q; }
};

namespace detail {

inline constexpr double kRootSeparation = 1e-7;
inline constexpr double kConjugateTolerance = 1e-9;

/// Snap near-real values to the axis and make complex roots exact conjugate pairs.
inline std::vector<cplx> pair_conjugates(std::vector<cplx> roots) {
    std::vector<cplx> reals, upper, lower;
    for (const auto& r : roots) {
        const double tol = kConjugateTolerance * (1.0 + std::abs(r));
        if (std::abs(r.imag()) <= tol) reals.emplace_back(r.real(), 0.0);
        else if (r.imag() > 0) upper.push_back(r);
        else lower.push_back(r);
    }
    if (upper.size() != lower.size()) throw NumericalError("complex roots do not come in conjugate pairs");
    std::vector<cplx> out = reals;
    std::vector<bool> used(lower.size(), false);
    for (const auto& u : upper) {
        std::size_t best = lower.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < lower.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(std::conj(lower[j]) - u);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best == lower.size() || best_d > 1e3 * kConjugateTolerance * (1.0 + std::abs(u)))
            throw NumericalError("complex roots do not come in conjugate pairs");
        used[best] = true;
        const cplx avg = 0.5 * (u + std::conj(lower[best]));
        out.push_back(avg);
        out.push_back(std::conj(avg));
    }
    std::sort(out.begin(), out.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        if (std::abs(a.imag()) != std::abs(b.imag())) return std::abs(a.imag()) < std::abs(b.imag());
        return a.imag() > b.imag();
    });
    return out;
}

inline void check_ordering(const std::vector<cplx>& roots, const char* name) {
    if (roots.empty()) throw NumericalError(std::string("no ") + name + " roots found");
    if (roots[0].imag() != 0.0 || !(roots[0].real() > 0.0))
        throw NumericalError(std::string("smallest ") + name + " root is not real and positive");
    for (std::size_t k = 1; k < roots.size(); ++k)
        if (!(roots[k].real() > roots[0].real()))
            throw NumericalError(std::string(name) + " roots violate the ordering 0 < r_1 < Re r_k");
}

inline RootSystem solve_roots_once(const LaplaceExponent& psi, double q) {
    const auto& model = psi.model();
    const std::size_t M = model.up_order() + 1, N = model.down_order() + 1;
    const RealPolynomial poly = psi.shifted_numerator(q);
    if (poly.degree() != M + N) throw NumericalError("exponent numerator has unexpected degree");

    std::vector<cplx> roots = companion_roots(poly);
    for (auto& r : roots) {
        // Newton polish on psi(s) - q itself, keeping a step only if it reduces the residual.
        double res = std::abs(psi(r) - q);
        for (int it = 0; it < 3; ++it) {
            const cplx step = (psi(r) - q) / psi.derivative(r);
            const cplx cand = r - step;
            const double cres = std::abs(psi(cand) - q);
            if (!(cres <= res)) break;
            r = cand;
            res = cres;
        }
    }

    std::vector<cplx> right, left;
    for (const auto& r : roots) (r.real() > 0 ? right : left).push_back(r);
    if (right.size() != M || left.size() != N) {
        std::ostringstream os;
        os << "root count mismatch: expected " << M << " right / " << N << " left, found " << right.size()
           << " / " << left.size();
        throw NumericalError(os.str());
    }
    RootSystem rs;
    rs.q = q;
    rs.requested_q = q;
    rs.betas = pair_conjugates(right);
    for (auto& l : left) l = -l;
    rs.gammas = pair_conjugates(left);
    check_ordering(rs.betas, "beta");
    check_ordering(rs.gammas, "gamma");

    // Separation of all M + N roots of psi(s) = q.
    std::vector<cplx> all = rs.betas;
    for (const auto& g : rs.gammas) all.push_back(-g);
    double scale = 1.0;
    for (const auto& r : all) scale = std::max(scale, std::abs(r));
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(all[i] - all[j]) < kRootSeparation * scale) {
                std::ostringstream os;
                os.precision(17);
                os << "near-multiple roots of psi(s) = " << q << " at " << all[i] << " and " << all[j];
                throw NearMultipleRoots(os.str());
            }
    for (const auto& r : all)
        if (std::abs(psi(r) - q) > 1e-10 * (1.0 + q) * std::max(1.0, std::abs(r) * std::abs(r)))
            throw NumericalError("root residual above tolerance after polishing");
    return rs;
}

}  // namespace detail

/// Roots of psi(s) = q split into the M right-half-plane betas and N gammas (psi(-gamma) = q).
inline RootSystem solve_roots(const LaplaceExponent& psi, double q, RootPolicy policy = RootPolicy::Perturb) {
    if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("killing rate q must be positive");
    try {
        return detail::solve_roots_once(psi, q);
    } catch (const NearMultipleRoots&) {
        if (policy == RootPolicy::Strict) throw;
        RootSystem rs = detail::solve_roots_once(psi, q + 1e-6 * (1.0 + q));
        rs.requested_q = q;
        return rs;
    }
}

/// Wiener-Hopf factors at one killing rate, in partial-fraction and product form.
class WienerHopfFactors {
public:
    WienerHopfFactors(RootSystem roots, const LaplaceExponent& psi) : roots_(std::move(roots)) {
        for (const auto& c : psi.model().up) up_poles_.emplace_back(c.rate, c.multiplicity());
        for (const auto& c : psi.model().down) down_poles_.emplace_back(c.rate, c.multiplicity());
        C_ = coefficients(roots_.betas, up_poles_);
        D_ = coefficients(roots_.gammas, down_poles_);
        std::vector<ExpTerm> sup, inf;
        for (std::size_t k = 0; k < C_.size(); ++k) sup.push_back({C_[k], roots_.betas[k], 0});
        for (std::size_t k = 0; k < D_.size(); ++k) inf.push_back({D_[k], roots_.gammas[k], 0});
        sup_density_ = ExpMixFunction(std::move(sup));
        inf_density_ = ExpMixFunction(std::move(inf));
    }

    const RootSystem& roots() const { return roots_; }
    double q() const { return roots_.q; }
    const std::vector<cplx>& betas() const { return roots_.betas; }
    const std::vector<cplx>& gammas() const { return roots_.gammas; }
    const std::vector<cplx>& C() const { return C_; }
    const std::vector<cplx>& D() const { return D_; }
    /// (rate, multiplicity) of the up-jump and down-jump Erlang poles.
    const std::vector<std::pair<double, unsigned>>& up_poles() const { return up_poles_; }
    const std::vector<std::pair<double, unsigned>>& down_poles() const { return down_poles_; }

    /// Density of sup_{t <= e(q)} X_t on [0, inf).
    const ExpMixFunction& sup_density() const { return sup_density_; }
    /// Density of -inf_{t <= e(q)} X_t on [0, inf).
    const ExpMixFunction& inf_density() const { return inf_density_; }

    cplx psi_plus(cplx s) const { return pf_sum(C_, roots_.betas, s); }
    cplx psi_minus(cplx s) const { return pf_sum(D_, roots_.gammas, s); }
    cplx psi_plus_product(cplx s) const { return product_form(roots_.betas, up_poles_, s); }
    cplx psi_minus_product(cplx s) const { return product_form(roots_.gammas, down_poles_, s); }

private:
    static std::vector<cplx> coefficients(const std::vector<cplx>& r,
                                          const std::vector<std::pair<double, unsigned>>& poles) {
        std::vector<cplx> out(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            cplx v = r[i];
            for (const auto& [rate, mult] : poles) v *= std::pow((rate - r[i]) / rate, double(mult));
            for (std::size_t k = 0; k < r.size(); ++k)
                if (k != i) v *= r[k] / (r[k] - r[i]);
            out[i] = v;
        }
        return out;
    }
    static cplx pf_sum(const std::vector<cplx>& c, const std::vector<cplx>& r, cplx s) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) acc += c[k] / (s + r[k]);
        return acc;
    }
    static cplx product_form(const std::vector<cplx>& r, const std::vector<std::pair<double, unsigned>>& poles,
                             cplx s) {
        cplx v = 1.0;
        for (const auto& [rate, mult] : poles) v *= std::pow((s + rate) / rate, double(mult));
        for (const auto& rk : r) v *= rk / (s + rk);
        return v;
    }

    RootSystem roots_;
    std::vector<std::pair<double, unsigned>> up_poles_, down_poles_;
    std::vector<cplx> C_, D_;
    ExpMixFunction sup_density_, inf_density_;
};

inline WienerHopfFactors factors(const RootSystem& roots, const LaplaceExponent& psi) {
    return WienerHopfFactors(roots, psi);
}

inline WienerHopfFactors factors_at(const LaplaceExponent& psi, double q, RootPolicy policy = RootPolicy::Perturb) {
    return WienerHopfFactors(solve_roots(psi, q, policy), psi);
}

/// E[e^{-q tau}; overshoot in dy] = atom delta_0(dy) + density(y) dy, y >= 0.
struct FirstPassageLaw {
    double atom = 0.0;
    ExpMixFunction density;

    double total_mass() const { return atom + density.total_mass(); }
};

namespace detail {

/// Expands (1/psi_q^{+}(s)) sum_i C_i e^{-r_i d}/(s + r_i) over the Erlang poles (shared by both sides).
inline FirstPassageLaw first_passage(const std::vector<cplx>& r, const std::vector<cplx>& C,
                                     const std::vector<std::pair<double, unsigned>>& poles, double d) {
    // 1/psi^+(s) = prod (s + r_k)/r_k * prod (rate/(s + rate))^mult
    cplx scale = 1.0;
    for (const auto& rk : r) scale /= rk;
    for (const auto& [rate, mult] : poles) scale *= std::pow(rate, double(mult));
    Polynomial<cplx> A;
    for (std::size_t i = 0; i < r.size(); ++i) {
        Polynomial<cplx> term = Polynomial<cplx>::constant(scale * C[i] * std::exp(-r[i] * d));
        for (std::size_t l = 0; l < r.size(); ++l)
            if (l != i) term = term * Polynomial<cplx>::linear(r[l], 1.0);
        A = A + term;
    }
    std::vector<Pole> pole_list;
    for (const auto& [rate, mult] : poles) pole_list.push_back({cplx(-rate), mult});
    const PartialFractions pf = partial_fractions(A, pole_list);

    FirstPassageLaw law;
    law.atom = pf.constant.real();
    std::vector<ExpTerm> terms;
    for (std::size_t k = 0; k < poles.size(); ++k)
        for (std::size_t j = 1; j <= poles[k].second; ++j)
            // e/(s+rate)^j  <->  e y^{j-1} e^{-rate y} / (j-1)!
            terms.push_back({pf.coefficients[k][j - 1] / detail::factorial(unsigned(j - 1)), cplx(poles[k].first),
                             unsigned(j - 1)});
    law.density = ExpMixFunction(std::move(terms));
    return law;
}

}  // namespace detail

/// Law of the overshoot X_{tau_x^+} - x discounted by e^{-q tau_x^+}, for x >= 0.
inline FirstPassageLaw first_passage_up(const WienerHopfFactors& f, double x) {
    if (x < 0.0) throw ValidationError("first_passage_up requires a level x >= 0");
    return detail::first_passage(f.betas(), f.C(), f.up_poles(), x);
}

/// Law of the undershoot x - X_{tau_x^-} (as a density in |y|) discounted by e^{-q tau_x^-}, for x <= 0.
inline FirstPassageLaw first_passage_down(const WienerHopfFactors& f, double x) {
    if (x > 0.0) throw ValidationError("first_passage_down requires a level x <= 0");
    return detail::first_passage(f.gammas(), f.D(), f.down_poles(), -x);
}

}  // namespace occtime

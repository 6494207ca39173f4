#pragma once

// Exponential-polynomial mixtures  x -> sum_j a_j x^{k_j} exp(-rho_j x)  on [0, inf).
//
// Every closed-form object of the rational family (sup/inf densities, F-kernels,
// scale functions, convolution kernels) is carried in this form, and all the
// integrals appearing in the occupation formulas reduce to exact operations on it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "occtime/errors.hpp"
#include "occtime/polynomial.hpp"

namespace occtime {

namespace detail {

inline double factorial(unsigned n) {
    double f = 1.0;
    for (unsigned i = 2; i <= n; ++i) f *= double(i);
    return f;
}

inline double binomial(unsigned n, unsigned k) {
    if (k > n) return 0.0;
    double r = 1.0;
    for (unsigned i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

/// int_A^B z^k exp(lambda z) dz, stable for small |lambda|.
inline cplx integrate_power_exp(unsigned k, cplx lambda, double A, double B) {
    if (A == B) return 0.0;
    const double span = std::max(std::abs(A), std::abs(B));
    if (std::abs(lambda) * span < 1.0) {
        // Taylor series of exp(lambda z) integrated term by term.
        cplx sum = 0.0;
        cplx lam_pow = 1.0;
        double fact = 1.0;
        for (unsigned n = 0; n < 60; ++n) {
            const unsigned e = k + n + 1;
            const double piece = (std::pow(B, double(e)) - std::pow(A, double(e))) / double(e);
            const cplx term = lam_pow / fact * piece;
            sum += term;
            if (n > 4 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
            lam_pow *= lambda;
            fact *= double(n + 1);
        }
        return sum;
    }
    // I_k = [z^k e^{lambda z} / lambda]_A^B - (k / lambda) I_{k-1}
    const cplx eA = std::exp(lambda * A), eB = std::exp(lambda * B);
    cplx I = (eB - eA) / lambda;
    double pA = 1.0, pB = 1.0;
    for (unsigned j = 1; j <= k; ++j) {
        pA *= A;
        pB *= B;
        I = (pB * eB - pA * eA) / lambda - double(j) / lambda * I;
    }
    return I;
}

}  // namespace detail

struct ExpTerm {
    cplx coeff;
    cplx rate;       // the term decays like exp(-rate x)
    unsigned power;  // x^power
};

/// Sum of a x^k e^{-rho x} terms on [0, inf), zero on (-inf, 0), plus an atom at 0.
class ExpMixFunction {
public:
    ExpMixFunction() = default;
    explicit ExpMixFunction(std::vector<ExpTerm> terms, double atom = 0.0)
        : terms_(std::move(terms)), atom_(atom) {
        normalize();
    }

    static ExpMixFunction exponential(cplx coeff, cplx rate) {
        return ExpMixFunction({ExpTerm{coeff, rate, 0}});
    }
    static ExpMixFunction delta(double mass) { return ExpMixFunction({}, mass); }

    const std::vector<ExpTerm>& terms() const { return terms_; }
    double atom() const { return atom_; }
    bool empty() const { return terms_.empty() && atom_ == 0.0; }

    /// Value of the absolutely continuous part at x (0 for x < 0).
    cplx evaluate_complex(double x) const {
        if (x < 0.0) return 0.0;
        cplx acc = 0.0;
        for (const auto& t : terms_) {
            cplx v = t.coeff * std::exp(-t.rate * x);
            if (t.power > 0) v *= std::pow(x, double(t.power));
            acc += v;
        }
        return acc;
    }
    double operator()(double x) const { return evaluate_complex(x).real(); }

    /// d/dx of the continuous part, for x > 0.
    ExpMixFunction derivative() const {
        std::vector<ExpTerm> out;
        for (const auto& t : terms_) {
            out.push_back({-t.rate * t.coeff, t.rate, t.power});
            if (t.power > 0) out.push_back({t.coeff * double(t.power), t.rate, t.power - 1});
        }
        return ExpMixFunction(std::move(out));
    }

    /// atom + int_0^inf e^{-s x} f(x) dx, valid for Re(s) > -min Re(rate).
    cplx laplace(cplx s) const {
        cplx acc = atom_;
        for (const auto& t : terms_)
            acc += t.coeff * detail::factorial(t.power) / std::pow(s + t.rate, double(t.power + 1));
        return acc;
    }

    bool integrable() const {
        return std::all_of(terms_.begin(), terms_.end(), [](const ExpTerm& t) { return t.rate.real() > 0.0; });
    }

    /// atom + int_0^inf f.
    double total_mass() const {
        if (!integrable()) throw NumericalError("mixture has a non-decaying term; total mass undefined");
        return laplace(0.0).real();
    }

    /// int_A^B f(x) dx of the continuous part, 0 <= A <= B (B may be +inf).
    double integral(double A, double B) const { return integral_complex(A, B).real(); }
    cplx integral_complex(double A, double B) const {
        A = std::max(A, 0.0);
        if (B <= A) return 0.0;
        cplx acc = 0.0;
        for (const auto& t : terms_) {
            if (std::isinf(B)) {
                if (t.rate.real() <= 0.0) throw NumericalError("improper integral of a non-decaying term");
                // int_A^inf x^k e^{-rho x} = e^{-rho A} sum_j k!/(k-j)! A^{k-j} / rho^{j+1}
                cplx s = 0.0;
                for (unsigned j = 0; j <= t.power; ++j)
                    s += detail::factorial(t.power) / detail::factorial(t.power - j) *
                         std::pow(A, double(t.power - j)) / std::pow(t.rate, double(j + 1));
                acc += t.coeff * std::exp(-t.rate * A) * s;
            } else {
                acc += t.coeff * detail::integrate_power_exp(t.power, -t.rate, A, B);
            }
        }
        return acc;
    }

    /// x -> f(x) e^{lambda x}.
    ExpMixFunction times_exp(cplx lambda) const {
        std::vector<ExpTerm> out = terms_;
        for (auto& t : out) t.rate -= lambda;
        return ExpMixFunction(std::move(out), atom_);
    }

    ExpMixFunction& operator+=(const ExpMixFunction& o) {
        terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
        atom_ += o.atom_;
        normalize();
        return *this;
    }
    friend ExpMixFunction operator+(ExpMixFunction a, const ExpMixFunction& b) { return a += b; }
    friend ExpMixFunction operator-(ExpMixFunction a, const ExpMixFunction& b) { return a += (-1.0) * b; }
    friend ExpMixFunction operator*(cplx k, ExpMixFunction f) {
        for (auto& t : f.terms_) t.coeff *= k;
        f.atom_ *= k.real();
        return f;
    }
    friend ExpMixFunction operator*(double k, const ExpMixFunction& f) { return cplx(k) * f; }

    /// Largest |Im f(x)| / (1 + |f(x)|) over the given points, for conjugate-pair checks.
    double max_relative_imaginary(const std::vector<double>& xs) const {
        double worst = 0.0;
        for (double x : xs) {
            const cplx v = evaluate_complex(x);
            worst = std::max(worst, std::abs(v.imag()) / (1.0 + std::abs(v.real())));
        }
        return worst;
    }

private:
    void normalize() {
        std::vector<ExpTerm> merged;
        for (const auto& t : terms_) {
            auto same = std::find_if(merged.begin(), merged.end(), [&](const ExpTerm& m) {
                return m.power == t.power && std::abs(m.rate - t.rate) <= 1e-14 * (1.0 + std::abs(t.rate));
            });
            if (same != merged.end()) same->coeff += t.coeff;
            else merged.push_back(t);
        }
        std::erase_if(merged, [](const ExpTerm& t) { return t.coeff == cplx(0.0); });
        terms_ = std::move(merged);
    }

    std::vector<ExpTerm> terms_;
    double atom_ = 0.0;
};

namespace detail {

/// Inverse transform of k1!/(s+a)^{k1+1} * k2!/(s+b)^{k2+1}.
inline std::vector<ExpTerm> convolve_terms(const ExpTerm& f, const ExpTerm& g) {
    const cplx scale = f.coeff * g.coeff * factorial(f.power) * factorial(g.power);
    const unsigned m = f.power + 1, n = g.power + 1;
    const cplx a = f.rate, b = g.rate;
    if (std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a))) {
        const unsigned e = m + n;
        return {ExpTerm{scale / factorial(e - 1), a, e - 1}};
    }
    std::vector<ExpTerm> out;
    for (unsigned r = 0; r < m; ++r) {
        const cplx c = ((r % 2) ? -1.0 : 1.0) * binomial(n + r - 1, r) / std::pow(b - a, double(n + r));
        const unsigned i = m - r;
        out.push_back({scale * c / factorial(i - 1), a, i - 1});
    }
    for (unsigned r = 0; r < n; ++r) {
        const cplx c = ((r % 2) ? -1.0 : 1.0) * binomial(m + r - 1, r) / std::pow(a - b, double(m + r));
        const unsigned i = n - r;
        out.push_back({scale * c / factorial(i - 1), b, i - 1});
    }
    return out;
}

}  // namespace detail

/// (f * g)(x) = int_0^x f(z) g(x - z) dz, including atoms, exactly.
inline ExpMixFunction convolve(const ExpMixFunction& f, const ExpMixFunction& g) {
    std::vector<ExpTerm> out;
    for (const auto& tf : f.terms())
        for (const auto& tg : g.terms()) {
            auto piece = detail::convolve_terms(tf, tg);
            out.insert(out.end(), piece.begin(), piece.end());
        }
    for (const auto& t : g.terms()) out.push_back({f.atom() * t.coeff, t.rate, t.power});
    for (const auto& t : f.terms()) out.push_back({g.atom() * t.coeff, t.rate, t.power});
    return ExpMixFunction(std::move(out), f.atom() * g.atom());
}

/// Density on the whole line: positive(x) for x >= 0 and negative(-x) for x < 0.
struct TwoSidedExpMix {
    ExpMixFunction positive;
    ExpMixFunction negative;

    double operator()(double x) const { return x >= 0.0 ? positive(x) : negative(-x); }

    /// int e^{i phi x} f(x) dx
    cplx characteristic(double phi) const {
        const cplx i(0.0, 1.0);
        return positive.laplace(-i * phi) + negative.laplace(i * phi);
    }

    double total_mass() const { return positive.total_mass() + negative.total_mass(); }

    /// int_A^B f(x) dx for any A <= B on the extended line.
    double integral(double A, double B) const {
        if (B <= A) return 0.0;
        double acc = 0.0;
        if (B > 0.0) acc += positive.integral(std::max(A, 0.0), B);
        if (A < 0.0) acc += negative.integral(std::max(-B, 0.0), -A);
        return acc;
    }

    TwoSidedExpMix reflected() const { return {negative, positive}; }
};

}  // namespace occtime

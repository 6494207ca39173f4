#pragma once

// Partial-fraction expansion of A(s) / prod_k (s - p_k)^{m_k} with distinct poles,
// via truncated Taylor series at each pole.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "occtime/errors.hpp"
#include "occtime/polynomial.hpp"

namespace occtime {

struct Pole {
    cplx location;
    unsigned multiplicity;
};

/// A(s)/B(s) = constant + sum_k sum_{j=1}^{m_k} coefficients[k][j-1] / (s - p_k)^j.
struct PartialFractions {
    cplx constant = 0.0;
    std::vector<std::vector<cplx>> coefficients;
};

namespace detail {

/// Taylor coefficients of A about c: A(c + t) = sum_r out[r] t^r, r < count.
inline std::vector<cplx> taylor_shift(const Polynomial<cplx>& A, cplx c, std::size_t count) {
    std::vector<cplx> work = A.coefficients();
    std::vector<cplx> out;
    for (std::size_t r = 0; r < count; ++r) {
        if (work.empty()) {
            out.push_back(0.0);
            continue;
        }
        // Synthetic division by (s - c): remainder is the next Taylor coefficient.
        std::vector<cplx> q(work.size() > 1 ? work.size() - 1 : 0);
        cplx acc = 0.0;
        for (std::size_t i = work.size(); i-- > 0;) {
            acc = acc * c + work[i];
            if (i > 0) q[i - 1] = acc;
        }
        out.push_back(acc);
        work = std::move(q);
    }
    return out;
}

inline std::vector<cplx> series_multiply(const std::vector<cplx>& a, const std::vector<cplx>& b, std::size_t n) {
    std::vector<cplx> c(n, 0.0);
    for (std::size_t i = 0; i < n && i < a.size(); ++i)
        for (std::size_t j = 0; i + j < n && j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

}  // namespace detail

/// Expands A / prod (s - p_k)^{m_k}; requires deg A <= sum m_k.
inline PartialFractions partial_fractions(const Polynomial<cplx>& A, std::span<const Pole> poles) {
    std::size_t total = 0;
    for (const auto& p : poles) total += p.multiplicity;
    if (A.degree() > total) throw NumericalError("partial_fractions: numerator degree exceeds denominator degree");
    for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(poles[i].location - poles[j].location) == 0.0)
                throw NumericalError("partial_fractions: poles must be distinct");

    PartialFractions out;
    Polynomial<cplx> proper = A;
    if (A.degree() == total && total > 0) {
        out.constant = A.leading();
        Polynomial<cplx> B = Polynomial<cplx>::constant(1.0);
        for (const auto& p : poles) B = B * Polynomial<cplx>::linear(-p.location, 1.0).pow(p.multiplicity);
        proper = A - out.constant * B;
    } else if (total == 0) {
        out.constant = A[0];
        return out;
    }

    for (std::size_t k = 0; k < poles.size(); ++k) {
        const std::size_t m = poles[k].multiplicity;
        std::vector<cplx> g = detail::taylor_shift(proper, poles[k].location, m);
        for (std::size_t l = 0; l < poles.size(); ++l) {
            if (l == k) continue;
            // 1/(t + d)^n = d^{-n} sum_r C(n+r-1, r) (-t/d)^r
            const cplx d = poles[k].location - poles[l].location;
            const unsigned n = poles[l].multiplicity;
            std::vector<cplx> series(m);
            cplx dpow = std::pow(d, -double(n));
            for (std::size_t r = 0; r < m; ++r) {
                double binom = 1.0;
                for (std::size_t i = 1; i <= r; ++i) binom = binom * double(n + r - i) / double(i);
                series[r] = binom * dpow;
                dpow *= -1.0 / d;
            }
            g = detail::series_multiply(g, series, m);
        }
        // Coefficient of (s-p)^{-j} is the t^{m-j} Taylor coefficient.
        std::vector<cplx> coeffs(m);
        for (std::size_t j = 1; j <= m; ++j) coeffs[j - 1] = g[m - j];
        out.coefficients.push_back(std::move(coeffs));
    }
    return out;
}

/// sum_i prod_k (x_i - y_k) / prod_{k != i} (x_i - x_k): the divided-difference sum that
/// vanishes whenever y.size() < x.size() - 1 and the x_i are distinct.
inline cplx interpolation_residue_sum(std::span<const cplx> x, std::span<const cplx> y) {
    cplx sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cplx num = 1.0, den = 1.0;
        for (const cplx& yk : y) num *= x[i] - yk;
        for (std::size_t k = 0; k < x.size(); ++k)
            if (k != i) den *= x[i] - x[k];
        sum += num / den;
    }
    return sum;
}

}  // namespace occtime

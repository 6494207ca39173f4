#pragma once

// Gaver-Stehfest inversion of real Laplace transforms, and fixed-horizon quantities
// obtained by inverting exponential-horizon results in the killing rate q.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "occtime/errors.hpp"
#include "occtime/occupation.hpp"

namespace occtime {

inline constexpr int kDefaultStehfestTerms = 14;

/// A real Laplace transform q -> g_hat(q), evaluable on (q_min, q_max).
struct TransformHandle {
    std::function<double(double)> eval;
    double q_min = 0.0;
    double q_max = std::numeric_limits<double>::infinity();

    double operator()(double q) const {
        if (!(q > q_min) || !(q < q_max))
            throw InversionDomainError("abscissa " + std::to_string(q) + " is outside the transform domain");
        return eval(q);
    }
};

/// Stehfest weights V_1..V_N for even N.
inline std::vector<double> stehfest_weights(int terms) {
    if (terms < 8 || terms > 20 || terms % 2 != 0)
        throw ValidationError("Gaver-Stehfest terms must be an even integer in [8, 20]");
    const int h = terms / 2;
    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= double(i);
        return f;
    };
    std::vector<double> V(static_cast<std::size_t>(terms));
    for (int k = 1; k <= terms; ++k) {
        double s = 0.0;
        for (int j = (k + 1) / 2; j <= std::min(k, h); ++j)
            s += std::pow(double(j), h) * fact(2 * j) /
                 (fact(h - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        V[std::size_t(k - 1)] = ((k + h) % 2 ? -1.0 : 1.0) * s;
    }
    return V;
}

/// g(t) ~ (ln 2 / t) sum_k V_k g_hat(k ln 2 / t), summed in index order.
inline double invert(const TransformHandle& handle, double t, int terms = kDefaultStehfestTerms) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("inversion time t must be positive");
    const std::vector<double> V = stehfest_weights(terms);
    const double a = std::log(2.0) / t;
    double acc = 0.0;
    for (int k = 1; k <= terms; ++k) acc += V[std::size_t(k - 1)] * handle(double(k) * a);
    return a * acc;
}

/// E_x[exp(-p int_0^t 1{X_s <= b} ds) 1{X_t > y}] for y >= b, p >= 0.
inline double fixed_time_expectation(const OccupationEngine& engine, double x, double b, double y, double p, double t,
                                     int terms = kDefaultStehfestTerms) {
    if (!(p >= 0.0)) throw ValidationError("fixed_time_expectation requires p >= 0");
    TransformHandle h{[&](double q) { return engine.v_q(x, q, p, b, y) / q; }};
    return invert(h, t, terms);
}

/// E_x[exp(-p int_0^t 1{X_s <= b} ds)], p > 0.
inline double fixed_time_occupation_lt(const OccupationEngine& engine, double x, double b, double p, double t,
                                       int terms = kDefaultStehfestTerms) {
    TransformHandle h{[&](double q) { return engine.occupation_lt(x, b, p, q) / q; }};
    return invert(h, t, terms);
}

/// Density in y of E_x[exp(-p int_0^t 1{X_s <= b} ds) 1{X_t in dy}], p > 0.
inline double fixed_time_density(const OccupationEngine& engine, double x, double b, double y, double p, double t,
                                 int terms = kDefaultStehfestTerms) {
    TransformHandle h{[&](double q) { return engine.joint_density(x, b, y, p, q) / q; }};
    return invert(h, t, terms);
}

/// Density of X_t started at x (no occupation weight), from the killed law.
inline double fixed_time_transition_density(const OccupationEngine& engine, double x, double y, double t,
                                            int terms = kDefaultStehfestTerms) {
    TransformHandle h{[&](double q) { return engine.killed_density(q)(y - x) / q; }};
    return invert(h, t, terms);
}

}  // namespace occtime

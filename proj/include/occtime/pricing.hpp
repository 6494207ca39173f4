#pragma once

// Step options on a log-price following a rational-jump diffusion: payoffs discounted by
// exp(-rho * time spent at or below the log-level b before maturity).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "occtime/errors.hpp"
#include "occtime/inversion.hpp"
#include "occtime/occupation.hpp"

namespace occtime {

enum class Payoff { Call, Put, Digital };

inline Payoff parse_payoff(const std::string& s) {
    if (s == "call") return Payoff::Call;
    if (s == "put") return Payoff::Put;
    if (s == "digital") return Payoff::Digital;
    throw ValidationError("payoff must be one of call, put, digital");
}

struct StepOptionSpec {
    double spot = 1.0;      // S_0 = exp(x)
    double strike = 1.0;
    double maturity = 1.0;
    double rate = 0.0;      // discount rate r
    double rho = 0.0;       // occupation penalty, >= 0
    double barrier = 0.0;   // log-level b
    Payoff payoff = Payoff::Call;
    int terms = kDefaultStehfestTerms;
};

inline double payoff_value(Payoff kind, double s, double strike) {
    switch (kind) {
        case Payoff::Call: return std::max(s - strike, 0.0);
        case Payoff::Put: return std::max(strike - s, 0.0);
        case Payoff::Digital: return s > strike ? 1.0 : 0.0;
    }
    return 0.0;
}

/// e^{-rT} int payoff(e^y) g_T(y) dy, with g_T the occupation-weighted density of X_T.
inline double price_step_option(const OccupationEngine& engine, const StepOptionSpec& spec) {
    if (!(spec.spot > 0.0) || !(spec.strike > 0.0)) throw ValidationError("spot and strike must be positive");
    if (!(spec.maturity > 0.0)) throw ValidationError("maturity must be positive");
    if (!(spec.rho >= 0.0)) throw ValidationError("occupation penalty rho must be nonnegative");
    const double x = std::log(spec.spot), b = spec.barrier, T = spec.maturity;

    auto density = [&](double y) {
        return spec.rho == 0.0 ? fixed_time_transition_density(engine, x, y, T, spec.terms)
                               : fixed_time_density(engine, x, b, y, spec.rho, T, spec.terms);
    };
    auto integrand = [&](double y) { return payoff_value(spec.payoff, std::exp(y), spec.strike) * density(y); };

    // Integration window: 12 standard deviations of X_T around its mean.
    const LaplaceExponent& psi = engine.exponent();
    const double h = 1e-4;
    const double var = (psi(h) - 2.0 * psi(0.0) + psi(-h)) / (h * h);
    const double mean = x + psi.derivative(0.0) * T;
    const double half = 12.0 * std::sqrt(var * T);
    double lo = mean - half, hi = mean + half;
    const double k = std::log(spec.strike);
    if (spec.payoff == Payoff::Put) hi = std::min(hi, k);
    else lo = std::max(lo, k);
    if (!(hi > lo)) return 0.0;

    std::vector<double> cuts{lo};
    for (double c : {b, x, k})
        if (c > lo && c < hi) cuts.push_back(c);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1], 6,
                                                                               1e-9);
    }
    return std::exp(-spec.rate * T) * total;
}

}  // namespace occtime

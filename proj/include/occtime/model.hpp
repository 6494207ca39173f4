#pragma once

// Rational-jump diffusions  X_t = x + mu t + sigma W_t + (up jumps) - (down jumps)
// with mixed-Erlang jump sizes, and their Laplace exponent psi(s) = ln E[e^{s X_1}].

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "occtime/errors.hpp"
#include "occtime/polynomial.hpp"

namespace occtime {

/// One Erlang family sharing the base rate: sum_j w_j Erlang(j, rate) density, j = 1..weights.size().
struct ErlangComponent {
    double rate = 1.0;
    std::vector<double> weights{1.0};

    unsigned multiplicity() const { return unsigned(weights.size()); }
    friend bool operator==(const ErlangComponent&, const ErlangComponent&) = default;
};

struct RationalJumpModel {
    double mu = 0.0;
    double sigma = 1.0;
    double lambda_plus = 0.0;
    std::vector<ErlangComponent> up;
    double lambda_minus = 0.0;
    std::vector<ErlangComponent> down;

    /// M - 1: total multiplicity of the up-jump poles.
    unsigned up_order() const {
        unsigned n = 0;
        for (const auto& c : up) n += c.multiplicity();
        return n;
    }
    unsigned down_order() const {
        unsigned n = 0;
        for (const auto& c : down) n += c.multiplicity();
        return n;
    }
    bool spectrally_negative() const { return lambda_plus == 0.0 || up.empty(); }

    friend bool operator==(const RationalJumpModel&, const RationalJumpModel&) = default;
};

namespace detail {

inline double erlang_mixture_density(const std::vector<ErlangComponent>& comps, double z) {
    if (z <= 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& c : comps) {
        double term = c.rate * std::exp(-c.rate * z);  // rate^j z^{j-1} e^{-rate z} / (j-1)!
        for (std::size_t j = 0; j < c.weights.size(); ++j) {
            acc += c.weights[j] * term;
            term *= c.rate * z / double(j + 1);
        }
    }
    return acc;
}

inline void validate_side(const std::vector<ErlangComponent>& comps, double intensity, const char* side,
                          std::size_t grid_points) {
    if (!(intensity >= 0.0) || !std::isfinite(intensity))
        throw ValidationError(std::string(side) + " jump intensity must be finite and nonnegative");
    if (intensity == 0.0) return;
    if (comps.empty())
        throw ValidationError(std::string(side) + " jump intensity is positive but no components are given");
    double total = 0.0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto& c = comps[i];
        if (!(c.rate > 0.0) || !std::isfinite(c.rate))
            throw ValidationError(std::string(side) + " jump rates must be positive");
        if (c.weights.empty())
            throw ValidationError(std::string(side) + " component needs at least one weight");
        for (double w : c.weights) {
            if (!std::isfinite(w)) throw ValidationError("non-finite jump weight");
            total += w;
        }
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(comps[j].rate - c.rate) <= 1e-9 * std::max(comps[j].rate, c.rate))
                throw ValidationError(std::string(side) + " jump rates must be pairwise distinct");
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << side << " jump weights sum to " << total << ", expected 1";
        throw ValidationError(os.str());
    }
    // Pointwise nonnegativity on log-spaced grids around each component's scale.
    for (const auto& c : comps) {
        const double lo = std::log(1e-3 / c.rate), hi = std::log(50.0 / c.rate);
        for (std::size_t k = 0; k < grid_points; ++k) {
            const double z = std::exp(lo + (hi - lo) * double(k) / double(grid_points - 1));
            const double d = erlang_mixture_density(comps, z);
            if (d < -1e-12 * c.rate)
                throw ValidationError(std::string(side) + " jump density is negative at z = " + std::to_string(z));
        }
    }
}

}  // namespace detail

/// Density of one up-jump (z > 0).
inline double up_jump_density(const RationalJumpModel& m, double z) {
    return detail::erlang_mixture_density(m.up, z);
}
inline double down_jump_density(const RationalJumpModel& m, double z) {
    return detail::erlang_mixture_density(m.down, z);
}

/// Throws ValidationError unless the model satisfies every invariant of the family.
/// `grid_points` is the per-component size of the density-positivity grid.
inline void validate(const RationalJumpModel& m, std::size_t grid_points = 512) {
    if (!std::isfinite(m.mu)) throw ValidationError("drift must be finite");
    if (!(m.sigma > 0.0) || !std::isfinite(m.sigma)) throw ValidationError("volatility sigma must be positive");
    detail::validate_side(m.up, m.lambda_plus, "up", grid_points);
    detail::validate_side(m.down, m.lambda_minus, "down", grid_points);
}

/// Validated copy with the component lists of zero-intensity sides cleared.
inline RationalJumpModel normalized(RationalJumpModel m) {
    validate(m);
    if (m.lambda_plus == 0.0) m.up.clear();
    if (m.lambda_minus == 0.0) m.down.clear();
    return m;
}

/// Model of -X: drift negated, up and down sides swapped.
inline RationalJumpModel dual_model(const RationalJumpModel& m) {
    validate(m);
    RationalJumpModel d;
    d.mu = -m.mu;
    d.sigma = m.sigma;
    d.lambda_plus = m.lambda_minus;
    d.up = m.down;
    d.lambda_minus = m.lambda_plus;
    d.down = m.up;
    return d;
}

/// psi(s) = ln E[e^{s X_1}] as a rational function, with a direct evaluator.
class LaplaceExponent {
public:
    explicit LaplaceExponent(const RationalJumpModel& model) : model_(normalized(model)) { build(); }

    const RationalJumpModel& model() const { return model_; }

    cplx operator()(cplx s) const {
        const auto& m = model_;
        cplx v = m.mu * s + 0.5 * m.sigma * m.sigma * s * s;
        if (!m.up.empty()) {
            cplx acc = -1.0;
            for (const auto& c : m.up) {
                const cplx ratio = c.rate / (c.rate - s);
                cplx pw = ratio;
                for (double w : c.weights) {
                    acc += w * pw;
                    pw *= ratio;
                }
            }
            v += m.lambda_plus * acc;
        }
        if (!m.down.empty()) {
            cplx acc = -1.0;
            for (const auto& c : m.down) {
                const cplx ratio = c.rate / (c.rate + s);
                cplx pw = ratio;
                for (double w : c.weights) {
                    acc += w * pw;
                    pw *= ratio;
                }
            }
            v += m.lambda_minus * acc;
        }
        return v;
    }
    double operator()(double s) const { return (*this)(cplx(s)).real(); }

    cplx derivative(cplx s) const {
        const auto& m = model_;
        cplx v = m.mu + m.sigma * m.sigma * s;
        for (const auto& c : m.up) {
            const cplx ratio = c.rate / (c.rate - s);
            cplx pw = ratio / (c.rate - s);
            for (std::size_t j = 0; j < c.weights.size(); ++j) {
                v += m.lambda_plus * c.weights[j] * double(j + 1) * pw;
                pw *= ratio;
            }
        }
        for (const auto& c : m.down) {
            const cplx ratio = c.rate / (c.rate + s);
            cplx pw = ratio / (c.rate + s);
            for (std::size_t j = 0; j < c.weights.size(); ++j) {
                v -= m.lambda_minus * c.weights[j] * double(j + 1) * pw;
                pw *= ratio;
            }
        }
        return v;
    }
    double derivative(double s) const { return derivative(cplx(s)).real(); }

    /// psi = numerator / denominator, denominator = prod (eta_k - s)^{m_k} prod (theta_k + s)^{n_k}.
    const RealPolynomial& numerator() const { return numerator_; }
    const RealPolynomial& denominator() const { return denominator_; }

    /// Numerator of psi(s) - q over the same denominator.
    RealPolynomial shifted_numerator(double q) const { return numerator_ - q * denominator_; }

    /// Real part of the pole closest to the origin on each side: psi is analytic on (-down, up).
    double up_pole() const { return min_rate(model_.up); }
    double down_pole() const { return min_rate(model_.down); }

    /// (location, multiplicity): eta_k on the right, -theta_k on the left.
    std::vector<std::pair<double, unsigned>> poles() const {
        std::vector<std::pair<double, unsigned>> out;
        for (const auto& c : model_.up) out.emplace_back(c.rate, c.multiplicity());
        for (const auto& c : model_.down) out.emplace_back(-c.rate, c.multiplicity());
        return out;
    }

    /// prod over up components of (s - eta_k)^{m_k}, and prod over down of (s + theta_k)^{n_k}.
    RealPolynomial up_pole_polynomial() const {
        RealPolynomial p = RealPolynomial::constant(1.0);
        for (const auto& c : model_.up) p = p * RealPolynomial::linear(-c.rate, 1.0).pow(c.multiplicity());
        return p;
    }
    RealPolynomial down_pole_polynomial() const {
        RealPolynomial p = RealPolynomial::constant(1.0);
        for (const auto& c : model_.down) p = p * RealPolynomial::linear(c.rate, 1.0).pow(c.multiplicity());
        return p;
    }

private:
    static double min_rate(const std::vector<ErlangComponent>& comps) {
        double r = std::numeric_limits<double>::infinity();
        for (const auto& c : comps) r = std::min(r, c.rate);
        return r;
    }

    void build() {
        const auto& m = model_;
        std::vector<RealPolynomial> up_factors, down_factors;
        for (const auto& c : m.up) up_factors.push_back(RealPolynomial::linear(c.rate, -1.0).pow(c.multiplicity()));
        for (const auto& c : m.down) down_factors.push_back(RealPolynomial::linear(c.rate, 1.0).pow(c.multiplicity()));
        auto product_except = [](const std::vector<RealPolynomial>& fs, std::size_t skip) {
            RealPolynomial p = RealPolynomial::constant(1.0);
            for (std::size_t i = 0; i < fs.size(); ++i)
                if (i != skip) p = p * fs[i];
            return p;
        };
        const RealPolynomial up_all = product_except(up_factors, up_factors.size());
        const RealPolynomial down_all = product_except(down_factors, down_factors.size());
        denominator_ = up_all * down_all;

        const double jump_rate = (m.up.empty() ? 0.0 : m.lambda_plus) + (m.down.empty() ? 0.0 : m.lambda_minus);
        RealPolynomial num =
            RealPolynomial(std::vector<double>{-jump_rate, m.mu, 0.5 * m.sigma * m.sigma}) * denominator_;
        for (std::size_t k = 0; k < m.up.size(); ++k) {
            const auto& c = m.up[k];
            const RealPolynomial others = product_except(up_factors, k) * down_all;
            RealPolynomial inner;
            double eta_pow = 1.0;
            for (unsigned j = 1; j <= c.multiplicity(); ++j) {
                eta_pow *= c.rate;
                inner = inner + (c.weights[j - 1] * eta_pow) *
                                    RealPolynomial::linear(c.rate, -1.0).pow(c.multiplicity() - j);
            }
            num = num + m.lambda_plus * (inner * others);
        }
        for (std::size_t k = 0; k < m.down.size(); ++k) {
            const auto& c = m.down[k];
            const RealPolynomial others = up_all * product_except(down_factors, k);
            RealPolynomial inner;
            double th_pow = 1.0;
            for (unsigned j = 1; j <= c.multiplicity(); ++j) {
                th_pow *= c.rate;
                inner = inner + (c.weights[j - 1] * th_pow) *
                                    RealPolynomial::linear(c.rate, 1.0).pow(c.multiplicity() - j);
            }
            num = num + m.lambda_minus * (inner * others);
        }
        numerator_ = num;
    }

    RationalJumpModel model_;
    RealPolynomial numerator_;
    RealPolynomial denominator_;
};

inline LaplaceExponent build_exponent(const RationalJumpModel& model) { return LaplaceExponent(model); }

/// A rational model with no positive jumps; the scale-function engine accepts only these.
class SpectrallyNegativeModel {
public:
    explicit SpectrallyNegativeModel(const RationalJumpModel& m) : model_(normalized(m)) {
        if (!model_.up.empty())
            throw ValidationError("spectrally negative model must not have positive jumps (lambda_plus = 0)");
    }
    const RationalJumpModel& model() const { return model_; }

private:
    RationalJumpModel model_;
};

}  // namespace occtime

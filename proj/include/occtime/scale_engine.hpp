#pragma once

// Spectrally negative route: Phi(q), the q-scale function W^{(q)} as an exact exponential
// mixture, the kernels built from it, and the joint density
//   E_x[exp(-p int_0^{e(q)} 1{X_s < b} ds) 1{X_{e(q)} in dy}] / dy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "occtime/errors.hpp"
#include "occtime/expmix.hpp"
#include "occtime/model.hpp"
#include "occtime/occupation.hpp"
#include "occtime/wiener_hopf.hpp"

namespace occtime {

struct ScaleFunction {
    double q = 0.0;
    double phi = 0.0;    // Phi(q)
    ExpMixFunction w;    // W^{(q)} on [0, inf)

    double operator()(double x) const { return x < 0.0 ? 0.0 : w(x); }
};

namespace detail {

inline void require_spectrally_negative(const LaplaceExponent& psi) {
    if (!psi.model().up.empty())
        throw ValidationError("the scale-function route requires a model without positive jumps");
}

}  // namespace detail

/// Largest root of psi(lambda) = q on [0, inf), by Newton from the right with a bisection guard.
inline double phi(const LaplaceExponent& psi, double q) {
    detail::require_spectrally_negative(psi);
    if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("phi requires q > 0");
    double lo = 0.0, hi = 1.0;
    while (psi(hi) <= q) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw NumericalError("phi: no root below 1e12");
    }
    double s = hi;
    for (int it = 0; it < 200; ++it) {
        const double f = psi(s) - q;
        if (f > 0.0) hi = s;
        else lo = s;
        if (f == 0.0 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
        const double d = psi.derivative(s);
        double next = s - f / d;
        if (!(d > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-15 * s) {
            s = next;
            break;
        }
        s = next;
    }
    return s;
}

/// W^{(q)} by partial fractions of 1/(psi(s) - q): sum over the roots theta of e^{theta x}/psi'(theta).
inline ScaleFunction scale_w(const LaplaceExponent& psi, double q, RootPolicy policy = RootPolicy::Perturb) {
    detail::require_spectrally_negative(psi);
    const RootSystem rs = solve_roots(psi, q, policy);
    if (rs.betas.size() != 1) throw NumericalError("spectrally negative exponent must have a single positive root");
    ScaleFunction sf;
    sf.q = rs.q;
    sf.phi = rs.betas[0].real();
    std::vector<ExpTerm> terms;
    terms.push_back({1.0 / psi.derivative(rs.betas[0]), -rs.betas[0], 0});
    for (const auto& g : rs.gammas) terms.push_back({1.0 / psi.derivative(-g), g, 0});
    sf.w = ExpMixFunction(std::move(terms));
    return sf;
}

/// The spectrally negative kernels at (q, p): F1, F2hat, f2hat and k_q.
struct SnKernels {
    double q = 0.0, p = 0.0;
    double phi_q = 0.0, phi_xi = 0.0;
    double psi_prime_phi_q = 0.0;  // psi'(Phi(q))
    ScaleFunction w_q, w_xi;
    FKernel F1;
    FKernel F2hat;
    ExpMixFunction f2hat;    // hat f_2 on [0, inf)
    ExpMixFunction kq_neg;   // u -> k_q(-u) on [0, inf); k_q vanishes on (0, inf)
    ExpMixFunction exp_xi_w_q;  // (e^{Phi(p+q) .} * W^{(q)})
    ExpMixFunction exp_q_w_xi;  // (e^{Phi(q) .} * W^{(p+q)})

    double kq(double x) const { return x > 0.0 ? 0.0 : kq_neg(-x); }

    /// Density of K_q.
    double Kq_density(double x) const {
        const double lead = q / p * phi_xi * (phi_xi / phi_q - 1.0) * std::exp(-phi_xi * x);
        return lead - q * phi_xi / phi_q * kq(x);
    }
};

inline SnKernels sn_kernels(const LaplaceExponent& psi, double q, double p, RootPolicy policy = RootPolicy::Perturb) {
    detail::require_spectrally_negative(psi);
    if (!(p > 0.0) || !(q > 0.0)) throw ValidationError("sn_kernels requires p, q > 0");
    SnKernels k;
    k.q = q;
    k.p = p;
    k.w_q = scale_w(psi, q, policy);
    k.w_xi = scale_w(psi, p + q, policy);
    k.phi_q = k.w_q.phi;
    k.phi_xi = k.w_xi.phi;
    k.psi_prime_phi_q = psi.derivative(k.phi_q);
    const double a = k.phi_q, c = k.phi_xi, xi = p + q;

    k.F1.tag = FKernelKind::F1;
    k.F1.atom_mass = a / c;
    k.F1.density = ExpMixFunction::exponential((c - a) / c * a, a);

    k.exp_xi_w_q = convolve(ExpMixFunction::exponential(1.0, -c), k.w_q.w);
    k.exp_q_w_xi = convolve(ExpMixFunction::exponential(1.0, -a), k.w_xi.w);
    k.f2hat = k.w_xi.w + (a - c) * k.exp_q_w_xi;
    k.kq_neg = k.w_q.w + (c - a) * k.exp_xi_w_q;

    k.F2hat.tag = FKernelKind::F2hat;
    k.F2hat.atom_mass = xi * a / (q * c);
    k.F2hat.density = ExpMixFunction::exponential(xi * a * (a - c) / (q * c), -a) + (xi * p * a / (q * c)) * k.f2hat;
    return k;
}

/// Scale-function computations for one spectrally negative model.
class ScaleEngine {
public:
    explicit ScaleEngine(const SpectrallyNegativeModel& model, RootPolicy policy = RootPolicy::Perturb)
        : psi_(model.model()), policy_(policy) {}

    const LaplaceExponent& exponent() const { return psi_; }

    double phi(double q) const { return occtime::phi(psi_, q); }
    ScaleFunction scale_w(double q) const { return occtime::scale_w(psi_, q, policy_); }
    SnKernels kernels(double q, double p) const { return sn_kernels(psi_, q, p, policy_); }

    /// H^{(p+q,-p)}(u) = e^{Phi(p+q) u} - p (e^{Phi(p+q) .} * W^{(q)})(u).
    static double h_xi_minus_p(const SnKernels& k, double u) {
        double v = std::exp(k.phi_xi * u);
        if (u > 0.0) v -= k.p * k.exp_xi_w_q(u);
        return v;
    }
    /// H^{(q,p)}(v) = e^{Phi(q) v} + p (e^{Phi(q) .} * W^{(p+q)})(v).
    static double h_q_p(const SnKernels& k, double v) {
        double r = std::exp(k.phi_q * v);
        if (v > 0.0) r += k.p * k.exp_q_w_xi(v);
        return r;
    }
    /// W^{(q,p)}_a(c) = W^{(q)}(c) + p int_a^c W^{(p+q)}(c - z) W^{(q)}(z) dz.
    static double w_qp(const SnKernels& k, double a, double c) {
        double v = k.w_q(c);
        const double lo = std::max(a, 0.0);
        if (c > lo) v += k.p * detail::convolution_segment(k.w_xi.w, TwoSidedExpMix{k.w_q.w, {}}, c, lo, c);
        return v;
    }

    double joint_density(double x, double b, double y, double p, double q) const {
        const SnKernels k = kernels(q, p);
        return joint_density(k, x, b, y);
    }

    static double joint_density(const SnKernels& k, double x, double b, double y) {
        // (q/p)(Phi(p+q) - Phi(q)), expanded to first order in p when p is tiny.
        const double ratio = k.p < 1e-4 ? k.q / k.psi_prime_phi_q : k.q / k.p * (k.phi_xi - k.phi_q);
        return -k.q * w_qp(k, x - b, x - y) + ratio * h_xi_minus_p(k, x - b) * h_q_p(k, b - y);
    }

private:
    LaplaceExponent psi_;
    RootPolicy policy_;
};

}  // namespace occtime

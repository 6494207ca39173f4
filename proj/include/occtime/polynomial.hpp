#pragma once

// Dense polynomials in the monomial basis and companion-matrix root finding.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "occtime/errors.hpp"

namespace occtime {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxPolynomialDegree = 64;

/// Polynomial with coefficients stored lowest power first.
template <class T>
class Polynomial {
public:
    Polynomial() : coeffs_{T{0}} {}
    explicit Polynomial(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) coeffs_.push_back(T{0});
        trim();
    }
    static Polynomial constant(T c) { return Polynomial(std::vector<T>{c}); }
    /// (a + b s)
    static Polynomial linear(T a, T b) { return Polynomial(std::vector<T>{a, b}); }

    static Polynomial from_roots(std::span<const T> roots) {
        Polynomial p = constant(T{1});
        for (const T& r : roots) p = p * linear(-r, T{1});
        return p;
    }

    std::size_t degree() const { return coeffs_.size() - 1; }
    const std::vector<T>& coefficients() const { return coeffs_; }
    T operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : T{0}; }
    T leading() const { return coeffs_.back(); }

    template <class U>
    auto operator()(const U& s) const {
        using R = decltype(T{} * U{});
        R acc{0};
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + R(*it);
        return acc;
    }

    Polynomial derivative() const {
        if (coeffs_.size() == 1) return constant(T{0});
        std::vector<T> d(coeffs_.size() - 1);
        for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * T(double(i));
        return Polynomial(std::move(d));
    }

    Polynomial pow(unsigned n) const {
        Polynomial r = constant(T{1});
        for (unsigned i = 0; i < n; ++i) r = r * *this;
        return r;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<T> c(std::max(a.coeffs_.size(), b.coeffs_.size()), T{0});
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        std::vector<T> c(std::max(a.coeffs_.size(), b.coeffs_.size()), T{0});
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] - b[i];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.degree() + b.degree() > kMaxPolynomialDegree)
            throw ValidationError("polynomial degree exceeds the supported maximum of 64");
        std::vector<T> c(a.coeffs_.size() + b.coeffs_.size() - 1, T{0});
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(T k, const Polynomial& a) {
        std::vector<T> c = a.coeffs_;
        for (auto& v : c) v *= k;
        return Polynomial(std::move(c));
    }

private:
    void trim() {
        while (coeffs_.size() > 1 && coeffs_.back() == T{0}) coeffs_.pop_back();
    }
    std::vector<T> coeffs_;
};

using RealPolynomial = Polynomial<double>;

/// All complex roots of p via the eigenvalues of its companion matrix.
template <class T>
std::vector<cplx> companion_roots(const Polynomial<T>& p) {
    const std::size_t n = p.degree();
    if (n == 0) return {};
    const cplx lead = cplx(p.leading());
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(Eigen::Index(n), Eigen::Index(n));
    for (std::size_t i = 1; i < n; ++i) companion(Eigen::Index(i), Eigen::Index(i - 1)) = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        companion(Eigen::Index(i), Eigen::Index(n - 1)) = -cplx(p[i]) / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericalError("companion eigenvalue solver failed");
    std::vector<cplx> roots(n);
    for (std::size_t i = 0; i < n; ++i) roots[i] = solver.eigenvalues()(Eigen::Index(i));
    return roots;
}

}  // namespace occtime

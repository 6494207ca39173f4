#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace occtime;
using namespace occtime::testing;

TEST(Roots, BrownianMotion) {
    const auto rs = solve_roots(LaplaceExponent(brownian()), 2.0);
    ASSERT_EQ(rs.betas.size(), 1u);
    ASSERT_EQ(rs.gammas.size(), 1u);
    EXPECT_NEAR(rs.betas[0].real(), 2.0, 1e-13);
    EXPECT_NEAR(rs.gammas[0].real(), 2.0, 1e-13);
    EXPECT_FALSE(rs.perturbed());
}

TEST(Roots, DriftedBrownianMotion) {
    const auto rs = solve_roots(LaplaceExponent(brownian(1.0, std::sqrt(2.0))), 2.0);
    EXPECT_NEAR(rs.betas.at(0).real(), 1.0, 1e-13);
    EXPECT_NEAR(rs.gammas.at(0).real(), 2.0, 1e-13);
}

TEST(Roots, KouInterlacing) {
    const LaplaceExponent psi(kou());
    const auto rs = solve_roots(psi, 1.0);
    ASSERT_EQ(rs.betas.size(), 2u);
    ASSERT_EQ(rs.gammas.size(), 2u);
    EXPECT_GT(rs.betas[0].real(), 0.0);
    EXPECT_LT(rs.betas[0].real(), 10.0);
    EXPECT_GT(rs.betas[1].real(), 10.0);
    EXPECT_GT(rs.gammas[0].real(), 0.0);
    EXPECT_LT(rs.gammas[0].real(), 5.0);
    EXPECT_GT(rs.gammas[1].real(), 5.0);
    for (const auto& b : rs.betas) EXPECT_LE(std::abs(psi(b) - 1.0), 1e-10 * 2.0);
    for (const auto& g : rs.gammas) EXPECT_LE(std::abs(psi(-g) - 1.0), 1e-10 * 2.0);
}

TEST(Roots, RandomModelsCountsOrderingResiduals) {
    std::mt19937_64 rng(101);
    for (int n = 0; n < 100; ++n) {
        const auto m = random_model(rng);
        const LaplaceExponent psi(m);
        for (double q : {0.1, 1.0, 10.0}) {
            const auto rs = solve_roots(psi, q);
            ASSERT_EQ(rs.betas.size(), m.up_order() + 1);
            ASSERT_EQ(rs.gammas.size(), m.down_order() + 1);
            EXPECT_EQ(rs.betas[0].imag(), 0.0);
            EXPECT_EQ(rs.gammas[0].imag(), 0.0);
            for (std::size_t k = 1; k < rs.betas.size(); ++k) EXPECT_LT(rs.betas[0].real(), rs.betas[k].real());
            for (std::size_t k = 1; k < rs.gammas.size(); ++k) EXPECT_LT(rs.gammas[0].real(), rs.gammas[k].real());
            for (const auto& b : rs.betas)
                EXPECT_LE(std::abs(psi(b) - rs.q), 1e-10 * (1.0 + q) * std::max(1.0, std::norm(b)));
            for (const auto& g : rs.gammas)
                EXPECT_LE(std::abs(psi(-g) - rs.q), 1e-10 * (1.0 + q) * std::max(1.0, std::norm(g)));
            // conjugate closure
            for (const auto& b : rs.betas) {
                if (b.imag() == 0.0) continue;
                bool found = false;
                for (const auto& c : rs.betas) found = found || c == std::conj(b);
                EXPECT_TRUE(found);
            }
        }
    }
}

TEST(Roots, RejectsNonPositiveRate) {
    EXPECT_THROW(solve_roots(LaplaceExponent(brownian()), 0.0), ValidationError);
    EXPECT_THROW(solve_roots(LaplaceExponent(brownian()), -1.0), ValidationError);
}

TEST(Factors, BrownianMotion) {
    const auto f = factors_at(LaplaceExponent(brownian()), 2.0);
    EXPECT_NEAR(f.C().at(0).real(), 2.0, 1e-13);
    for (double s : {0.0, 1.0, 3.0}) EXPECT_NEAR(f.psi_plus(s).real(), 2.0 / (s + 2.0), 1e-14);
}

TEST(Factors, NormalisationAndMass) {
    std::mt19937_64 rng(7);
    for (int n = 0; n < 40; ++n) {
        const LaplaceExponent psi(random_model(rng));
        for (double q : {0.1, 1.0, 10.0}) {
            const auto f = factors_at(psi, q);
            cplx sc = 0.0, sd = 0.0;
            for (std::size_t k = 0; k < f.C().size(); ++k) sc += f.C()[k] / f.betas()[k];
            for (std::size_t k = 0; k < f.D().size(); ++k) sd += f.D()[k] / f.gammas()[k];
            EXPECT_LT(std::abs(sc - 1.0), 1e-12);
            EXPECT_LT(std::abs(sd - 1.0), 1e-12);
            EXPECT_NEAR(f.sup_density().total_mass(), 1.0, 1e-12);
            EXPECT_NEAR(f.inf_density().total_mass(), 1.0, 1e-12);
            for (double s : {0.3, 2.0, 11.0}) {
                const cplx z(s, 0.7);
                EXPECT_LT(std::abs(f.psi_plus(z) - f.psi_plus_product(z)), 1e-10 * std::abs(f.psi_plus_product(z)));
                EXPECT_LT(std::abs(f.psi_minus(z) - f.psi_minus_product(z)),
                          1e-10 * std::abs(f.psi_minus_product(z)));
            }
        }
    }
}

TEST(Factors, KouProductIdentity) {
    const LaplaceExponent psi(kou());
    const auto f = factors_at(psi, 1.0);
    const cplx i(0.0, 1.0);
    for (double phi = -50.0; phi <= 50.0; phi += 1.0) {
        const cplx lhs = f.psi_plus(-i * phi) * f.psi_minus(i * phi);
        const cplx rhs = 1.0 / (1.0 - psi(i * phi));
        EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(rhs));
    }
}

TEST(Factors, SupDensityMatchesTransform) {
    const auto f = factors_at(LaplaceExponent(kou()), 1.0);
    for (double s : {0.5, 2.0}) {
        const double num = integrate([&](double x) { return std::exp(-s * x) * f.sup_density()(x); }, 0.0, 200.0);
        EXPECT_NEAR(num, f.psi_plus(s).real(), 1e-12);
    }
}

TEST(FirstPassage, BrownianAtom) {
    for (double q : {0.5, 2.0}) {
        const auto f = factors_at(LaplaceExponent(brownian()), q);
        for (double x : {0.0, 0.4, 1.5}) {
            const auto up = first_passage_up(f, x);
            EXPECT_NEAR(up.atom, std::exp(-std::sqrt(2 * q) * x), 1e-13);
            EXPECT_TRUE(up.density.terms().empty());
            const auto dn = first_passage_down(f, -x);
            EXPECT_NEAR(dn.atom, std::exp(-std::sqrt(2 * q) * x), 1e-13);
        }
    }
}

TEST(FirstPassage, ZeroLevelHasUnitMass) {
    std::mt19937_64 rng(17);
    for (int n = 0; n < 20; ++n) {
        const auto f = factors_at(LaplaceExponent(random_model(rng)), 1.0);
        EXPECT_NEAR(first_passage_up(f, 0.0).total_mass(), 1.0, 1e-11);
        EXPECT_NEAR(first_passage_down(f, 0.0).total_mass(), 1.0, 1e-11);
    }
}

TEST(FirstPassage, MassDecreasesWithLevel) {
    const auto f = factors_at(LaplaceExponent(kou()), 1.0);
    double prev = 1.0 + 1e-12;
    for (double x : {0.0, 0.1, 0.5, 1.0, 3.0}) {
        const double m = first_passage_up(f, x).total_mass();
        EXPECT_LE(m, prev);
        EXPECT_GE(m, 0.0);
        prev = m;
    }
}

TEST(FirstPassage, KouOvershootIsExponential) {
    const auto f = factors_at(LaplaceExponent(kou()), 1.0);
    for (double x : {0.2, 1.0}) {
        const auto law = first_passage_up(f, x);
        ASSERT_EQ(law.density.terms().size(), 1u);
        const double jump_mass = law.density.total_mass();
        for (double y : {0.0, 0.1, 0.5})
            EXPECT_NEAR(law.density(y) / jump_mass, 10.0 * std::exp(-10.0 * y), 1e-10);
    }
}

// Discounted first passage at level x for the sup: P(sup_{e(q)} >= x) = E[e^{-q tau_x}].
TEST(FirstPassage, MassMatchesSupTail) {
    const auto f = factors_at(LaplaceExponent(kou()), 1.5);
    for (double x : {0.0, 0.3, 2.0})
        EXPECT_NEAR(first_passage_up(f, x).total_mass(),
                    f.sup_density().integral(x, std::numeric_limits<double>::infinity()), 1e-12);
}

TEST(FirstPassage, DualConsistency) {
    std::mt19937_64 rng(23);
    for (int n = 0; n < 10; ++n) {
        const auto m = random_model(rng);
        const auto f = factors_at(LaplaceExponent(m), 0.7);
        const auto fd = factors_at(LaplaceExponent(dual_model(m)), 0.7);
        for (double x : {-0.8, -0.1}) {
            const auto dn = first_passage_down(f, x);
            const auto up = first_passage_up(fd, -x);
            EXPECT_NEAR(dn.atom, up.atom, 1e-12);
            for (double y : {0.0, 0.2, 1.0}) EXPECT_NEAR(dn.density(y), up.density(y), 1e-12);
        }
    }
}

TEST(FirstPassage, RejectsWrongSide) {
    const auto f = factors_at(LaplaceExponent(kou()), 1.0);
    EXPECT_THROW(first_passage_up(f, -0.1), ValidationError);
    EXPECT_THROW(first_passage_down(f, 0.1), ValidationError);
}

TEST(PartialFractions, InterpolationResidueSumVanishes) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3 + std::size_t(trial % 5);
        const std::size_t m = std::size_t(trial) % (n - 1);
        std::vector<cplx> xt(n), xh(m);
        for (auto& v : xt) v = cplx(u(rng), u(rng));
        for (auto& v : xh) v = cplx(u(rng), u(rng));
        double scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx num = 1.0, den = 1.0;
            for (const auto& h : xh) num *= xt[i] - h;
            for (std::size_t k = 0; k < n; ++k)
                if (k != i) den *= xt[i] - xt[k];
            scale = std::max(scale, std::abs(num / den));
        }
        EXPECT_LT(std::abs(interpolation_residue_sum(xt, xh)), 1e-9 * scale);
    }
}

TEST(PartialFractions, ReconstructsRationalFunction) {
    // (s^2 + 1) / ((s + 1)^2 (s + 3))
    const Polynomial<cplx> A(std::vector<cplx>{1.0, 0.0, 1.0});
    const std::vector<Pole> poles{{cplx(-1.0), 2}, {cplx(-3.0), 1}};
    const auto pf = partial_fractions(A, poles);
    for (double s : {0.0, 0.5, 2.0}) {
        cplx v = pf.constant;
        v += pf.coefficients[0][0] / (s + 1.0) + pf.coefficients[0][1] / ((s + 1.0) * (s + 1.0));
        v += pf.coefficients[1][0] / (s + 3.0);
        EXPECT_NEAR(v.real(), (s * s + 1) / ((s + 1) * (s + 1) * (s + 3)), 1e-14);
    }
}

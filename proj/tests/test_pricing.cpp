#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace occtime;
using namespace occtime::testing;

namespace {

// e^{-rT} E[payoff(e^{X_T})] with X_T ~ N(m, v).
double gaussian_price(Payoff kind, double m, double v, double K, double r, double T) {
    const double sd = std::sqrt(v), k = std::log(K);
    const double d = (m - k) / sd;
    const double fwd = std::exp(m + 0.5 * v);
    double val = 0.0;
    switch (kind) {
        case Payoff::Call: val = fwd * gaussian_cdf(d + sd) - K * gaussian_cdf(d); break;
        case Payoff::Put: val = K * gaussian_cdf(-d) - fwd * gaussian_cdf(-d - sd); break;
        case Payoff::Digital: val = gaussian_cdf(d); break;
    }
    return std::exp(-r * T) * val;
}

StepOptionSpec base_spec() {
    StepOptionSpec s;
    s.spot = 100.0;
    s.strike = 100.0;
    s.maturity = 1.0;
    s.rate = 0.03;
    s.barrier = std::log(90.0);
    return s;
}

}  // namespace

TEST(Pricing, ZeroPenaltyIsGaussianPrice) {
    const double mu = 0.01, sigma = 0.25;
    const OccupationEngine eng(brownian(mu, sigma));
    for (Payoff kind : {Payoff::Call, Payoff::Put, Payoff::Digital}) {
        auto s = base_spec();
        s.payoff = kind;
        const double ref = gaussian_price(kind, std::log(s.spot) + mu, sigma * sigma, s.strike, s.rate, 1.0);
        EXPECT_NEAR(price_step_option(eng, s) / ref, 1.0, 1e-3);
    }
}

TEST(Pricing, DecreasingInPenalty) {
    const OccupationEngine eng(kou());
    auto s = base_spec();
    s.barrier = std::log(100.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double rho : {0.0, 0.5, 2.0, 10.0, 50.0}) {
        s.rho = rho;
        const double v = price_step_option(eng, s);
        EXPECT_LT(v, prev);
        EXPECT_GT(v, 0.0);
        prev = v;
    }
}

TEST(Pricing, MonotoneInStrike) {
    const OccupationEngine eng(kou());
    auto s = base_spec();
    s.rho = 1.0;
    s.barrier = std::log(100.0);
    double call_prev = std::numeric_limits<double>::infinity(), put_prev = 0.0;
    for (double K : {90.0, 100.0, 110.0}) {
        s.strike = K;
        s.payoff = Payoff::Call;
        const double c = price_step_option(eng, s);
        s.payoff = Payoff::Put;
        const double p = price_step_option(eng, s);
        EXPECT_LT(c, call_prev);
        EXPECT_GT(p, put_prev);
        call_prev = c;
        put_prev = p;
    }
}

TEST(Pricing, FarBarrierHasNoEffect) {
    const double sigma = 0.2;
    const OccupationEngine eng(brownian(0.0, sigma));
    auto s = base_spec();
    const double plain = price_step_option(eng, s);
    s.barrier = std::log(s.spot) - 10.0 * sigma;
    s.rho = 1.0;
    EXPECT_NEAR(price_step_option(eng, s) / plain, 1.0, 1e-4);
}

TEST(Pricing, RejectsBadSpecs) {
    const OccupationEngine eng(kou());
    auto s = base_spec();
    s.rho = -1.0;
    EXPECT_THROW(price_step_option(eng, s), ValidationError);
    s = base_spec();
    s.strike = 0.0;
    EXPECT_THROW(price_step_option(eng, s), ValidationError);
    EXPECT_THROW(parse_payoff("straddle"), ValidationError);
    EXPECT_EQ(parse_payoff("put"), Payoff::Put);
}

TEST(ModelIo, RoundTripAndErrors) {
    const auto m = kou();
    EXPECT_EQ(model_from_json(model_to_json(m)), m);
    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"mu": 0})")), ValidationError);
    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"sigma": "x"})")), ValidationError);
    EXPECT_THROW(model_from_json(nlohmann::json::parse(
                     R"({"sigma": 1, "lambda_plus": 1, "up_components": [{"eta": 2, "weights": [0.5]}]})")),
                 ValidationError);
    EXPECT_THROW(load_model("/nonexistent/model.json"), IoError);
}

#include "doctest.h"

#include "xva/error.hpp"
#include "xva/market.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace xva;

namespace {

CreditParams table_credit() {
    CreditParams c;
    c.lambda_b = c.lambda_c = 0.04;
    c.recovery_b = c.recovery_c = 0.3;
    return c;
}

MarketParams table_market(std::size_t d) { return MarketParams::uniform(d, 100.0, 0.03, 0.0, 0.25, 0.2, 1.0, 40); }

} // namespace

TEST_CASE("derived constants for the reference credit setup") {
    const auto dc = derive_constants(table_market(2), table_credit());
    CHECK(dc.funding_spread == doctest::Approx(0.028).epsilon(1e-14));
    CHECK(dc.r0 == doctest::Approx(0.11).epsilon(1e-14));
    CHECK(dc.c_plus == doctest::Approx(0.024).epsilon(1e-14));
    CHECK(dc.c_minus == doctest::Approx(0.052).epsilon(1e-14));
}

TEST_CASE("zero intensities reduce to the riskless rate") {
    CreditParams c;
    c.recovery_b = 0.7;
    c.recovery_c = 0.1;
    const auto dc = derive_constants(table_market(2), c);
    CHECK(dc.c_plus == 0.0);
    CHECK(dc.c_minus == 0.0);
    CHECK(dc.funding_spread == 0.0);
    CHECK(dc.r0 == 0.03);
}

TEST_CASE("collateralized funding has no spread") {
    CreditParams c = table_credit();
    c.funding = FundingMode::Collateralized;
    const auto dc = derive_constants(table_market(2), c);
    CHECK(dc.funding_spread == 0.0);
    CHECK(dc.c_plus == doctest::Approx(0.052));
    CHECK(dc.c_minus == doctest::Approx(0.052));
}

TEST_CASE("source weights are bounded by the intensities") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> lam(0.0, 0.5), rec(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        CreditParams c;
        c.lambda_b = lam(gen);
        c.lambda_c = lam(gen);
        c.recovery_b = rec(gen);
        c.recovery_c = rec(gen);
        c.funding = i % 2 ? FundingMode::Collateralized : FundingMode::Uncollateralized;
        const auto dc = derive_constants(table_market(1), c);
        CHECK(dc.c_plus >= 0.0);
        CHECK(dc.c_minus >= 0.0);
        CHECK(dc.c_plus <= c.lambda_b + c.lambda_c * c.recovery_c + 1e-15);
        CHECK(dc.c_minus <= c.lambda_b + c.lambda_c + 1e-15);
    }
}

TEST_CASE("a time step too coarse for the implicit update is rejected") {
    CreditParams c = table_credit();
    c.lambda_c = 30.0;
    MarketParams m = table_market(1);
    m.num_steps = 1;
    CHECK_THROWS_AS(derive_constants(m, c), StabilityViolation);
}

TEST_CASE("credit parameter validation") {
    CreditParams c = table_credit();
    c.recovery_b = 1.5;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c = table_credit();
    c.lambda_c = -0.1;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("market parameter validation") {
    MarketParams m = table_market(2);
    CHECK_NOTHROW(m.validate());
    m.spot[1] = 0.0;
    CHECK_THROWS_AS(m.validate(), InvalidParameter);
    m = table_market(2);
    m.vols[0] = -0.1;
    CHECK_THROWS_AS(m.validate(), InvalidParameter);
    m = table_market(2);
    m.num_steps = 0;
    CHECK_THROWS_AS(m.validate(), InvalidParameter);
    m = table_market(3);
    m.correlation(0, 1) = m.correlation(1, 0) = -0.9;
    m.correlation(0, 2) = m.correlation(2, 0) = -0.9;
    m.correlation(1, 2) = m.correlation(2, 1) = -0.9;
    CHECK_THROWS_AS(m.validate(), NotPositiveDefinite);
}

TEST_CASE("payoff examples") {
    const std::vector<double> atm{100.0, 100.0};
    CHECK(eval_payoff(Payoff::geometric_put(2, 100.0), atm) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eval_payoff(Payoff::geometric_put(2, 100.0), std::vector<double>{81.0, 100.0}) == doctest::Approx(10.0));
    CHECK(eval_payoff(Payoff::call_on_max(3, 100.0), std::vector<double>{90.0, 110.0, 95.0}) == 10.0);
    CHECK(eval_payoff(Payoff::swaption_with_floor(2, -5.0), std::vector<double>{100.0, 108.0}) == -5.0);
    CHECK(eval_payoff(Payoff::swaption_with_floor(4, -5.0), std::vector<double>{104.0, 100.0, 99.0, 101.0}) ==
          doctest::Approx(2.0));
}

TEST_CASE("payoff construction and dimension checks") {
    CHECK_THROWS_AS(Payoff::swaption_with_floor(3, -5.0), InvalidParameter);
    CHECK_THROWS_AS(Payoff::swaption_with_floor(2, 1.0), InvalidParameter);
    const Payoff p = Payoff::call_on_max(2, 100.0);
    CHECK_THROWS_AS(p(std::vector<double>{1.0, 2.0, 3.0}), DimensionMismatch);
    const Payoff c = Payoff::custom(2, [](std::span<const double> x) { return x[0] * x[1]; });
    CHECK(c(std::vector<double>{2.0, 3.0}) == 6.0);
}

TEST_CASE("payoffs are positively homogeneous and respect leg symmetries") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> price(50.0, 150.0), scale(0.1, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 4;
        std::vector<double> x(d);
        for (auto& v : x) v = price(gen);
        const double a = scale(gen), k = price(gen);
        std::vector<double> ax(x);
        for (auto& v : ax) v *= a;

        const Payoff geo = Payoff::geometric_put(d, k), geo_a = Payoff::geometric_put(d, a * k);
        const Payoff mx = Payoff::call_on_max(d, k), mx_a = Payoff::call_on_max(d, a * k);
        const Payoff sw = Payoff::swaption_with_floor(d, -k / 10), sw_a = Payoff::swaption_with_floor(d, -a * k / 10);
        CHECK(geo_a(ax) == doctest::Approx(a * geo(x)).epsilon(1e-12));
        CHECK(mx_a(ax) == doctest::Approx(a * mx(x)).epsilon(1e-12));
        CHECK(sw_a(ax) == doctest::Approx(a * sw(x)).epsilon(1e-12));

        std::vector<double> legs{x[1], x[0], x[3], x[2]};
        CHECK(sw(legs) == doctest::Approx(sw(x)).epsilon(1e-14));
        std::vector<double> shuffled(x);
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        CHECK(geo(shuffled) == doctest::Approx(geo(x)).epsilon(1e-12));
        CHECK(mx(shuffled) == mx(x));
        CHECK(geo(x) >= 0.0);
        CHECK(mx(x) >= 0.0);
        CHECK(sw(x) >= -k / 10);
    }
}

TEST_CASE("geometric mean does not overflow in high dimension") {
    std::vector<double> x(1000, 1e300);
    CHECK(geometric_mean(x) == doctest::Approx(1e300).epsilon(1e-10));
}

TEST_CASE("correlation factor") {
    SUBCASE("identity") {
        const Matrix f = factor_correlation(Matrix::Identity(3, 3));
        CHECK((f - Matrix::Identity(3, 3)).norm() == 0.0);
    }
    SUBCASE("two assets") {
        Matrix c(2, 2);
        c << 1.0, 0.2, 0.2, 1.0;
        const Matrix f = factor_correlation(c);
        CHECK(f(0, 0) == doctest::Approx(1.0));
        CHECK(f(0, 1) == 0.0);
        CHECK(f(1, 0) == doctest::Approx(0.2));
        CHECK(f(1, 1) == doctest::Approx(std::sqrt(0.96)));
        CHECK((f * f.transpose() - c).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("perfect correlation sits on the boundary and still factors") {
        const Matrix c = Matrix::Ones(3, 3);
        const Matrix f = factor_correlation(c);
        CHECK((f * f.transpose() - c).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("out-of-range entries") {
        Matrix c(2, 2);
        c << 1.0, 1.5, 1.5, 1.0;
        CHECK_THROWS_AS(factor_correlation(c), NotPositiveDefinite);
    }
    SUBCASE("asymmetric input") {
        Matrix c(2, 2);
        c << 1.0, 0.2, 0.3, 1.0;
        CHECK_THROWS_AS(factor_correlation(c), InvalidParameter);
    }
}

#include "doctest.h"

#include "oracles.hpp"

#include "xva/market.hpp"
#include "xva/stochastic.hpp"

#include <cmath>
#include <vector>

using namespace xva;

namespace {

MarketParams table_market(std::size_t d, double vol = 0.25) {
    return MarketParams::uniform(d, 100.0, 0.03, 0.0, vol, 0.2, 1.0, 40);
}

double mean_of(const Eigen::VectorXd& v) { return v.mean(); }

double sd_of(const Eigen::VectorXd& v) {
    return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

} // namespace

TEST_CASE("clouds in the zero-volatility limit follow the forward") {
    MarketParams m = table_market(2, 1e-12);
    m.dividends = {0.0, 0.05};
    const auto clouds = build_state_clouds(m, 50, RngPolicy::for_dimension(2));
    REQUIRE(clouds.size() == 41);
    for (const auto& c : clouds) {
        for (Eigen::Index p = 0; p < c.points.rows(); ++p) {
            for (int i = 0; i < 2; ++i) {
                const double fwd = 100.0 * std::exp((0.03 - m.dividends[i]) * c.time);
                CHECK(c.points(p, i) / fwd == doctest::Approx(1.0).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("cloud zero is the spot and all prices are positive") {
    const auto clouds = build_state_clouds(table_market(3), 300, RngPolicy::for_dimension(3));
    CHECK(clouds[0].size() == 1);
    CHECK(clouds[0].points(0, 0) == 100.0);
    CHECK(clouds[0].log_displacement.cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t n = 1; n < clouds.size(); ++n) {
        CHECK(clouds[n].time_index == static_cast<int>(n));
        CHECK(clouds[n].size() == 300);
        CHECK(clouds[n].points.minCoeff() > 0.0);
    }
}

TEST_CASE("terminal cloud mean matches the forward") {
    const auto clouds = build_state_clouds(table_market(2), 2000, RngPolicy::for_dimension(2));
    const auto& last = clouds.back();
    for (int i = 0; i < 2; ++i) {
        const Eigen::VectorXd col = last.points.col(i);
        const double se = sd_of(col) / std::sqrt(2000.0);
        CHECK(std::abs(mean_of(col) - 100.0 * std::exp(0.03)) < 3.0 * se);
    }
}

TEST_CASE("discounted cloud means are martingales") {
    MarketParams m = table_market(3);
    m.dividends = {0.0, 0.02, 0.05};
    const auto clouds = build_state_clouds(m, 1000, RngPolicy::for_dimension(3));
    for (std::size_t n = 1; n < clouds.size(); ++n) {
        for (int i = 0; i < 3; ++i) {
            const Eigen::VectorXd col = clouds[n].points.col(i);
            const double growth = std::exp(-(0.03 - m.dividends[i]) * clouds[n].time);
            const double se = sd_of(col) * growth / std::sqrt(1000.0);
            CHECK(std::abs(mean_of(col) * growth - 100.0) < 4.0 * se);
        }
    }
}

TEST_CASE("clouds are reproducible for a fixed policy") {
    const auto a = build_state_clouds(table_market(2), 100, RngPolicy::for_dimension(2, 7));
    const auto b = build_state_clouds(table_market(2), 100, RngPolicy::for_dimension(2, 7));
    for (std::size_t n = 0; n < a.size(); ++n) CHECK(a[n].points == b[n].points);
}

TEST_CASE("one-step cloud") {
    SUBCASE("zero volatility") {
        const MarketParams m = table_market(2, 1e-12);
        const std::vector<double> x{90.0, 120.0};
        const PointSet s = one_step_cloud(x, 100, m, RngPolicy::for_dimension(2));
        for (Eigen::Index j = 0; j < s.rows(); ++j) {
            CHECK(s(j, 0) / (90.0 * std::exp(0.03 * m.dt())) == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(s(j, 1) / (120.0 * std::exp(0.03 * m.dt())) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    SUBCASE("log drift over a unit step") {
        MarketParams m = MarketParams::uniform(1, 100.0, 0.0, 0.0, 0.25, 0.0, 1.0, 1);
        const std::size_t M = 100000;
        const PointSet s = one_step_cloud(std::vector<double>{100.0}, M, m, RngPolicy::for_dimension(1));
        const Eigen::VectorXd logs = (s.col(0).array() / 100.0).log();
        CHECK(std::abs(logs.mean() + 0.03125) < 3.0 * 0.25 / std::sqrt(double(M)));
    }
    SUBCASE("log-return correlation") {
        const std::size_t M = 100000;
        const MarketParams m = table_market(2);
        const PointSet s = one_step_cloud(std::vector<double>{100.0, 100.0}, M, m, RngPolicy::for_dimension(2), 3);
        const Eigen::ArrayXd a = (s.col(0).array() / 100.0).log(), b = (s.col(1).array() / 100.0).log();
        const double ca = (a - a.mean()).matrix().norm(), cb = (b - b.mean()).matrix().norm();
        const double corr = ((a - a.mean()) * (b - b.mean())).sum() / (ca * cb);
        CHECK(std::abs(corr - 0.2) < 5.0 / std::sqrt(double(M)));
    }
}

TEST_CASE("composed one-step transitions match the cloud law") {
    const MarketParams m = table_market(2);
    const int n = 8;
    const std::size_t M = 20000;
    PointSet state = PointSet::Constant(static_cast<Eigen::Index>(M), 2, 100.0);
    for (int k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < state.rows(); ++j) {
            const PointSet next = one_step_cloud(row_span(state, j), 1, m, RngPolicy::for_dimension(2),
                                                 static_cast<std::uint64_t>(k) * M + j + 1);
            state.row(j) = next.row(0);
        }
    }
    const auto clouds = build_state_clouds(m, 4000, RngPolicy::for_dimension(2));
    for (int i = 0; i < 2; ++i) {
        const Eigen::VectorXd lc = state.col(i).array().log().matrix();
        const Eigen::VectorXd lq = clouds[n].points.col(i).array().log().matrix();
        const double var = 0.0625 * m.time(n);
        CHECK(std::abs(lc.mean() - lq.mean()) < 4.0 * std::sqrt(var / M) + 1e-3);
        CHECK(sd_of(lc) * sd_of(lc) == doctest::Approx(sd_of(lq) * sd_of(lq)).epsilon(0.05));
    }
}

TEST_CASE("lognormal step sampling is deterministic in the substream") {
    const MarketParams m = table_market(3);
    const LogNormalStep step(m, factor_correlation(m.correlation), m.dt());
    const CounterRng rng(42);
    const std::vector<double> x{100.0, 95.0, 105.0};
    CHECK(step.sample(x, 10, rng) == step.sample(x, 10, rng));
    CHECK(step.horizon() == m.dt());
}

TEST_CASE("european antithetic Monte Carlo") {
    SUBCASE("deterministic limit") {
        const MarketParams m = table_market(2, 1e-12);
        const auto est = european_price_mc_antithetic(m, Payoff::geometric_put(2, 100.0), 0.0,
                                                      std::vector<double>{100.0, 100.0}, 1000,
                                                      RngPolicy::for_dimension(2));
        CHECK(est.price == 0.0);
    }
    SUBCASE("single-asset put against Black-Scholes") {
        const MarketParams m = table_market(1);
        const auto est = european_price_mc_antithetic(m, Payoff::geometric_put(1, 100.0), 0.0,
                                                      std::vector<double>{100.0}, 200000,
                                                      RngPolicy::for_dimension(1));
        const double bs = oracle::black_scholes_put(100.0, 100.0, 0.03, 0.0, 0.25, 1.0);
        CHECK(std::abs(est.price - bs) < 3.0 * est.std_error);
    }
    SUBCASE("antithetic pairs beat plain sampling on the same path budget") {
        const MarketParams m = table_market(2);
        const Payoff payoff = Payoff::geometric_put(2, 100.0);
        const std::size_t pairs = 50000;
        const std::vector<double> x{100.0, 100.0};
        const auto anti = european_price_mc_antithetic(m, payoff, 0.0, x, pairs, RngPolicy::for_dimension(2));

        const LogNormalStep step(m, factor_correlation(m.correlation), m.maturity);
        const PointSet s = step.sample(x, 2 * pairs, CounterRng(derive_stream(5, {1})));
        Eigen::VectorXd v(s.rows());
        for (Eigen::Index j = 0; j < s.rows(); ++j) v(j) = std::exp(-0.03) * payoff(row_span(s, j));
        const double plain_se = sd_of(v) / std::sqrt(double(v.size()));
        CHECK(anti.std_error <= plain_se);
        CHECK(std::abs(anti.price - v.mean()) < 4.0 * plain_se);
    }
    SUBCASE("fixed-horizon pricer reuses its draws across starting points") {
        const MarketParams m = table_market(2);
        const EuropeanMonteCarlo mc(m, factor_correlation(m.correlation), Payoff::geometric_put(2, 100.0), 0.5,
                                    1000, 9);
        const auto a = mc.price(std::vector<double>{100.0, 100.0});
        const auto b = mc.price(std::vector<double>{100.0, 100.0});
        const auto c = mc.price(std::vector<double>{90.0, 90.0});
        CHECK(a.price == b.price);
        CHECK(c.price > a.price);
    }
}

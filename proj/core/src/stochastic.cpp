#include "xva/stochastic.hpp"

#include "xva/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace xva {

namespace {

constexpr const char* kModule = "stochastic-engine";

} // namespace

LogNormalStep::LogNormalStep(const MarketParams& market, const Matrix& factor, double horizon)
    : horizon_(horizon) {
    const auto d = static_cast<Eigen::Index>(market.dim());
    drift_.resize(d);
    diffusion_ = factor;
    const double root = std::sqrt(horizon);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double sigma = market.vols[static_cast<std::size_t>(i)];
        drift_(i) = (market.rate - market.dividends[static_cast<std::size_t>(i)] - 0.5 * sigma * sigma) *
                    horizon;
        diffusion_.row(i) *= root * sigma;
    }
}

PointSet LogNormalStep::sample(std::span<const double> x, std::size_t count,
                               const CounterRng& rng) const {
    const Eigen::Index d = drift_.size();
    if (static_cast<Eigen::Index>(x.size()) != d) {
        throw DimensionMismatch(kModule, "starting point has the wrong dimension");
    }
    PointSet out(static_cast<Eigen::Index>(count), d);
    Vector g(d);
    for (std::size_t m = 0; m < count; ++m) {
        const std::uint64_t base = m * static_cast<std::uint64_t>(d);
        for (Eigen::Index i = 0; i < d; ++i) g(i) = rng.normal(base + static_cast<std::uint64_t>(i));
        for (Eigen::Index i = 0; i < d; ++i) {
            // diffusion_ is lower triangular
            const double shock = diffusion_.row(i).head(i + 1).dot(g.head(i + 1));
            out(static_cast<Eigen::Index>(m), i) = x[static_cast<std::size_t>(i)] * std::exp(drift_(i) + shock);
        }
    }
    return out;
}

std::vector<StateCloud> build_state_clouds(const MarketParams& market, std::size_t points,
                                           const RngPolicy& policy) {
    market.validate();
    if (points == 0) throw InvalidParameter(kModule, "cloud size must be positive");
    const Matrix factor = factor_correlation(market.correlation);
    const auto d = static_cast<Eigen::Index>(market.dim());
    const PointSet gaussians = gaussian_from_uniform(halton_points(points, market.dim(), policy));
    // Correlated standard normals, one row per point: G * Sigma^T.
    const PointSet correlated = gaussians * factor.transpose();

    std::vector<StateCloud> clouds(static_cast<std::size_t>(market.num_steps) + 1);
    for (int n = 0; n <= market.num_steps; ++n) {
        StateCloud& cloud = clouds[static_cast<std::size_t>(n)];
        cloud.time_index = n;
        cloud.time = market.time(n);
        if (n == 0) {
            cloud.points.resize(1, d);
            cloud.log_displacement = PointSet::Zero(1, d);
            for (Eigen::Index i = 0; i < d; ++i) cloud.points(0, i) = market.spot[static_cast<std::size_t>(i)];
            continue;
        }
        const double t = cloud.time;
        const double root = std::sqrt(t);
        cloud.points.resize(correlated.rows(), d);
        cloud.log_displacement.resize(correlated.rows(), d);
        for (Eigen::Index i = 0; i < d; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const double sigma = market.vols[ui];
            const double drift = (market.rate - market.dividends[ui] - 0.5 * sigma * sigma) * t;
            for (Eigen::Index p = 0; p < correlated.rows(); ++p) {
                const double z = root * sigma * correlated(p, i);
                cloud.log_displacement(p, i) = z;
                cloud.points(p, i) = market.spot[ui] * std::exp(drift + z);
            }
        }
    }
    return clouds;
}

PointSet one_step_cloud(std::span<const double> x, std::size_t count, const MarketParams& market,
                        const RngPolicy& policy, std::uint64_t stream) {
    market.validate();
    const LogNormalStep step(market, factor_correlation(market.correlation), market.dt());
    return step.sample(x, count, CounterRng(derive_stream(policy.seed, {0x05E7u, stream})));
}

EuropeanMonteCarlo::EuropeanMonteCarlo(const MarketParams& market, const Matrix& factor,
                                       const Payoff& payoff, double horizon, std::size_t pairs,
                                       std::uint64_t stream_key)
    : payoff_(payoff), horizon_(horizon), discount_(std::exp(-market.rate * horizon)), pairs_(pairs) {
    if (payoff.dim() != market.dim()) {
        throw DimensionMismatch(kModule, "payoff and market dimensions differ");
    }
    if (horizon < 0.0) throw InvalidParameter(kModule, "horizon must be nonnegative");
    if (horizon == 0.0) return;
    if (pairs == 0) throw InvalidParameter(kModule, "need at least one antithetic pair");

    const LogNormalStep step(market, factor, horizon);
    const auto d = static_cast<Eigen::Index>(market.dim());
    const CounterRng rng(stream_key);
    up_.resize(static_cast<Eigen::Index>(pairs), d);
    down_.resize(static_cast<Eigen::Index>(pairs), d);
    Vector g(d);
    for (std::size_t j = 0; j < pairs; ++j) {
        const std::uint64_t base = j * static_cast<std::uint64_t>(d);
        for (Eigen::Index i = 0; i < d; ++i) g(i) = rng.normal(base + static_cast<std::uint64_t>(i));
        const Vector shock = step.diffusion().triangularView<Eigen::Lower>() * g;
        for (Eigen::Index i = 0; i < d; ++i) {
            up_(static_cast<Eigen::Index>(j), i) = std::exp(step.drift()(i) + shock(i));
            down_(static_cast<Eigen::Index>(j), i) = std::exp(step.drift()(i) - shock(i));
        }
    }
    if (std::holds_alternative<Payoff::GeometricPut>(payoff_.kind())) {
        // The geometric mean factorises: G(x * f) = G(x) * G(f).
        geo_up_.resize(static_cast<Eigen::Index>(pairs));
        geo_down_.resize(static_cast<Eigen::Index>(pairs));
        const double inv_d = 1.0 / static_cast<double>(d);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(pairs); ++j) {
            geo_up_(j) = std::exp(up_.row(j).array().log().sum() * inv_d);
            geo_down_(j) = std::exp(down_.row(j).array().log().sum() * inv_d);
        }
    }
}

McEstimate EuropeanMonteCarlo::price(std::span<const double> x) const {
    if (x.size() != payoff_.dim()) {
        throw DimensionMismatch(kModule, "starting point has the wrong dimension");
    }
    if (horizon_ == 0.0) return {payoff_(x), 0.0};

    double mean = 0.0;
    double m2 = 0.0;
    auto accumulate = [&](double pair, std::size_t j) {
        const double delta = pair - mean;
        mean += delta / static_cast<double>(j + 1);
        m2 += delta * (pair - mean);
    };
    if (geo_up_.size() > 0) {
        const double strike = std::get<Payoff::GeometricPut>(payoff_.kind()).strike;
        const double g = geometric_mean(x);
        for (std::size_t j = 0; j < pairs_; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            accumulate(0.5 * (std::max(strike - g * geo_up_(jj), 0.0) + std::max(strike - g * geo_down_(jj), 0.0)), j);
        }
        const double variance = pairs_ > 1 ? m2 / static_cast<double>(pairs_ - 1) : 0.0;
        return {discount_ * mean, discount_ * std::sqrt(variance / static_cast<double>(pairs_))};
    }

    const std::size_t d = x.size();
    std::vector<double> buffer(d);
    const std::span<const double> view(buffer);
    for (std::size_t j = 0; j < pairs_; ++j) {
        const double* up = up_.data() + j * d;
        const double* down = down_.data() + j * d;
        for (std::size_t i = 0; i < d; ++i) buffer[i] = x[i] * up[i];
        const double a = payoff_.evaluate_unchecked(view);
        for (std::size_t i = 0; i < d; ++i) buffer[i] = x[i] * down[i];
        const double b = payoff_.evaluate_unchecked(view);
        accumulate(0.5 * (a + b), j);
    }
    const double variance = pairs_ > 1 ? m2 / static_cast<double>(pairs_ - 1) : 0.0;
    return {discount_ * mean, discount_ * std::sqrt(variance / static_cast<double>(pairs_))};
}

McEstimate european_price_mc_antithetic(const MarketParams& market, const Payoff& payoff, double t,
                                        std::span<const double> x, std::size_t pairs,
                                        const RngPolicy& policy) {
    market.validate();
    if (!(t < market.maturity)) throw InvalidParameter(kModule, "t must be before maturity");
    if (payoff.dim() != market.dim() || x.size() != market.dim()) {
        throw DimensionMismatch(kModule, "payoff, state and market dimensions differ");
    }
    if (pairs == 0) throw InvalidParameter(kModule, "need at least one antithetic pair");

    // Single starting point: draws are generated on the fly instead of being
    // stored, so very large budgets stay cheap in memory.
    const double horizon = market.maturity - t;
    const LogNormalStep step(market, factor_correlation(market.correlation), horizon);
    const CounterRng rng(derive_stream(policy.seed, {0xE0u, std::bit_cast<std::uint64_t>(t)}));
    const auto d = static_cast<Eigen::Index>(market.dim());
    Vector g(d);
    std::vector<double> up(x.size());
    std::vector<double> down(x.size());
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t j = 0; j < pairs; ++j) {
        const std::uint64_t base = j * static_cast<std::uint64_t>(d);
        for (Eigen::Index i = 0; i < d; ++i) g(i) = rng.normal(base + static_cast<std::uint64_t>(i));
        const Vector shock = step.diffusion().triangularView<Eigen::Lower>() * g;
        for (Eigen::Index i = 0; i < d; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            up[ui] = x[ui] * std::exp(step.drift()(i) + shock(i));
            down[ui] = x[ui] * std::exp(step.drift()(i) - shock(i));
        }
        const double pair = 0.5 * (payoff.evaluate_unchecked(up) + payoff.evaluate_unchecked(down));
        const double delta = pair - mean;
        mean += delta / static_cast<double>(j + 1);
        m2 += delta * (pair - mean);
    }
    const double discount = std::exp(-market.rate * horizon);
    const double variance = pairs > 1 ? m2 / static_cast<double>(pairs - 1) : 0.0;
    return {discount * mean, discount * std::sqrt(variance / static_cast<double>(pairs))};
}

} // namespace xva

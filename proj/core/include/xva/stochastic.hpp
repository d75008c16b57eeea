#pragma once

#include "xva/market.hpp"
#include "xva/random.hpp"
#include "xva/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace xva {

/// Quasi-random sample of the asset vector at t_n.
struct StateCloud {
    int time_index = 0;
    double time = 0.0;
    PointSet points;            ///< P x d prices, strictly positive
    PointSet log_displacement;  ///< log(x / S0) - (r - eta - sigma^2/2) t_n, per row
    std::vector<double> values_riskless;
    std::vector<double> values_risky;

    std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
};

/// Exact one-period transition of the multi-dimensional Black-Scholes model
/// over a horizon tau: log S_{t+tau} = log S_t + drift + diffusion * G.
class LogNormalStep {
public:
    LogNormalStep(const MarketParams& market, const Matrix& factor, double horizon);

    double horizon() const noexcept { return horizon_; }
    const Vector& drift() const noexcept { return drift_; }
    /// sqrt(tau) * diag(sigma) * Sigma (lower triangular).
    const Matrix& diffusion() const noexcept { return diffusion_; }

    /// `count` draws of S_{t+tau} given S_t = x; normals come from draws
    /// [m*d, (m+1)*d) of `rng`.
    PointSet sample(std::span<const double> x, std::size_t count, const CounterRng& rng) const;

private:
    double horizon_;
    Vector drift_;
    Matrix diffusion_;
};

/// Clouds X^0..X^N. Cloud 0 is the spot; cloud n > 0 maps the same P Halton
/// points (through the inverse normal CDF) to the exact law of S_{t_n}.
std::vector<StateCloud> build_state_clouds(const MarketParams& market, std::size_t points,
                                           const RngPolicy& policy);

/// M pseudo-random draws of S_{t+dt} given S_t = x (dt = T/N). `stream`
/// selects an independent substream of the policy seed.
PointSet one_step_cloud(std::span<const double> x, std::size_t count, const MarketParams& market,
                        const RngPolicy& policy, std::uint64_t stream = 0);

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
};

/// Antithetic Monte Carlo pricer of the European payoff over a fixed horizon.
/// Terminal growth factors are drawn once at construction (G and -G per
/// pair) and reused for every starting point passed to price().
class EuropeanMonteCarlo {
public:
    EuropeanMonteCarlo(const MarketParams& market, const Matrix& factor, const Payoff& payoff,
                       double horizon, std::size_t pairs, std::uint64_t stream_key);

    McEstimate price(std::span<const double> x) const;

    std::size_t pairs() const noexcept { return pairs_; }
    double horizon() const noexcept { return horizon_; }

private:
    Payoff payoff_;
    double horizon_;
    double discount_;
    std::size_t pairs_;
    PointSet up_;
    PointSet down_;
    Vector geo_up_;
    Vector geo_down_;
};

/// European value at time t < T and state x by antithetic Monte Carlo.
McEstimate european_price_mc_antithetic(const MarketParams& market, const Payoff& payoff, double t,
                                        std::span<const double> x, std::size_t pairs,
                                        const RngPolicy& policy);

} // namespace xva

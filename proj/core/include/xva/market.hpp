#pragma once

#include "xva/types.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace xva {

/// Multi-asset Black-Scholes market and contract horizon.
///
/// Each asset follows dS_i = (r - eta_i) S_i dt + sigma_i S_i dW_i with
/// instantaneous correlation matrix `correlation`. The exercise grid is the
/// uniform one t_n = n * T / N, n = 0..N.
struct MarketParams {
    std::vector<double> spot;
    double rate = 0.0;
    std::vector<double> dividends;
    std::vector<double> vols;
    Matrix correlation;
    double maturity = 1.0;
    int num_steps = 1;

    std::size_t dim() const noexcept { return spot.size(); }
    double dt() const noexcept { return maturity / num_steps; }
    double time(int n) const noexcept { return n * dt(); }

    /// Throws InvalidParameter / NotPositiveDefinite when an invariant fails.
    void validate() const;

    /// Identical assets with equicorrelation `rho`.
    static MarketParams uniform(std::size_t d, double spot, double rate, double dividend,
                                double vol, double rho, double maturity, int num_steps);
};

enum class FundingMode { Collateralized, Uncollateralized };

struct CreditParams {
    double lambda_b = 0.0; ///< issuer default intensity
    double lambda_c = 0.0; ///< counterparty default intensity
    double recovery_b = 0.0;
    double recovery_c = 0.0;
    FundingMode funding = FundingMode::Uncollateralized;

    void validate() const;
};

/// Coefficients of the risky recursion derived from market and credit data.
struct DerivedConstants {
    double funding_spread = 0.0; ///< s_F
    double r0 = 0.0;             ///< r + lambda_B + lambda_C
    double c_plus = 0.0;         ///< weight of M^+ in the source term
    double c_minus = 0.0;        ///< weight of M^- in the source term
    double intensity_sum = 0.0;  ///< lambda_B + lambda_C
};

/// Throws StabilityViolation when dt/2 * max(c_plus, c_minus) >= 1.
DerivedConstants derive_constants(const MarketParams& market, const CreditParams& credit);

/// Lower-triangular Sigma with Sigma * Sigma^T = correlation.
///
/// Plain Cholesky first, then diagonal jitter of 1e-14, 1e-12 and 1e-10 before
/// giving up with NotPositiveDefinite. Entries outside [-1, 1] are rejected as
/// not positive definite; asymmetry or a non-unit diagonal as InvalidParameter.
Matrix factor_correlation(const Matrix& correlation);

/// Payoff of a basket derivative on d assets.
class Payoff {
public:
    struct GeometricPut {
        double strike;
    };
    struct CallOnMax {
        double strike;
    };
    /// max(2/d * (sum of first d/2 assets - sum of the rest), floor), floor < 0.
    struct SwaptionWithFloor {
        double floor;
    };
    /// Must be pure and total on the positive orthant.
    struct Custom {
        std::function<double(std::span<const double>)> fn;
        std::string name = "custom";
    };
    using Kind = std::variant<GeometricPut, CallOnMax, SwaptionWithFloor, Custom>;

    static Payoff geometric_put(std::size_t dim, double strike);
    static Payoff call_on_max(std::size_t dim, double strike);
    static Payoff swaption_with_floor(std::size_t dim, double floor);
    static Payoff custom(std::size_t dim, std::function<double(std::span<const double>)> fn,
                         std::string name = "custom");

    std::size_t dim() const noexcept { return dim_; }
    const Kind& kind() const noexcept { return kind_; }
    std::string name() const;

    /// Throws DimensionMismatch if x.size() != dim().
    double operator()(std::span<const double> x) const;

    /// Same as operator() without the size check, for inner loops.
    double evaluate_unchecked(std::span<const double> x) const;

private:
    Payoff(std::size_t dim, Kind kind) : dim_(dim), kind_(std::move(kind)) {}

    std::size_t dim_;
    Kind kind_;
};

double eval_payoff(const Payoff& payoff, std::span<const double> x);

/// (prod x_i)^(1/d), computed without overflow for large d.
double geometric_mean(std::span<const double> x);

} // namespace xva

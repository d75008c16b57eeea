#include "xva/market.hpp"

#include "xva/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xva {

namespace {

constexpr const char* kModule = "market-model";

void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidParameter(kModule, message);
}

} // namespace

void MarketParams::validate() const {
    const std::size_t d = dim();
    require(d >= 1, "at least one asset is required");
    require(dividends.size() == d, "dividends must have one entry per asset");
    require(vols.size() == d, "vols must have one entry per asset");
    require(std::isfinite(rate), "rate must be finite");
    for (std::size_t i = 0; i < d; ++i) {
        require(spot[i] > 0.0 && std::isfinite(spot[i]), "spot prices must be positive");
        require(vols[i] > 0.0 && std::isfinite(vols[i]), "volatilities must be positive");
        require(std::isfinite(dividends[i]), "dividends must be finite");
    }
    require(maturity > 0.0 && std::isfinite(maturity), "maturity must be positive");
    require(num_steps >= 1, "num_steps must be at least 1");
    require(correlation.rows() == static_cast<Eigen::Index>(d) &&
                correlation.cols() == static_cast<Eigen::Index>(d),
            "correlation must be d x d");
    factor_correlation(correlation);
}

MarketParams MarketParams::uniform(std::size_t d, double spot, double rate, double dividend,
                                   double vol, double rho, double maturity, int num_steps) {
    MarketParams mp;
    mp.spot.assign(d, spot);
    mp.rate = rate;
    mp.dividends.assign(d, dividend);
    mp.vols.assign(d, vol);
    mp.correlation = Matrix::Constant(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d), rho);
    mp.correlation.diagonal().setOnes();
    mp.maturity = maturity;
    mp.num_steps = num_steps;
    return mp;
}

void CreditParams::validate() const {
    require(lambda_b >= 0.0 && std::isfinite(lambda_b), "lambda_b must be nonnegative");
    require(lambda_c >= 0.0 && std::isfinite(lambda_c), "lambda_c must be nonnegative");
    require(recovery_b >= 0.0 && recovery_b <= 1.0, "recovery_b must lie in [0, 1]");
    require(recovery_c >= 0.0 && recovery_c <= 1.0, "recovery_c must lie in [0, 1]");
}

DerivedConstants derive_constants(const MarketParams& market, const CreditParams& credit) {
    credit.validate();
    DerivedConstants dc;
    dc.funding_spread = credit.funding == FundingMode::Collateralized
                            ? 0.0
                            : (1.0 - credit.recovery_b) * credit.lambda_b;
    dc.intensity_sum = credit.lambda_b + credit.lambda_c;
    dc.r0 = market.rate + dc.intensity_sum;
    dc.c_plus = credit.lambda_b + credit.lambda_c * credit.recovery_c - dc.funding_spread;
    dc.c_minus = credit.lambda_c + credit.lambda_b * credit.recovery_b;

    const double half_dt = 0.5 * market.dt();
    if (!(half_dt * std::max(dc.c_plus, dc.c_minus) < 1.0)) {
        std::ostringstream msg;
        msg << "dt/2 * max(c_p, c_m) = " << half_dt * std::max(dc.c_plus, dc.c_minus)
            << " must be < 1; increase num_steps";
        throw StabilityViolation(kModule, msg.str());
    }
    return dc;
}

Matrix factor_correlation(const Matrix& correlation) {
    const Eigen::Index d = correlation.rows();
    require(d >= 1 && correlation.cols() == d, "correlation must be a non-empty square matrix");
    for (Eigen::Index i = 0; i < d; ++i) {
        require(std::abs(correlation(i, i) - 1.0) <= 1e-12, "correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < i; ++j) {
            require(std::abs(correlation(i, j) - correlation(j, i)) <= 1e-12,
                    "correlation must be symmetric");
            if (!(std::abs(correlation(i, j)) <= 1.0)) {
                throw NotPositiveDefinite(kModule, "correlation entries must lie in [-1, 1]");
            }
        }
    }

    for (double jitter : {0.0, 1e-14, 1e-12, 1e-10}) {
        Matrix shifted = correlation;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NotPositiveDefinite(kModule, "correlation matrix is not positive semi-definite");
}

double geometric_mean(std::span<const double> x) {
    // Running product renormalised with frexp before it can overflow.
    double mantissa = 1.0;
    long exponent = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mantissa *= x[i];
        if (mantissa > 1e150 || mantissa < 1e-150) {
            int e = 0;
            mantissa = std::frexp(mantissa, &e);
            exponent += e;
        }
    }
    int e = 0;
    mantissa = std::frexp(mantissa, &e);
    exponent += e;
    const double inv_d = 1.0 / static_cast<double>(x.size());
    return std::pow(mantissa, inv_d) * std::exp2(static_cast<double>(exponent) * inv_d);
}

Payoff Payoff::geometric_put(std::size_t dim, double strike) {
    require(dim >= 1, "payoff dimension must be positive");
    return Payoff(dim, GeometricPut{strike});
}

Payoff Payoff::call_on_max(std::size_t dim, double strike) {
    require(dim >= 1, "payoff dimension must be positive");
    return Payoff(dim, CallOnMax{strike});
}

Payoff Payoff::swaption_with_floor(std::size_t dim, double floor) {
    require(dim >= 2 && dim % 2 == 0, "swaption with floor needs an even number of assets");
    require(floor < 0.0, "swaption floor must be negative");
    return Payoff(dim, SwaptionWithFloor{floor});
}

Payoff Payoff::custom(std::size_t dim, std::function<double(std::span<const double>)> fn,
                      std::string name) {
    require(dim >= 1, "payoff dimension must be positive");
    require(static_cast<bool>(fn), "custom payoff needs a callable");
    return Payoff(dim, Custom{std::move(fn), std::move(name)});
}

std::string Payoff::name() const {
    struct Namer {
        std::string operator()(const GeometricPut&) const { return "geoput"; }
        std::string operator()(const CallOnMax&) const { return "callmax"; }
        std::string operator()(const SwaptionWithFloor&) const { return "swaption"; }
        std::string operator()(const Custom& c) const { return c.name; }
    };
    return std::visit(Namer{}, kind_);
}

double Payoff::operator()(std::span<const double> x) const {
    if (x.size() != dim_) {
        std::ostringstream msg;
        msg << "payoff expects " << dim_ << " prices, got " << x.size();
        throw DimensionMismatch(kModule, msg.str());
    }
    return evaluate_unchecked(x);
}

double Payoff::evaluate_unchecked(std::span<const double> x) const {
    struct Eval {
        std::span<const double> x;
        double operator()(const GeometricPut& p) const {
            return std::max(p.strike - geometric_mean(x), 0.0);
        }
        double operator()(const CallOnMax& p) const {
            return std::max(*std::max_element(x.begin(), x.end()) - p.strike, 0.0);
        }
        double operator()(const SwaptionWithFloor& p) const {
            const std::size_t half = x.size() / 2;
            double first = 0.0;
            double second = 0.0;
            for (std::size_t i = 0; i < half; ++i) first += x[i];
            for (std::size_t i = half; i < x.size(); ++i) second += x[i];
            return std::max(2.0 / static_cast<double>(x.size()) * (first - second), p.floor);
        }
        double operator()(const Custom& p) const { return p.fn(x); }
    };
    return std::visit(Eval{x}, kind_);
}

double eval_payoff(const Payoff& payoff, std::span<const double> x) { return payoff(x); }

} // namespace xva

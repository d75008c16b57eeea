#pragma once

#include "xva/market.hpp"
#include "xva/risky.hpp"

#include <functional>
#include <optional>

namespace xva {

/// One-dimensional model equivalent to the geometric average of a
/// multi-asset Black-Scholes basket:
///   sigma^2 = (1/d^2) sum_ij rho_ij sigma_i sigma_j,
///   eta     = (1/d) sum_i (eta_i + sigma_i^2 / 2) - sigma^2 / 2,
///   spot    = geometric mean of the spots.
MarketParams geometric_reduction(const MarketParams& market);

enum class ExerciseStyle { European, Bermudan, American };

/// Exercise rights of a reference pricer. Bermudan dates are the
/// `intervals` + 1 points of the uniform grid on [0, T].
struct ExerciseSchedule {
    ExerciseStyle style = ExerciseStyle::American;
    int intervals = 0;

    static ExerciseSchedule european() { return {ExerciseStyle::European, 0}; }
    static ExerciseSchedule american() { return {ExerciseStyle::American, 0}; }
    static ExerciseSchedule bermudan(int intervals) { return {ExerciseStyle::Bermudan, intervals}; }
};

struct RiskyModel {
    DerivedConstants dc;
    MtmConvention convention = MtmConvention::RisklessMark;
};

struct ReferencePrice {
    double riskless = 0.0;
    std::optional<double> risky;

    double xva() const { return risky ? riskless - *risky : 0.0; }
};

using Payoff1d = std::function<double(double)>;

Payoff1d put_payoff(double strike);
Payoff1d call_payoff(double strike);

/// Cox-Ross-Rubinstein tree on a one-asset market. With `risky`, each
/// substep discounts at r0, adds the trapezoidal source dt/2 g at both ends
/// and, for M = V-hat, solves the implicit update nodewise. Bermudan
/// schedules require `steps` divisible by the number of intervals.
ReferencePrice crr_tree_1d(const MarketParams& market, const Payoff1d& payoff, int steps,
                           const ExerciseSchedule& schedule, const std::optional<RiskyModel>& risky = {});

struct PdeGrid {
    int time_steps = 4000;
    int space_steps = 4000;
    double width_std = 6.0;   ///< half-width of the log-price grid in units of sigma sqrt(T)
    int rannacher_steps = 4;  ///< implicit Euler half-steps after maturity
};

/// Crank-Nicolson solution of the one-asset pricing equation in log-price,
/// with pointwise projection at exercise dates. The risky equation adds
/// absorption at r0 and the source g; for M = V-hat the sign of the solution
/// at the previous time level selects c_p or c_m. Throws GridTooCoarse when
/// the truncated tails could move the price by more than 1e-6 of the spot.
ReferencePrice pde_crank_nicolson_1d(const MarketParams& market, const Payoff1d& payoff, const PdeGrid& grid,
                                     const ExerciseSchedule& schedule,
                                     const std::optional<RiskyModel>& risky = {});

/// Black-Scholes price of a European put or call with continuous dividend.
double black_scholes_put(double spot, double strike, double rate, double dividend, double vol, double maturity);
double black_scholes_call(double spot, double strike, double rate, double dividend, double vol, double maturity);

/// XVA of a European claim with nonnegative payoff given its riskless price:
///   M = V:     V (1 - e^{-lambda T}) (1 - c_p / lambda),  lambda = lambda_B + lambda_C,
///   M = V-hat: V (1 - e^{(c_p - lambda) T}).
double xva_european_closed_form(double european_value, const DerivedConstants& dc, double maturity,
                                MtmConvention convention);

} // namespace xva

#pragma once

#include "xva/market.hpp"

namespace xva {

/// Mark-to-market value used at default settlement.
enum class MtmConvention {
    RisklessMark, ///< M = V: linear recursion driven by the riskless values
    RiskyMark,    ///< M = V-hat: implicit recursion
};

const char* to_string(MtmConvention convention) noexcept;

/// g = M^+ c_p + M^- c_m with M^+ >= 0 >= M^-.
double source_g(double m_plus, double m_minus, const DerivedConstants& dc);

/// g evaluated at a signed mark.
inline double source_g(double mark, const DerivedConstants& dc) {
    return mark > 0.0 ? mark * dc.c_plus : mark * dc.c_minus;
}

/// Unique z with z = max(E + dt/2 * g(z), H).
/// Throws StabilityViolation unless 1 - dt/2 c_p > 0 and 1 - dt/2 c_m > 0.
double solve_implicit_prop1(double e, double h, const DerivedConstants& dc, double dt);

/// Unique z with z = E + dt/2 * g(z): the update between exercise dates.
double solve_implicit_free(double e, const DerivedConstants& dc, double dt);

/// M = V update at one point. `discounted_bracket` is
/// e^{-r0 dt} E[dt/2 g(V_{n+1}) + V-hat_{n+1}]; `riskless` is V_n there.
inline double risky_update_mark_riskless(double discounted_bracket, double riskless, double payoff,
                                         const DerivedConstants& dc, double dt, bool exercisable) {
    const double c = discounted_bracket + 0.5 * dt * source_g(riskless, dc);
    return exercisable && payoff > c ? payoff : c;
}

/// M = V-hat update at one point; `discounted_bracket` is
/// e^{-r0 dt} E[dt/2 g(V-hat_{n+1}) + V-hat_{n+1}].
inline double risky_update_mark_risky(double discounted_bracket, double payoff, const DerivedConstants& dc,
                                      double dt, bool exercisable) {
    return exercisable ? solve_implicit_prop1(discounted_bracket, payoff, dc, dt)
                       : solve_implicit_free(discounted_bracket, dc, dt);
}

} // namespace xva

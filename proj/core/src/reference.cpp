#include "xva/reference.hpp"

#include "xva/error.hpp"
#include "xva/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace xva {

namespace {

constexpr const char* kModule = "benchmarks";

void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidParameter(kModule, message);
}

void check_1d(const MarketParams& market) {
    market.validate();
    require(market.dim() == 1, "reference pricers need a one-asset market");
}

bool is_exercise_level(const ExerciseSchedule& schedule, int level, int steps) {
    switch (schedule.style) {
    case ExerciseStyle::European:
        return level == steps;
    case ExerciseStyle::American:
        return true;
    case ExerciseStyle::Bermudan:
        return level % (steps / schedule.intervals) == 0;
    }
    return false;
}

void check_schedule(const ExerciseSchedule& schedule, int steps) {
    require(steps >= 1, "need at least one time step");
    if (schedule.style == ExerciseStyle::Bermudan) {
        require(schedule.intervals >= 1, "Bermudan schedule needs at least one interval");
        require(steps % schedule.intervals == 0, "time steps must be divisible by the exercise intervals");
    }
}

// Risky/riskless ratio of a European claim over a horizon tau, by sign of its value.
double european_risky_factor(double value, const RiskyModel& model, double tau) {
    DerivedConstants dc = model.dc;
    if (value < 0.0) dc.c_plus = dc.c_minus;
    return 1.0 - xva_european_closed_form(1.0, dc, tau, model.convention);
}

// Solves a tridiagonal system in place (Thomas algorithm); rhs becomes the solution.
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
                       std::vector<double>& rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

} // namespace

MarketParams geometric_reduction(const MarketParams& market) {
    market.validate();
    const std::size_t d = market.dim();
    const double dd = static_cast<double>(d);
    double var = 0.0;
    double drift = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        drift += market.dividends[i] + 0.5 * market.vols[i] * market.vols[i];
        for (std::size_t j = 0; j < d; ++j) {
            var += market.correlation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                   market.vols[i] * market.vols[j];
        }
    }
    var /= dd * dd;
    MarketParams out;
    out.spot = {geometric_mean(market.spot)};
    out.rate = market.rate;
    out.vols = {std::sqrt(var)};
    out.dividends = {drift / dd - 0.5 * var};
    out.correlation = Matrix::Ones(1, 1);
    out.maturity = market.maturity;
    out.num_steps = market.num_steps;
    return out;
}

Payoff1d put_payoff(double strike) {
    return [strike](double s) { return std::max(strike - s, 0.0); };
}

Payoff1d call_payoff(double strike) {
    return [strike](double s) { return std::max(s - strike, 0.0); };
}

ReferencePrice crr_tree_1d(const MarketParams& market, const Payoff1d& payoff, int steps,
                           const ExerciseSchedule& schedule, const std::optional<RiskyModel>& risky) {
    check_1d(market);
    check_schedule(schedule, steps);
    const double dt = market.maturity / steps;
    const double sigma = market.vols[0];
    const double up = std::exp(sigma * std::sqrt(dt));
    const double down = 1.0 / up;
    const double p = (std::exp((market.rate - market.dividends[0]) * dt) - down) / (up - down);
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameter(kModule, "tree probabilities outside (0, 1); add steps");
    const double q = 1.0 - p;
    const double disc = std::exp(-market.rate * dt);
    const double spot = market.spot[0];

    std::vector<double> price(static_cast<std::size_t>(steps) + 1);
    auto fill_prices = [&](int level) {
        for (int j = 0; j <= level; ++j) price[static_cast<std::size_t>(j)] = spot * std::pow(up, 2 * j - level);
    };
    fill_prices(steps);
    std::vector<double> v(static_cast<std::size_t>(steps) + 1);
    for (int j = 0; j <= steps; ++j) v[static_cast<std::size_t>(j)] = payoff(price[static_cast<std::size_t>(j)]);
    std::vector<double> vhat;
    double disc_risky = 0.0;
    if (risky) {
        vhat = v;
        disc_risky = std::exp(-risky->dc.r0 * dt);
    }
    const bool mark_riskless = risky && risky->convention == MtmConvention::RisklessMark;

    for (int level = steps - 1; level >= 0; --level) {
        fill_prices(level);
        const bool exercise = is_exercise_level(schedule, level, steps);
        for (int j = 0; j <= level; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const double h = exercise ? payoff(price[uj]) : 0.0;
            const double cont = disc * (p * v[uj + 1] + q * v[uj]);
            const double v_new = exercise ? std::max(cont, h) : cont;
            if (risky) {
                const DerivedConstants& dc = risky->dc;
                const double mark_up = mark_riskless ? v[uj + 1] : vhat[uj + 1];
                const double mark_down = mark_riskless ? v[uj] : vhat[uj];
                const double bracket = p * (0.5 * dt * source_g(mark_up, dc) + vhat[uj + 1]) +
                                       q * (0.5 * dt * source_g(mark_down, dc) + vhat[uj]);
                vhat[uj] = mark_riskless
                               ? risky_update_mark_riskless(disc_risky * bracket, v_new, h, dc, dt, exercise)
                               : risky_update_mark_risky(disc_risky * bracket, h, dc, dt, exercise);
            }
            v[uj] = v_new;
        }
    }
    ReferencePrice out;
    out.riskless = v[0];
    if (risky) out.risky = vhat[0];
    return out;
}

ReferencePrice pde_crank_nicolson_1d(const MarketParams& market, const Payoff1d& payoff, const PdeGrid& grid,
                                     const ExerciseSchedule& schedule, const std::optional<RiskyModel>& risky) {
    check_1d(market);
    check_schedule(schedule, grid.time_steps);
    require(grid.space_steps >= 4, "need at least four space steps");
    require(grid.width_std > 0.0, "grid width must be positive");

    const double sigma = market.vols[0];
    const double r = market.rate;
    const double eta = market.dividends[0];
    const double maturity = market.maturity;
    const double x0 = std::log(market.spot[0]);
    const double half_width = grid.width_std * sigma * std::sqrt(maturity);
    const int nx = grid.space_steps + (grid.space_steps % 2);
    const double x_lo = x0 - half_width;
    const double h = 2.0 * half_width / nx;
    const auto npts = static_cast<std::size_t>(nx) + 1;

    std::vector<double> s(npts);
    std::vector<double> payoff_values(npts);
    for (std::size_t j = 0; j < npts; ++j) {
        s[j] = std::exp(x_lo + h * static_cast<double>(j));
        payoff_values[j] = payoff(s[j]);
    }
    const double tail = normal_cdf(-grid.width_std) * (std::abs(payoff_values.front()) + std::abs(payoff_values.back()));
    if (tail > 1e-6 * market.spot[0]) {
        std::ostringstream msg;
        msg << "boundary truncation " << tail << " exceeds 1e-6 of the spot; widen the grid";
        throw GridTooCoarse(kModule, msg.str());
    }

    const bool can_exercise_early = schedule.style != ExerciseStyle::European;
    auto boundary = [&](std::size_t j, double tau) {
        const double forward = std::exp(-r * tau) * payoff(s[j] * std::exp((r - eta) * tau));
        return can_exercise_early ? std::max(payoff_values[j], forward) : forward;
    };

    const double a = 0.5 * sigma * sigma;
    const double b = r - eta - a;
    const double lo_coef = a / (h * h) - b / (2.0 * h);
    const double up_coef = a / (h * h) + b / (2.0 * h);
    const double mid_coef = -2.0 * a / (h * h);

    std::vector<double> v = payoff_values;
    std::vector<double> vhat;
    if (risky) vhat = payoff_values;
    const bool mark_riskless = risky && risky->convention == MtmConvention::RisklessMark;

    std::vector<double> lower(npts), diag(npts), upper(npts), rhs(npts);
    std::vector<double> absorb(npts), source_old(npts), source_new(npts), v_old(npts);

    // One theta-scheme step of length tau for L u = a u'' + b u' - k_j u + f, backwards in time.
    auto theta_step = [&](std::vector<double>& u, double theta, double tau, const std::vector<double>& k,
                          const std::vector<double>* f_old, const std::vector<double>* f_new, double left,
                          double right) {
        for (std::size_t j = 1; j + 1 < npts; ++j) {
            const double lu = lo_coef * u[j - 1] + (mid_coef - k[j]) * u[j] + up_coef * u[j + 1];
            rhs[j] = u[j] + (1.0 - theta) * tau * lu;
            if (f_old) rhs[j] += tau * ((1.0 - theta) * (*f_old)[j] + theta * (*f_new)[j]);
            lower[j] = -theta * tau * lo_coef;
            diag[j] = 1.0 - theta * tau * (mid_coef - k[j]);
            upper[j] = -theta * tau * up_coef;
        }
        lower[0] = 0.0;
        diag[0] = 1.0;
        upper[0] = 0.0;
        rhs[0] = left;
        lower[npts - 1] = 0.0;
        diag[npts - 1] = 1.0;
        upper[npts - 1] = 0.0;
        rhs[npts - 1] = right;
        solve_tridiagonal(lower, diag, upper, rhs);
        u.swap(rhs);
        rhs.assign(npts, 0.0);
    };

    const int nt = grid.time_steps;
    const double dt = maturity / nt;
    std::vector<double> k_riskless(npts, r);
    for (int m = nt - 1; m >= 0; --m) {
        const double tau_new = maturity - m * dt; // time to maturity after this step
        const int sub = (nt - 1 - m) * 2 < grid.rannacher_steps ? 2 : 1;
        const double theta = sub == 2 ? 1.0 : 0.5;
        const double sub_dt = dt / sub;
        for (int k = 0; k < sub; ++k) {
            const double tau = tau_new - dt + (k + 1) * sub_dt;
            v_old = v;
            theta_step(v, theta, sub_dt, k_riskless, nullptr, nullptr, boundary(0, tau), boundary(npts - 1, tau));
            if (risky) {
                const DerivedConstants& dc = risky->dc;
                const double left = boundary(0, tau) * european_risky_factor(boundary(0, tau), *risky, tau);
                const double right =
                    boundary(npts - 1, tau) * european_risky_factor(boundary(npts - 1, tau), *risky, tau);
                if (mark_riskless) {
                    for (std::size_t j = 0; j < npts; ++j) {
                        absorb[j] = dc.r0;
                        source_old[j] = source_g(v_old[j], dc);
                        source_new[j] = source_g(v[j], dc);
                    }
                    theta_step(vhat, theta, sub_dt, absorb, &source_old, &source_new, left, right);
                } else {
                    for (std::size_t j = 0; j < npts; ++j) {
                        absorb[j] = dc.r0 - (vhat[j] > 0.0 ? dc.c_plus : dc.c_minus);
                    }
                    theta_step(vhat, theta, sub_dt, absorb, nullptr, nullptr, left, right);
                }
            }
        }
        if (m == 0 || is_exercise_level(schedule, m, nt)) {
            if (can_exercise_early) {
                for (std::size_t j = 0; j < npts; ++j) {
                    v[j] = std::max(v[j], payoff_values[j]);
                    if (risky) vhat[j] = std::max(vhat[j], payoff_values[j]);
                }
            }
        }
    }

    const double pos = (x0 - x_lo) / h;
    const auto j0 = std::min(static_cast<std::size_t>(pos), npts - 2);
    const double w = pos - static_cast<double>(j0);
    ReferencePrice out;
    out.riskless = (1.0 - w) * v[j0] + w * v[j0 + 1];
    if (risky) out.risky = (1.0 - w) * vhat[j0] + w * vhat[j0 + 1];
    return out;
}

double black_scholes_put(double spot, double strike, double rate, double dividend, double vol, double maturity) {
    require(spot > 0.0 && strike > 0.0 && vol > 0.0 && maturity > 0.0, "Black-Scholes inputs must be positive");
    const double sd = vol * std::sqrt(maturity);
    const double d1 = (std::log(spot / strike) + (rate - dividend + 0.5 * vol * vol) * maturity) / sd;
    const double d2 = d1 - sd;
    return strike * std::exp(-rate * maturity) * normal_cdf(-d2) - spot * std::exp(-dividend * maturity) * normal_cdf(-d1);
}

double black_scholes_call(double spot, double strike, double rate, double dividend, double vol, double maturity) {
    require(spot > 0.0 && strike > 0.0 && vol > 0.0 && maturity > 0.0, "Black-Scholes inputs must be positive");
    const double sd = vol * std::sqrt(maturity);
    const double d1 = (std::log(spot / strike) + (rate - dividend + 0.5 * vol * vol) * maturity) / sd;
    const double d2 = d1 - sd;
    return spot * std::exp(-dividend * maturity) * normal_cdf(d1) - strike * std::exp(-rate * maturity) * normal_cdf(d2);
}

double xva_european_closed_form(double european_value, const DerivedConstants& dc, double maturity,
                                MtmConvention convention) {
    const double lambda = dc.intensity_sum;
    if (convention == MtmConvention::RiskyMark) {
        return -european_value * std::expm1((dc.c_plus - lambda) * maturity);
    }
    const double defaulted = -std::expm1(-lambda * maturity);
    // (1 - e^{-lambda T}) / lambda, by its series near lambda = 0.
    const double lt = lambda * maturity;
    const double ratio = lambda < 1e-8 ? maturity * (1.0 - 0.5 * lt + lt * lt / 6.0) : defaulted / lambda;
    return european_value * (defaulted - dc.c_plus * ratio);
}

} // namespace xva

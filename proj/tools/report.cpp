#include "report.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace xva::cli {

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

PricingResult price(const Experiment& e) {
    return compute_xva(e.market(), e.credit, e.make_payoff(), e.convention, e.method, e.budgets, e.policy());
}

std::string csv_row(const Experiment& e, const PricingResult& r) {
    std::ostringstream out;
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_time_s);
    out << to_string(e.payoff) << ',' << e.dim << ',' << to_string(e.method) << ',' << to_string(e.convention) << ','
        << e.budgets.points << ',' << (e.method == Method::GprMc ? e.budgets.inner_paths : 0) << ','
        << shortest(r.riskless_v0) << ',' << shortest(r.risky_v0) << ',' << shortest(r.xva) << ','
        << shortest(r.european0.std_error) << ',' << wall << ',' << e.seed;
    return out.str();
}

void run_experiments(const std::vector<Experiment>& experiments, std::ostream& csv, std::ostream* log) {
    csv << kCsvHeader << '\n';
    for (std::size_t i = 0; i < experiments.size(); ++i) {
        const auto& e = experiments[i];
        if (log) {
            *log << '[' << i + 1 << '/' << experiments.size() << "] " << e.name << ": " << to_string(e.payoff)
                 << " d=" << e.dim << ' ' << to_string(e.method) << " M=" << to_string(e.convention)
                 << " P=" << e.budgets.points << std::endl;
        }
        const auto r = price(e);
        csv << csv_row(e, r) << '\n' << std::flush;
    }
}

std::string summary(const Experiment& e, const PricingResult& r) {
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "payoff      %s, d = %zu\n"
                  "method      %s, M = %s, P = %zu%s\n"
                  "V0          %.6f\n"
                  "Vhat0       %.6f\n"
                  "XVA         %.6f\n"
                  "V_EU(0)     %.6f +- %.6f\n"
                  "wall time   %.2f s\n",
                  to_string(e.payoff), e.dim, to_string(e.method), to_string(e.convention), e.budgets.points,
                  e.method == Method::GprMc ? (", inner paths = " + std::to_string(e.budgets.inner_paths)).c_str() : "",
                  r.riskless_v0, r.risky_v0, r.xva, r.european0.price, r.european0.std_error, r.wall_time_s);
    return buf;
}

} // namespace xva::cli

#include "xva/risky.hpp"

#include "xva/error.hpp"

#include <sstream>

namespace xva {

namespace {

constexpr const char* kModule = "xva-pricer";

struct Denominators {
    double plus;
    double minus;
};

Denominators denominators(const DerivedConstants& dc, double dt) {
    const Denominators out{1.0 - 0.5 * dt * dc.c_plus, 1.0 - 0.5 * dt * dc.c_minus};
    if (!(out.plus > 0.0) || !(out.minus > 0.0)) {
        std::ostringstream msg;
        msg << "implicit update needs 1 - dt/2 c > 0, got " << out.plus << " and " << out.minus;
        throw StabilityViolation(kModule, msg.str());
    }
    return out;
}

} // namespace

const char* to_string(MtmConvention convention) noexcept {
    return convention == MtmConvention::RisklessMark ? "V" : "Vhat";
}

double source_g(double m_plus, double m_minus, const DerivedConstants& dc) {
    return m_plus * dc.c_plus + m_minus * dc.c_minus;
}

double solve_implicit_prop1(double e, double h, const DerivedConstants& dc, double dt) {
    const Denominators den = denominators(dc, dt);
    if (h <= 0.0) {
        if (e <= h * den.minus) return h;
        if (e <= 0.0) return e / den.minus;
        return e / den.plus;
    }
    if (e <= h * den.plus) return h;
    return e / den.plus;
}

double solve_implicit_free(double e, const DerivedConstants& dc, double dt) {
    const Denominators den = denominators(dc, dt);
    return e > 0.0 ? e / den.plus : e / den.minus;
}

} // namespace xva

#pragma once

#include "xva/market.hpp"
#include "xva/pricer.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace xva::cli {

/// Malformed or invalid configuration; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, int line, const std::string& message);
    int line() const noexcept { return line_; }

private:
    int line_;
};

enum class PayoffKind { GeometricPut, CallOnMax, Swaption };

/// One fully specified pricing run. Defaults reproduce the reference setup:
/// S0 = 100, r = 0.03, eta = 0, sigma = 0.25, rho = 0.2, T = 1, N = 40,
/// lambda_B = lambda_C = 0.04, R_B = R_C = 0.3, K = 100.
struct Experiment {
    std::string name = "default";
    PayoffKind payoff = PayoffKind::GeometricPut;
    std::size_t dim = 2;
    double strike = 100.0;
    double floor = -4.25;
    Method method = Method::GprEi;
    MtmConvention convention = MtmConvention::RisklessMark;

    double spot = 100.0;
    double rate = 0.03;
    double dividend = 0.0;
    double vol = 0.25;
    double rho = 0.2;
    double maturity = 1.0;
    int steps = 40;

    CreditParams credit{0.04, 0.04, 0.3, 0.3, FundingMode::Uncollateralized};
    Budgets budgets;
    std::uint64_t seed = 20230427;

    MarketParams market() const;
    Payoff make_payoff() const;
    RngPolicy policy() const;
};

const char* to_string(PayoffKind kind) noexcept;

/// Parses the flat key = value format. Keys before the first [section] are
/// shared defaults; each section is one experiment that overrides them. A
/// comma-separated value expands into one experiment per entry, and several
/// such keys expand into their Cartesian product.
std::vector<Experiment> parse_config(const std::string& text, const std::string& source = "<config>");
std::vector<Experiment> load_config(const std::string& path);

/// Inverse of parse_config for a single experiment.
std::string serialize(const Experiment& experiment);

/// Applies one key = value setting; throws ConfigError anchored at `line`.
void apply_setting(Experiment& experiment, const std::string& key, const std::string& value,
                   const std::string& source, int line);

/// Checks cross-key invariants (even d for swaptions, negative floor, ...).
void validate(const Experiment& experiment, const std::string& source, int line);

} // namespace xva::cli

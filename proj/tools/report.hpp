#pragma once

#include "config.hpp"

#include "xva/pricer.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace xva::cli {

inline constexpr const char* kCsvHeader =
    "payoff,d,method,convention,P,M_paths,V0,Vhat0,XVA,std_err,wall_time_s,seed";

PricingResult price(const Experiment& experiment);

/// One CSV line (no newline). Prices are written in shortest round-trip form,
/// so XVA reads back as exactly V0 - Vhat0.
std::string csv_row(const Experiment& experiment, const PricingResult& result);

/// Prices every experiment in order, streaming rows to `csv` after the header.
/// Progress lines go to `log` when given.
void run_experiments(const std::vector<Experiment>& experiments, std::ostream& csv, std::ostream* log = nullptr);

/// Human-readable summary of a single pricing.
std::string summary(const Experiment& experiment, const PricingResult& result);

} // namespace xva::cli

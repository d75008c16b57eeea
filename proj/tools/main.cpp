#include "config.hpp"
#include "report.hpp"

#include "xva/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct PriceFlags {
    std::string payoff = "geoput";
    std::string method = "gpr-ei";
    std::string mtm = "V";
    std::string funding = "uncollateralized";
};

} // namespace

int main(int argc, char** argv) {
    using namespace xva::cli;

    CLI::App app{"Bermudan XVA pricing by Gaussian process regression on Halton clouds.\n"
                 "Without a subcommand, prices one contract from the flags below.",
                 "xva"};
    app.set_version_flag("--version", "xva 0.1.0");

    Experiment single;
    PriceFlags flags;
    std::uint64_t seed = single.seed;
    app.add_option("--payoff", flags.payoff, "geoput | callmax | swaption")->capture_default_str();
    app.add_option("--d", single.dim, "number of assets")->capture_default_str();
    app.add_option("--strike", single.strike, "strike K (geoput, callmax)")->capture_default_str();
    app.add_option("--floor", single.floor, "negative floor (swaption)")->capture_default_str();
    app.add_option("--method", flags.method, "gpr-ei | gpr-mc")->capture_default_str();
    app.add_option("--mtm", flags.mtm, "close-out mark: V | Vhat")->capture_default_str();
    app.add_option("--points", single.budgets.points, "cloud size P")->capture_default_str();
    app.add_option("--inner-paths", single.budgets.inner_paths, "inner paths per point (gpr-mc)")
        ->capture_default_str();
    app.add_option("--european-pairs", single.budgets.european_pairs, "antithetic pairs per point for V_EU")
        ->capture_default_str();
    app.add_flag("--no-cv", [&](std::int64_t) { single.budgets.control_variate = false; },
                 "disable the European control variate");
    app.add_option("--spot", single.spot, "spot of every asset")->capture_default_str();
    app.add_option("--rate", single.rate, "riskless rate r")->capture_default_str();
    app.add_option("--eta", single.dividend, "dividend yield of every asset")->capture_default_str();
    app.add_option("--sigma", single.vol, "volatility of every asset")->capture_default_str();
    app.add_option("--rho", single.rho, "pairwise correlation")->capture_default_str();
    app.add_option("--maturity", single.maturity, "maturity T")->capture_default_str();
    app.add_option("--steps", single.steps, "exercise intervals N")->capture_default_str();
    app.add_option("--lambda-b", single.credit.lambda_b, "issuer default intensity")->capture_default_str();
    app.add_option("--lambda-c", single.credit.lambda_c, "counterparty default intensity")->capture_default_str();
    app.add_option("--recovery-b", single.credit.recovery_b, "issuer recovery rate")->capture_default_str();
    app.add_option("--recovery-c", single.credit.recovery_c, "counterparty recovery rate")->capture_default_str();
    app.add_option("--funding", flags.funding, "collateralized | uncollateralized")->capture_default_str();
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--threads", single.budgets.threads, "worker threads (0: XVA_THREADS or all cores)")
        ->capture_default_str();

    auto* run = app.add_subcommand("run", "run every experiment of a config file and write a CSV report");
    std::string config_path, output_path;
    bool print_config = false;
    unsigned run_threads = 0;
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("-o,--output", output_path, "CSV output file (default: stdout)");
    run->add_option("--threads", run_threads, "override the threads key of every experiment");
    run->add_flag("--print-config", print_config, "print the expanded effective config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*run) {
            auto experiments = load_config(config_path);
            if (run_threads > 0) {
                for (auto& e : experiments) e.budgets.threads = run_threads;
            }
            if (print_config) {
                for (const auto& e : experiments) std::cout << serialize(e) << '\n';
                return 0;
            }
            if (output_path.empty()) {
                run_experiments(experiments, std::cout, &std::cerr);
            } else {
                std::ofstream out(output_path);
                if (!out) throw ConfigError(output_path, 0, "cannot open output file");
                run_experiments(experiments, out, &std::cerr);
            }
            return 0;
        }

        const int line = 0;
        apply_setting(single, "payoff", flags.payoff, "--payoff", line);
        apply_setting(single, "method", flags.method, "--method", line);
        apply_setting(single, "mtm", flags.mtm, "--mtm", line);
        apply_setting(single, "funding", flags.funding, "--funding", line);
        single.seed = seed;
        single.name = "command line";
        validate(single, "flags", line);
        const auto result = price(single);
        std::cout << summary(single, result);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const xva::Error& e) {
        std::cerr << "numerical failure in " << e.module() << ": " << e.what() << '\n';
        return kNumericalError;
    }
}

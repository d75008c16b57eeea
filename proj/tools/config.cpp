#include "config.hpp"

#include "xva/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace xva::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        out.push_back(trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) return out;
        start = comma + 1;
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Setting {
    std::string key;
    std::string value;
    int line = 0;
};

struct Section {
    std::string name;
    int line = 0;
    std::vector<Setting> settings;
};

class ValueParser {
public:
    ValueParser(const std::string& source, int line, const std::string& key)
        : source_(source), line_(line), key_(key) {}

    double real(const std::string& v) const {
        double out = 0.0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) fail("'" + v + "' is not a number");
        return out;
    }

    template <class Int>
    Int integer(const std::string& v) const {
        Int out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
            fail("'" + v + "' is not a nonnegative integer");
        }
        return out;
    }

    bool boolean(const std::string& v) const {
        const std::string s = lower(v);
        if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
        if (s == "false" || s == "no" || s == "off" || s == "0") return false;
        fail("'" + v + "' is not a boolean");
        return false;
    }

    [[noreturn]] void fail(const std::string& why) const { throw ConfigError(source_, line_, key_ + ": " + why); }

private:
    const std::string& source_;
    int line_;
    const std::string& key_;
};

std::vector<Section> split_sections(const std::string& text, const std::string& source) {
    std::vector<Section> sections(1);
    std::set<std::string> names;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
        s = trim(s);
        if (s.empty() || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(source, line, "unterminated section header");
            const std::string name = trim(s.substr(1, s.size() - 2));
            if (name.empty()) throw ConfigError(source, line, "empty section name");
            if (!names.insert(name).second) throw ConfigError(source, line, "duplicate section [" + name + "]");
            sections.push_back({name, line, {}});
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line, "expected 'key = value'");
        const std::string key = lower(trim(s.substr(0, eq)));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(source, line, "missing key");
        if (value.empty()) throw ConfigError(source, line, key + ": missing value");
        for (const auto& prev : sections.back().settings) {
            if (prev.key == key) {
                throw ConfigError(source, line,
                                  key + ": duplicate key (first set on line " + std::to_string(prev.line) + ")");
            }
        }
        sections.back().settings.push_back({key, value, line});
    }
    return sections;
}

void expand(const Experiment& base, const std::vector<Setting>& settings, std::size_t index,
            const std::string& source, int section_line, std::vector<Experiment>& out) {
    if (index == settings.size()) {
        validate(base, source, section_line);
        out.push_back(base);
        return;
    }
    const Setting& s = settings[index];
    for (const auto& item : split_list(s.value)) {
        if (item.empty()) throw ConfigError(source, s.line, s.key + ": empty list entry");
        Experiment e = base;
        apply_setting(e, s.key, item, source, s.line);
        expand(e, settings, index + 1, source, section_line, out);
    }
}

} // namespace

ConfigError::ConfigError(std::string source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line_(line) {}

const char* to_string(PayoffKind kind) noexcept {
    switch (kind) {
    case PayoffKind::GeometricPut: return "geoput";
    case PayoffKind::CallOnMax: return "callmax";
    case PayoffKind::Swaption: return "swaption";
    }
    return "?";
}

MarketParams Experiment::market() const {
    return MarketParams::uniform(dim, spot, rate, dividend, vol, rho, maturity, steps);
}

Payoff Experiment::make_payoff() const {
    switch (payoff) {
    case PayoffKind::GeometricPut: return Payoff::geometric_put(dim, strike);
    case PayoffKind::CallOnMax: return Payoff::call_on_max(dim, strike);
    case PayoffKind::Swaption: return Payoff::swaption_with_floor(dim, floor);
    }
    return Payoff::geometric_put(dim, strike);
}

RngPolicy Experiment::policy() const { return RngPolicy::for_dimension(dim, seed); }

void apply_setting(Experiment& e, const std::string& key, const std::string& value, const std::string& source,
                   int line) {
    const ValueParser p(source, line, key);
    const std::string v = lower(value);
    if (key == "name") {
        e.name = value;
    } else if (key == "payoff") {
        if (v == "geoput" || v == "geometric-put") e.payoff = PayoffKind::GeometricPut;
        else if (v == "callmax" || v == "call-on-max") e.payoff = PayoffKind::CallOnMax;
        else if (v == "swaption") e.payoff = PayoffKind::Swaption;
        else p.fail("unknown payoff '" + value + "' (geoput, callmax, swaption)");
    } else if (key == "d") {
        e.dim = p.integer<std::size_t>(value);
    } else if (key == "strike") {
        e.strike = p.real(value);
    } else if (key == "floor") {
        e.floor = p.real(value);
    } else if (key == "method") {
        if (v == "gpr-ei") e.method = Method::GprEi;
        else if (v == "gpr-mc") e.method = Method::GprMc;
        else p.fail("unknown method '" + value + "' (gpr-ei, gpr-mc)");
    } else if (key == "mtm") {
        if (v == "v") e.convention = MtmConvention::RisklessMark;
        else if (v == "vhat") e.convention = MtmConvention::RiskyMark;
        else p.fail("unknown convention '" + value + "' (V, Vhat)");
    } else if (key == "spot") {
        e.spot = p.real(value);
    } else if (key == "rate") {
        e.rate = p.real(value);
    } else if (key == "dividend" || key == "eta") {
        e.dividend = p.real(value);
    } else if (key == "vol" || key == "sigma") {
        e.vol = p.real(value);
    } else if (key == "rho") {
        e.rho = p.real(value);
    } else if (key == "maturity") {
        e.maturity = p.real(value);
    } else if (key == "steps") {
        e.steps = p.integer<int>(value);
    } else if (key == "lambda_b") {
        e.credit.lambda_b = p.real(value);
    } else if (key == "lambda_c") {
        e.credit.lambda_c = p.real(value);
    } else if (key == "recovery_b") {
        e.credit.recovery_b = p.real(value);
    } else if (key == "recovery_c") {
        e.credit.recovery_c = p.real(value);
    } else if (key == "funding") {
        if (v == "collateralized") e.credit.funding = FundingMode::Collateralized;
        else if (v == "uncollateralized") e.credit.funding = FundingMode::Uncollateralized;
        else p.fail("unknown funding mode '" + value + "' (collateralized, uncollateralized)");
    } else if (key == "points") {
        e.budgets.points = p.integer<std::size_t>(value);
    } else if (key == "inner_paths") {
        e.budgets.inner_paths = p.integer<std::size_t>(value);
    } else if (key == "european_pairs") {
        e.budgets.european_pairs = p.integer<std::size_t>(value);
    } else if (key == "root_european_pairs") {
        e.budgets.root_european_pairs = p.integer<std::size_t>(value);
    } else if (key == "control_variate") {
        e.budgets.control_variate = p.boolean(value);
    } else if (key == "threads") {
        e.budgets.threads = p.integer<unsigned>(value);
    } else if (key == "gpr_noise_floor") {
        e.budgets.gpr.noise_floor = p.real(value);
    } else if (key == "gpr_subsample") {
        e.budgets.gpr.optimize_subsample = p.integer<std::size_t>(value);
    } else if (key == "seed") {
        e.seed = p.integer<std::uint64_t>(value);
    } else {
        p.fail("unknown key");
    }
}

void validate(const Experiment& e, const std::string& source, int line) {
    auto fail = [&](const std::string& why) { throw ConfigError(source, line, "[" + e.name + "] " + why); };
    if (e.dim < 1) fail("d must be at least 1");
    if (e.steps < 1) fail("steps must be at least 1");
    if (e.budgets.points < 1) fail("points must be at least 1");
    if (e.method == Method::GprMc && e.budgets.inner_paths < 1) fail("inner_paths must be at least 1");
    if (e.budgets.control_variate && (e.budgets.european_pairs < 1 || e.budgets.root_european_pairs < 1)) {
        fail("european_pairs and root_european_pairs must be positive with the control variate");
    }
    if (e.payoff == PayoffKind::Swaption && (e.dim % 2 != 0)) fail("swaption needs an even d");
    if (e.payoff == PayoffKind::Swaption && !(e.floor < 0.0)) fail("swaption floor must be negative");
    if (!(e.budgets.gpr.noise_floor >= 0.0)) fail("gpr_noise_floor must be nonnegative");
    try {
        const MarketParams m = e.market();
        m.validate();
        e.credit.validate();
    } catch (const Error& err) {
        fail(err.what());
    }
}

std::vector<Experiment> parse_config(const std::string& text, const std::string& source) {
    const auto sections = split_sections(text, source);
    const Section& defaults = sections.front();
    std::vector<Experiment> out;
    auto build = [&](const Section& section) {
        std::map<std::string, Setting> merged;
        std::vector<std::string> order;
        for (const auto* group : {&defaults.settings, &section.settings}) {
            for (const auto& s : *group) {
                if (!merged.count(s.key)) order.push_back(s.key);
                merged[s.key] = s;
            }
        }
        std::vector<Setting> ordered;
        for (const auto& k : order) ordered.push_back(merged[k]);
        Experiment base;
        base.name = section.name.empty() ? "default" : section.name;
        expand(base, ordered, 0, source, section.line, out);
    };
    if (sections.size() == 1) {
        build(defaults);
    } else {
        for (std::size_t i = 1; i < sections.size(); ++i) build(sections[i]);
    }
    return out;
}

std::vector<Experiment> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string serialize(const Experiment& e) {
    std::ostringstream out;
    auto put = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
    out << '[' << e.name << "]\n";
    put("payoff", to_string(e.payoff));
    put("d", std::to_string(e.dim));
    put("strike", format_double(e.strike));
    put("floor", format_double(e.floor));
    put("method", to_string(e.method));
    put("mtm", to_string(e.convention));
    put("spot", format_double(e.spot));
    put("rate", format_double(e.rate));
    put("dividend", format_double(e.dividend));
    put("vol", format_double(e.vol));
    put("rho", format_double(e.rho));
    put("maturity", format_double(e.maturity));
    put("steps", std::to_string(e.steps));
    put("lambda_b", format_double(e.credit.lambda_b));
    put("lambda_c", format_double(e.credit.lambda_c));
    put("recovery_b", format_double(e.credit.recovery_b));
    put("recovery_c", format_double(e.credit.recovery_c));
    put("funding", e.credit.funding == FundingMode::Collateralized ? "collateralized" : "uncollateralized");
    put("points", std::to_string(e.budgets.points));
    put("inner_paths", std::to_string(e.budgets.inner_paths));
    put("european_pairs", std::to_string(e.budgets.european_pairs));
    put("root_european_pairs", std::to_string(e.budgets.root_european_pairs));
    put("control_variate", e.budgets.control_variate ? "true" : "false");
    put("threads", std::to_string(e.budgets.threads));
    put("gpr_noise_floor", format_double(e.budgets.gpr.noise_floor));
    put("gpr_subsample", std::to_string(e.budgets.gpr.optimize_subsample));
    put("seed", std::to_string(e.seed));
    return out.str();
}

} // namespace xva::cli

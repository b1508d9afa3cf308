#pragma once

// Batch front end: config parsing, evaluation and the two renderings (table,
// CSV). Kept in a header so the test suite can drive it in-process.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbond/cbond.hpp"

namespace cbond::app {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    bool two_factor = false;
    CouponBondSpec bond;
    OneFactorMarket market1;
    VasicekMarket market2;
    double V0 = 0.0, r0 = 0.0, t = 0.0;
    std::vector<std::string> outputs;
    SimConfig mc;
};

namespace detail {

inline const json& field(const json& j, const std::string& parent, const std::string& key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError("missing field " + parent + key);
    return j.at(key);
}

inline double number(const json& j, const std::string& parent, const std::string& key) {
    const json& v = field(j, parent, key);
    if (!v.is_number()) throw ConfigError("field " + parent + key + " must be a number");
    return v.get<double>();
}

inline double number_or(const json& j, const std::string& parent, const std::string& key, double dflt) {
    return j.contains(key) ? number(j, parent, key) : dflt;
}

inline std::vector<double> numbers(const json& j, const std::string& parent, const std::string& key) {
    const json& v = field(j, parent, key);
    if (!v.is_array()) throw ConfigError("field " + parent + key + " must be an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
        if (!x.is_number()) throw ConfigError("field " + parent + key + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace detail

inline const std::vector<std::string>& known_outputs() {
    static const std::vector<std::string> k{"barriers", "price", "breakdown", "bankruptcy_cost", "duration", "tax",
                                            "mc"};
    return k;
}

inline RunConfig parse_config(const json& j) {
    using namespace detail;
    RunConfig c;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const json& model = field(j, "", "model");
    if (model == "one_factor") c.two_factor = false;
    else if (model == "two_factor") c.two_factor = true;
    else throw ConfigError("field model must be \"one_factor\" or \"two_factor\"");

    const json& b = field(j, "", "bond");
    c.bond.face = number(b, "bond.", "face");
    c.bond.dates = numbers(b, "bond.", "coupon_dates");
    c.bond.coupons = numbers(b, "bond.", "coupons");
    c.bond.recovery = number(b, "bond.", "recovery");
    c.bond.intensities = numbers(b, "bond.", "intensities");
    c.bond.tax_rate = number_or(b, "bond.", "tax_rate", 0.0);

    const json& m = field(j, "", "market");
    if (!c.two_factor) {
        c.market1 = {number(m, "market.", "r"), number(m, "market.", "b"), number(m, "market.", "s_V")};
    } else {
        auto& v = c.market2;
        v.a1 = number(m, "market.", "a1");
        v.a2 = number(m, "market.", "a2");
        v.s_r = number(m, "market.", "s_r");
        v.rho = number(m, "market.", "rho");
        v.b = number(m, "market.", "b");
        const json& sv = field(m, "market.", "s_V");
        if (sv.is_number()) v.s_V = PiecewiseConstant(sv.get<double>());
        else if (sv.is_object())
            v.s_V = PiecewiseConstant(numbers(sv, "market.s_V.", "breakpoints"), numbers(sv, "market.s_V.", "values"));
        else throw ConfigError("field market.s_V must be a number or {breakpoints, values}");
    }

    const json& val = field(j, "", "valuation");
    c.V0 = number(val, "valuation.", "V0");
    if (c.two_factor) c.r0 = number(val, "valuation.", "r0");
    c.t = number_or(val, "valuation.", "t", 0.0);

    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        if (!o.is_array()) throw ConfigError("field outputs must be an array of strings");
        for (const json& x : o) {
            if (!x.is_string()) throw ConfigError("field outputs must be an array of strings");
            const std::string s = x.get<std::string>();
            if (std::find(known_outputs().begin(), known_outputs().end(), s) == known_outputs().end())
                throw ConfigError("field outputs: unknown quantity \"" + s + "\"");
            c.outputs.push_back(s);
        }
    } else {
        c.outputs = {"barriers", "price", "breakdown", "bankruptcy_cost", "duration"};
    }

    if (j.contains("mc")) {
        const json& mc = j.at("mc");
        const double paths = number_or(mc, "mc.", "paths", 100000);
        if (!(paths >= 1)) throw ConfigError("field mc.paths must be >= 1");
        c.mc.n_paths = static_cast<std::size_t>(paths);
        const double seed = number_or(mc, "mc.", "seed", 1);
        if (!(seed >= 0)) throw ConfigError("field mc.seed must be >= 0");
        c.mc.seed = static_cast<std::uint64_t>(seed);
        c.mc.substeps_per_interval = static_cast<unsigned>(number_or(mc, "mc.", "substeps", 0));
    }

    try {
        c.bond.validate();
        if (c.two_factor) c.market2.validate();
        else c.market1.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (!(c.V0 > 0.0)) throw ConfigError("field valuation.V0 must be > 0");
    if (!(c.t >= 0.0)) throw ConfigError("field valuation.t must be >= 0");
    return c;
}

struct Row {
    std::string name;
    double value;
    std::string units;
    std::string component;
};

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline void write_table(std::ostream& os, const std::vector<Row>& rows) {
    std::size_t w = 4;
    for (const Row& r : rows) w = std::max(w, r.name.size());
    os << std::left << std::setw(static_cast<int>(w) + 2) << "name" << std::setw(20) << "value"
       << std::setw(12) << "units" << "component\n";
    for (const Row& r : rows)
        os << std::left << std::setw(static_cast<int>(w) + 2) << r.name << std::setw(20) << fmt("%.10g", r.value)
           << std::setw(12) << r.units << r.component << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<Row>& rows) {
    os << "name,value,units,component\n";
    for (const Row& r : rows) os << r.name << ',' << fmt("%.17g", r.value) << ',' << r.units << ',' << r.component << '\n';
}

inline bool wants(const RunConfig& c, const std::string& q) {
    return std::find(c.outputs.begin(), c.outputs.end(), q) != c.outputs.end();
}

inline std::vector<Row> evaluate(const RunConfig& c) {
    std::vector<Row> rows;
    const CouponBondSpec& s = c.bond;
    const std::size_t N = s.size();
    const bool at_zero = c.t == 0.0;
    auto need_zero = [&](const char* what) {
        if (!at_zero) throw ConfigError(std::string("field valuation.t must be 0 for ") + what);
    };
    const std::string kunits = c.two_factor ? "relative" : "currency";

    if (!c.two_factor) {
        const auto& m = c.market1;
        const BarrierSchedule K = solve_barriers(s, m);
        if (wants(c, "barriers"))
            for (std::size_t i = 1; i <= N; ++i) rows.push_back({"K_" + std::to_string(i), K[i], kunits, "barriers"});
        double B = 0.0, E = 0.0;
        const bool price = wants(c, "price") || wants(c, "mc");
        if (price) {
            B = bond_price(s, m, K, c.V0, c.t);
            E = equity_price(s, m, K, c.V0, c.t);
        }
        if (wants(c, "price")) {
            rows.push_back({at_zero ? "B_0" : "B_t", B, "currency", "price"});
            rows.push_back({at_zero ? "E_0" : "E_t", E, "currency", "price"});
        }
        if (wants(c, "breakdown")) {
            need_zero("breakdown");
            const PriceBreakdown b = bond_initial_breakdown(s, m, K, c.V0);
            rows.push_back({"survival_pv", b.survival_pv, "currency", "breakdown"});
            rows.push_back({"coupon_pv", b.coupon_pv, "currency", "breakdown"});
            rows.push_back({"expected_default_pv", b.expected_default_pv, "currency", "breakdown"});
            rows.push_back({"unexpected_default_pv", b.unexpected_default_pv, "currency", "breakdown"});
        }
        if (wants(c, "bankruptcy_cost")) {
            need_zero("bankruptcy_cost");
            rows.push_back({"bankruptcy_cost", bankruptcy_cost(s, m, K, c.V0), "currency", "price"});
        }
        if (wants(c, "tax")) rows.push_back({"taxed_B", taxed_bond_price(s, m, K, c.V0, c.t), "currency", "tax"});
        if (wants(c, "duration")) {
            need_zero("duration");
            const DurationReport d = duration_report(s, m, K, c.V0);
            rows.push_back({"duration", d.duration, "years", "duration"});
            rows.push_back({"duration_fixed_barriers", d.fixed_barriers, "years", "duration"});
            rows.push_back({"default_free_duration", default_free_duration(s, m.r, 0.0), "years", "duration"});
        }
        if (wants(c, "mc")) {
            need_zero("mc");
            const McReport r = mc_one_factor(s, m, K, c.V0, c.mc);
            auto add = [&](const std::string& n, double closed, const McEstimate& e) {
                rows.push_back({"mc_" + n, e.mean, "currency", "mc"});
                rows.push_back({"mc_" + n + "_std_error", e.std_error, "currency", "mc"});
                rows.push_back({"mc_" + n + "_ratio", std::abs(closed - e.mean) / e.std_error, "std_errors", "mc"});
            };
            add("B_0", s.tax_rate > 0.0 ? taxed_bond_price(s, m, K, c.V0, 0.0) : B, r.bond);
            add("E_0", E, r.equity);
            add("bankruptcy_cost", bankruptcy_cost(s, m, K, c.V0), r.bankruptcy_cost);
        }
        return rows;
    }

    const auto& m = c.market2;
    const BarrierSchedule K = solve_barriers_2f(s, m);
    if (wants(c, "barriers"))
        for (std::size_t i = 1; i <= N; ++i) rows.push_back({"K_" + std::to_string(i), K[i], kunits, "barriers"});
    double B = 0.0, E = 0.0;
    if (wants(c, "price") || wants(c, "mc")) {
        B = bond_price_2f(s, m, K, c.V0, c.r0, c.t);
        E = equity_price_2f(s, m, K, c.V0, c.r0, c.t);
    }
    if (wants(c, "price")) {
        rows.push_back({at_zero ? "B_0" : "B_t", B, "currency", "price"});
        rows.push_back({at_zero ? "E_0" : "E_t", E, "currency", "price"});
    }
    if (wants(c, "breakdown")) {
        need_zero("breakdown");
        const PriceBreakdown b = bond_initial_breakdown_2f(s, m, K, c.V0, c.r0);
        rows.push_back({"survival_pv", b.survival_pv, "currency", "breakdown"});
        rows.push_back({"coupon_pv", b.coupon_pv, "currency", "breakdown"});
        rows.push_back({"expected_default_pv", b.expected_default_pv, "currency", "breakdown"});
        rows.push_back({"unexpected_default_pv", b.unexpected_default_pv, "currency", "breakdown"});
    }
    if (wants(c, "bankruptcy_cost")) {
        need_zero("bankruptcy_cost");
        rows.push_back({"bankruptcy_cost", bankruptcy_cost_2f(s, m, K, c.V0, c.r0), "currency", "price"});
    }
    if (wants(c, "tax"))
        rows.push_back({"taxed_B", taxed_bond_price_2f(s, m, K, c.V0, c.r0, c.t), "currency", "tax"});
    if (wants(c, "duration")) {
        need_zero("duration");
        const Duration2f d = duration_2f(s, m, K, c.V0, c.r0);
        rows.push_back({"duration", d.duration, "years", "duration"});
        rows.push_back({"zcb_duration", d.zcb_duration, "years", "duration"});
        rows.push_back({"prop1_condition", d.prop1_condition ? 1.0 : 0.0, "flag", "duration"});
    }
    if (wants(c, "mc")) {
        need_zero("mc");
        const McReport r = mc_two_factor(s, m, K, c.V0, c.r0, c.mc);
        auto add = [&](const std::string& n, double closed, const McEstimate& e) {
            rows.push_back({"mc_" + n, e.mean, "currency", "mc"});
            rows.push_back({"mc_" + n + "_std_error", e.std_error, "currency", "mc"});
            rows.push_back({"mc_" + n + "_ratio", std::abs(closed - e.mean) / e.std_error, "std_errors", "mc"});
        };
        add("B_0", s.tax_rate > 0.0 ? taxed_bond_price_2f(s, m, K, c.V0, c.r0, 0.0) : B, r.bond);
        add("E_0", E, r.equity);
        add("bankruptcy_cost", bankruptcy_cost_2f(s, m, K, c.V0, c.r0), r.bankruptcy_cost);
    }
    return rows;
}

enum ExitCode { ok = 0, usage = 1, bad_config = 2, numerical = 3, unsupported = 4 };

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Defaultable discrete-coupon bond pricer"};
    app.require_subcommand(1);
    std::string config, csv;
    bool mc_check = false, all = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> tax;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "valuation config (JSON)")->required();
        sub->add_option("--csv", csv, "write rows as CSV to this path");
        sub->add_flag("--mc-check", mc_check, "append the Monte Carlo cross-check");
        sub->add_option("--seed", seed, "Monte Carlo seed");
        sub->add_option("--paths", paths, "Monte Carlo paths");
        sub->add_option("--tax", tax, "tax rate on coupons (overrides bond.tax_rate)");
    };
    auto* price = app.add_subcommand("price", "barriers, prices, breakdown and bankruptcy cost");
    auto* barriers = app.add_subcommand("barriers", "expected-default barriers");
    auto* dur = app.add_subcommand("duration", "duration with respect to the short rate");
    auto* mcc = app.add_subcommand("mc-check", "Monte Carlo cross-check of the closed forms");
    auto* run = app.add_subcommand("run", "outputs listed in the config (or everything with --all)");
    for (auto* s : {price, barriers, dur, mcc, run}) common(s);
    run->add_flag("--all", all, "every quantity including the Monte Carlo check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }

    try {
        RunConfig cfg;
        {
            std::ifstream in(config);
            if (!in) throw ConfigError("cannot read config file " + config);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("malformed JSON: ") + e.what());
            }
            cfg = parse_config(j);
        }
        if (tax) {
            if (!(*tax >= 0.0 && *tax < 1.0)) throw ConfigError("--tax must lie in [0, 1)");
            cfg.bond.tax_rate = *tax;
        }
        if (seed) cfg.mc.seed = *seed;
        if (paths) {
            if (*paths < 1) throw ConfigError("--paths must be >= 1");
            cfg.mc.n_paths = *paths;
        }
        if (price->parsed()) cfg.outputs = {"barriers", "price", "breakdown", "bankruptcy_cost"};
        if (barriers->parsed()) cfg.outputs = {"barriers"};
        if (dur->parsed()) cfg.outputs = {"duration"};
        if (mcc->parsed()) cfg.outputs = {"price", "mc"};
        if (all) cfg.outputs = known_outputs();
        if ((tax || cfg.bond.tax_rate > 0.0) && !wants(cfg, "tax") && !mcc->parsed()) cfg.outputs.push_back("tax");
        if (mc_check && !wants(cfg, "mc")) cfg.outputs.push_back("mc");

        const std::vector<Row> rows = evaluate(cfg);
        write_table(out, rows);
        if (!csv.empty()) {
            std::ofstream f(csv, std::ios::binary);
            if (!f) throw ConfigError("cannot write CSV file " + csv);
            write_csv(f, rows);
        }
        return ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return bad_config;
    } catch (const UnsupportedCaseError& e) {
        err << "unsupported case: " << e.what() << '\n';
        return unsupported;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical;
    }
}

}  // namespace cbond::app

// Scenario ingestion (JSON parameter document + CSV time series), synthetic
// scenario generation, and result-row persistence (CSV/JSON).
#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridpact/core.hpp"
#include "gridpact/games.hpp"

namespace gridpact {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Hourly series file: `hour,residual_capacity_mw,price_eur_mwh,h2_demand_kg`
/// with 0-based consecutive hours.
struct SeriesFile {
    std::vector<double> residual_capacity_mw;
    std::vector<double> price_eur_mwh;
    std::vector<double> h2_demand_kg;
};

inline SeriesFile parse_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("series: empty file");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            size_t b = cell.find_first_not_of(" \t\r");
            size_t e = cell.find_last_not_of(" \t\r");
            out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
        }
        return out;
    };
    const std::vector<std::string> expected = {"hour", "residual_capacity_mw", "price_eur_mwh",
                                               "h2_demand_kg"};
    auto header = split(line);
    for (const auto& col : expected)
        if (std::find(header.begin(), header.end(), col) == header.end())
            throw IoError("series: missing column " + col);
    std::vector<int> pos;
    for (const auto& col : expected)
        pos.push_back(static_cast<int>(std::find(header.begin(), header.end(), col) - header.begin()));

    SeriesFile sf;
    int expect_hour = 0, line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split(line);
        if (cells.size() < header.size())
            throw IoError("series: line " + std::to_string(line_no) + ": too few cells");
        double vals[4];
        for (int i = 0; i < 4; ++i) {
            try {
                size_t used = 0;
                vals[i] = std::stod(cells[static_cast<size_t>(pos[i])], &used);
            } catch (const std::exception&) {
                throw IoError("series: line " + std::to_string(line_no) + ": bad number in " +
                              expected[static_cast<size_t>(i)]);
            }
            if (!std::isfinite(vals[i]))
                throw IoError("series: line " + std::to_string(line_no) + ": non-finite value");
        }
        if (static_cast<int>(vals[0]) != expect_hour)
            throw IoError("series: line " + std::to_string(line_no) +
                          ": hours must be 0-based consecutive (saw " + cells[0] + ", expected " +
                          std::to_string(expect_hour) + ")");
        ++expect_hour;
        sf.residual_capacity_mw.push_back(vals[1]);
        sf.price_eur_mwh.push_back(vals[2]);
        sf.h2_demand_kg.push_back(vals[3]);
    }
    if (sf.residual_capacity_mw.empty()) throw IoError("series: no data rows");
    return sf;
}

inline SeriesFile load_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("series: cannot open " + path);
    return parse_series_csv(in);
}

namespace detail {

inline double num(const nlohmann::json& j, const char* key, double fallback,
                  bool* present = nullptr) {
    if (present) *present = j.contains(key);
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw IoError(std::string("scenario: ") + key + " must be a number");
    return j.at(key).get<double>();
}

inline std::vector<double> series(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array())
        throw IoError(std::string("scenario: missing series ") + key);
    return j.at(key).get<std::vector<double>>();
}

}  // namespace detail

/// Parses the JSON parameter document; hourly series come either inline, from
/// a `network.series_csv` reference, or from `series_path` (which wins).
/// `money_unit: "keur"` converts capital and tariffs to euros at load.
/// Output is validated and normalized.
inline ScenarioData load_scenario(const std::string& param_path, const std::string& series_path = "",
                                  std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(param_path);
    if (!in) throw IoError("scenario: cannot open " + param_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("scenario: parse error: " + std::string(e.what()));
    }
    double money = 1.0;
    if (doc.contains("money_unit")) {
        std::string u = doc.at("money_unit").get<std::string>();
        if (u == "keur") money = 1000.0;
        else if (u != "eur") throw IoError("scenario: money_unit must be eur or keur");
    }
    ScenarioData sc;
    try {
        const auto& hz = doc.at("horizon");
        sc.horizon.hours = hz.at("hours").get<int>();

        const auto& tech = doc.at("tech");
        sc.tech.annualized_capital_eur_per_mw_yr =
            money * detail::num(tech, "annualized_capital_per_mw_yr", 0.0);
        bool has = false;
        double v = detail::num(tech, "capital_per_mw", 0.0, &has);
        if (has) sc.tech.capital_eur_per_mw = money * v;
        v = detail::num(tech, "discount_rate", 0.0, &has);
        if (has) sc.tech.discount_rate = v;
        v = detail::num(tech, "lifetime_years", 0.0, &has);
        if (has) sc.tech.lifetime_years = v;
        sc.tech.min_load_ratio = detail::num(tech, "min_load_ratio", 0.0);
        if (tech.contains("eta_kg_per_mwh"))
            sc.tech.eta_kg_per_mwh = tech.at("eta_kg_per_mwh").get<double>();
        else if (tech.contains("eta_fraction"))
            sc.tech.eta_kg_per_mwh =
                efficiency_fraction_to_kg_per_mwh(tech.at("eta_fraction").get<double>());

        const auto& tf = doc.at("tariffs");
        sc.tariffs[ContractKind::FA] = money * tf.at("fa").get<double>();
        sc.tariffs[ContractKind::NFA85] = money * tf.at("nfa85").get<double>();
        sc.tariffs[ContractKind::NFA] = money * tf.at("nfa").get<double>();

        const auto& pr = doc.at("prices");
        sc.prices.hydrogen_eur_per_kg = pr.at("hydrogen_per_kg").get<double>();
        sc.prices.crc_eur_per_mw = detail::num(pr, "crc_per_mw", 0.0);
        sc.prices.crc_plus_eur_per_mw = detail::num(pr, "crc_plus_per_mw", 0.0);
        if (pr.contains("crc_series_per_mw"))
            sc.prices.crc_series_eur_per_mw = detail::series(pr, "crc_series_per_mw");
        if (pr.contains("electricity_per_mwh"))
            sc.prices.electricity_eur_per_mwh = detail::series(pr, "electricity_per_mwh");

        const auto& net = doc.at("network");
        std::string csv = series_path;
        if (csv.empty() && net.contains("series_csv")) csv = net.at("series_csv").get<std::string>();
        if (!csv.empty()) {
            auto sf = load_series_csv(csv);
            sc.network.residual_capacity_mw = sf.residual_capacity_mw;
            sc.network.h2_offtake_kg_per_h = sf.h2_demand_kg;
            if (sc.prices.electricity_eur_per_mwh.empty())
                sc.prices.electricity_eur_per_mwh = sf.price_eur_mwh;
        } else {
            sc.network.residual_capacity_mw = detail::series(net, "residual_capacity_mw");
            sc.network.h2_offtake_kg_per_h = detail::series(net, "h2_offtake_kg_per_h");
        }

        const auto& bg = doc.at("budgets");
        sc.budgets.nfa85_time_fraction = detail::num(bg, "nfa85_time_fraction", 0.15);
        sc.budgets.nfa_energy_multiplier = detail::num(bg, "nfa_energy_multiplier", 1.0);
        sc.budgets.cm_budget_eur_per_h = detail::num(bg, "cm_budget_per_h", 0.0);
        sc.budgets.theta = detail::num(bg, "theta", 0.0);
        sc.budgets.curtail_penalty_eur_per_mw = detail::num(bg, "curtail_penalty_per_mw", 1.0);
        if (bg.contains("mode")) {
            std::string mode = bg.at("mode").get<std::string>();
            if (mode == "pin-crc") sc.budgets.mode = BudgetBindingMode::PinCrc;
            else if (mode == "pin-crc-plus") sc.budgets.mode = BudgetBindingMode::PinCrcPlus;
            else throw IoError("scenario: budgets.mode must be pin-crc or pin-crc-plus");
        }
        bool has_m = false;
        double m = detail::num(doc, "big_m_mw", 0.0, &has_m);
        if (has_m) sc.big_m_mw = m;
        double as = detail::num(doc, "annualization_scale", 0.0, &has_m);
        if (has_m) sc.annualization_scale = as;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("scenario: schema error: " + std::string(e.what()));
    }
    return validate_scenario(sc, warnings);
}

/// Synthetic year mimicking the published aggregates: peak residual capacity
/// with daily congestion dips, noisy price level, flat hydrogen offtake.
/// Tech/tariff/budget parameters default to the reference values.
struct SyntheticSpec {
    int hours = 8760;
    double peak_mw = 63.0;
    double congestion_depth = 0.3;       // in [0,1]
    int congestion_hours_per_day = 4;    // <= 24
    double price_level_eur_mwh = 50.0;
    double price_volatility_eur_mwh = 15.0;
    double demand_cap_kg_per_h = 1800.0;
    unsigned seed = 1;
};

inline ScenarioData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.hours < 1) throw InvalidParameter("synthetic: hours must be >= 1");
    if (spec.congestion_depth < 0.0 || spec.congestion_depth > 1.0)
        throw InvalidParameter("synthetic: congestion depth in [0,1]");
    if (spec.congestion_hours_per_day < 0 || spec.congestion_hours_per_day > 24)
        throw InvalidParameter("synthetic: congestion hours per day in [0,24]");

    std::mt19937 rng(spec.seed);
    std::uniform_int_distribution<int> start_dist(
        0, std::max(0, 24 - spec.congestion_hours_per_day));
    std::uniform_real_distribution<double> noise(-spec.price_volatility_eur_mwh,
                                                 spec.price_volatility_eur_mwh);
    ScenarioData sc;
    sc.horizon.hours = spec.hours;
    sc.tech.capital_eur_per_mw = 937500.0;
    sc.tech.discount_rate = 0.1;
    sc.tech.lifetime_years = 15.0;
    sc.tech.min_load_ratio = 0.2;
    sc.tech.eta_kg_per_mwh = efficiency_fraction_to_kg_per_mwh(0.7);
    sc.tariffs[ContractKind::FA] = 87600.0;
    sc.tariffs[ContractKind::NFA85] = 43800.0;
    sc.tariffs[ContractKind::NFA] = 26280.0;
    sc.prices.hydrogen_eur_per_kg = 10.0;
    sc.prices.crc_eur_per_mw = 40.0;
    sc.prices.crc_plus_eur_per_mw = 1.0;
    sc.budgets.nfa85_time_fraction = 0.15;
    sc.budgets.nfa_energy_multiplier = 1.0;
    sc.budgets.cm_budget_eur_per_h = 0.0;
    sc.budgets.theta = 0.0;
    sc.budgets.curtail_penalty_eur_per_mw = 1.0;
    for (int day = 0; day * 24 < spec.hours; ++day) {
        int start = start_dist(rng);
        for (int h = 0; h < 24 && day * 24 + h < spec.hours; ++h) {
            bool congested = h >= start && h < start + spec.congestion_hours_per_day;
            sc.network.residual_capacity_mw.push_back(
                congested ? spec.peak_mw * (1.0 - spec.congestion_depth) : spec.peak_mw);
            sc.prices.electricity_eur_per_mwh.push_back(
                std::max(0.0, spec.price_level_eur_mwh + noise(rng)));
            sc.network.h2_offtake_kg_per_h.push_back(spec.demand_cap_kg_per_h);
        }
    }
    return validate_scenario(sc);
}

/// One flat summary per solve, the unit of all emitted tables.
struct ResultRow {
    std::string case_label;
    std::string sweep_param;  // "-" when not swept
    double sweep_value = 0.0;
    double p_grid = 0.0;
    double p_el_fa = 0.0, p_el_nfa85 = 0.0, p_el_nfa = 0.0;
    double ely_profit = 0.0, no_profit = 0.0;
    double gap = 0.0;
    double runtime_s = 0.0;
    std::string status = "optimal";
};

inline ResultRow to_result_row(const SolutionBundle& b, const std::string& sweep_param = "-",
                               double sweep_value = 0.0) {
    ResultRow r;
    r.case_label = to_string(b.game);
    r.sweep_param = sweep_param;
    r.sweep_value = sweep_value;
    r.p_grid = b.p_grid;
    r.p_el_fa = b.p_el[0];
    r.p_el_nfa85 = b.p_el[1];
    r.p_el_nfa = b.p_el[2];
    r.ely_profit = b.ely_profit;
    r.no_profit = b.no_profit;
    r.gap = b.gap;
    r.runtime_s = b.runtime_s;
    r.status = to_string(b.status);
    return r;
}

enum class ResultFormat { CSV, JSON };

inline const char* kResultColumns[] = {"case",     "sweep_param", "sweep_value", "p_grid",
                                       "p_el_fa",  "p_el_nfa85",  "p_el_nfa",    "ely_profit",
                                       "no_profit", "gap",        "runtime_s",   "status"};

inline void write_results(const std::vector<ResultRow>& rows, std::ostream& os,
                          ResultFormat format) {
    if (rows.empty()) throw IoError("results: no rows to write");
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    if (format == ResultFormat::CSV) {
        bool first = true;
        for (const char* c : kResultColumns) {
            os << (first ? "" : ",") << c;
            first = false;
        }
        os << "\n";
        for (const auto& r : rows)
            os << r.case_label << "," << r.sweep_param << "," << fmt(r.sweep_value) << ","
               << fmt(r.p_grid) << "," << fmt(r.p_el_fa) << "," << fmt(r.p_el_nfa85) << ","
               << fmt(r.p_el_nfa) << "," << fmt(r.ely_profit) << "," << fmt(r.no_profit) << ","
               << fmt(r.gap) << "," << fmt(r.runtime_s) << "," << r.status << "\n";
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            arr.push_back({{"case", r.case_label},
                           {"sweep_param", r.sweep_param},
                           {"sweep_value", r.sweep_value},
                           {"p_grid", r.p_grid},
                           {"p_el_fa", r.p_el_fa},
                           {"p_el_nfa85", r.p_el_nfa85},
                           {"p_el_nfa", r.p_el_nfa},
                           {"ely_profit", r.ely_profit},
                           {"no_profit", r.no_profit},
                           {"gap", r.gap},
                           {"runtime_s", r.runtime_s},
                           {"status", r.status}});
        }
        os << arr.dump(2) << "\n";
    }
}

inline void write_results(const std::vector<ResultRow>& rows, const std::string& path,
                          ResultFormat format) {
    std::ofstream os(path);
    if (!os) throw IoError("results: cannot write " + path);
    write_results(rows, os, format);
}

inline std::vector<ResultRow> load_results(std::istream& in, ResultFormat format) {
    std::vector<ResultRow> rows;
    if (format == ResultFormat::CSV) {
        std::string line;
        if (!std::getline(in, line)) throw IoError("results: empty file");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (cells.size() != 12) throw IoError("results: malformed row");
            ResultRow r;
            r.case_label = cells[0];
            r.sweep_param = cells[1];
            r.sweep_value = std::stod(cells[2]);
            r.p_grid = std::stod(cells[3]);
            r.p_el_fa = std::stod(cells[4]);
            r.p_el_nfa85 = std::stod(cells[5]);
            r.p_el_nfa = std::stod(cells[6]);
            r.ely_profit = std::stod(cells[7]);
            r.no_profit = std::stod(cells[8]);
            r.gap = std::stod(cells[9]);
            r.runtime_s = std::stod(cells[10]);
            r.status = cells[11];
            rows.push_back(std::move(r));
        }
    } else {
        nlohmann::json arr;
        in >> arr;
        for (const auto& o : arr) {
            ResultRow r;
            r.case_label = o.at("case").get<std::string>();
            r.sweep_param = o.at("sweep_param").get<std::string>();
            r.sweep_value = o.at("sweep_value").get<double>();
            r.p_grid = o.at("p_grid").get<double>();
            r.p_el_fa = o.at("p_el_fa").get<double>();
            r.p_el_nfa85 = o.at("p_el_nfa85").get<double>();
            r.p_el_nfa = o.at("p_el_nfa").get<double>();
            r.ely_profit = o.at("ely_profit").get<double>();
            r.no_profit = o.at("no_profit").get<double>();
            r.gap = o.at("gap").get<double>();
            r.runtime_s = o.at("runtime_s").get<double>();
            r.status = o.at("status").get<std::string>();
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

inline std::vector<ResultRow> load_results(const std::string& path, ResultFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("results: cannot open " + path);
    return load_results(in, format);
}

}  // namespace gridpact

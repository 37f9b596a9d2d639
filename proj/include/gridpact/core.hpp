// Domain types for the contracting toolkit: contract kinds, scenario data,
// unit conventions and the closed-form helpers (capital annualization,
// hydrogen yield). All money in EUR, power in MW, energy in MWh, hydrogen in kg.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridpact {

struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<std::string> errs)
        : std::runtime_error(join(errs)), issues(std::move(errs)) {}
    std::vector<std::string> issues;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "scenario validation failed:";
        for (const auto& e : v) s += "\n  - " + e;
        return s;
    }
};

/// Connection and transport agreement kinds, ordinal mapping fixed:
/// 1 = FA (firm), 2 = NFA85, 3 = NFA.
enum class ContractKind : int { FA = 1, NFA85 = 2, NFA = 3 };

inline constexpr ContractKind kContracts[] = {ContractKind::FA, ContractKind::NFA85,
                                              ContractKind::NFA};

inline constexpr int ordinal(ContractKind c) { return static_cast<int>(c); }
inline constexpr int index_of(ContractKind c) { return static_cast<int>(c) - 1; }

/// FA and NFA85 connections can carry a capacity restriction contract; NFA cannot.
inline constexpr bool crc_eligible(ContractKind c) { return c != ContractKind::NFA; }

inline const char* to_string(ContractKind c) {
    switch (c) {
        case ContractKind::FA: return "fa";
        case ContractKind::NFA85: return "nfa85";
        default: return "nfa";
    }
}

struct TimeHorizon {
    int hours = 0;  // |T|, hour duration fixed at 1 h
};

/// Capital recovery factor r(1+r)^n / ((1+r)^n - 1); 1/n in the zero-rate limit.
inline double capital_recovery_factor(double discount_rate, double lifetime_years) {
    if (lifetime_years < 1.0) throw InvalidParameter("lifetime must be >= 1 year");
    if (discount_rate < 0.0) throw InvalidParameter("discount rate must be >= 0");
    if (discount_rate == 0.0) return 1.0 / lifetime_years;
    double g = std::pow(1.0 + discount_rate, lifetime_years);
    return discount_rate * g / (g - 1.0);
}

/// Annualized capital cost in EUR/MW/yr.
inline double annualize_capital(double capital_eur_per_mw, double discount_rate,
                                double lifetime_years) {
    if (capital_eur_per_mw < 0.0) throw InvalidParameter("capital must be >= 0");
    return capital_eur_per_mw * capital_recovery_factor(discount_rate, lifetime_years);
}

/// Maximum hourly hydrogen output (kg/h) of `power` MW at system efficiency
/// eta (kg/MWh). Actual flow is a decision variable bounded by this.
inline double hydrogen_yield(double power_mw, double eta_kg_per_mwh) {
    if (power_mw < 0.0) throw InvalidParameter("power must be >= 0");
    if (eta_kg_per_mwh <= 0.0) throw InvalidParameter("eta_sys must be > 0");
    return eta_kg_per_mwh * power_mw;
}

/// Converts a dimensionless (HHV) efficiency fraction to kg/MWh.
inline double efficiency_fraction_to_kg_per_mwh(double fraction, double hhv_kwh_per_kg = 38.9) {
    if (fraction <= 0.0 || fraction > 1.0) throw InvalidParameter("efficiency fraction in (0,1]");
    if (hhv_kwh_per_kg <= 0.0) throw InvalidParameter("HHV must be > 0");
    return fraction * 1000.0 / hhv_kwh_per_kg;
}

struct ElectrolyzerTech {
    double annualized_capital_eur_per_mw_yr = 0.0;  // C_el
    double min_load_ratio = 0.0;                    // alpha_min in [0,1)
    double eta_kg_per_mwh = 0.0;                    // system efficiency
    // optional raw fields; when all three are present they must reproduce C_el
    std::optional<double> capital_eur_per_mw;
    std::optional<double> discount_rate;
    std::optional<double> lifetime_years;
};

struct TariffSchedule {
    double eur_per_mw_yr[3] = {0.0, 0.0, 0.0};  // indexed by contract
    double operator[](ContractKind c) const { return eur_per_mw_yr[index_of(c)]; }
    double& operator[](ContractKind c) { return eur_per_mw_yr[index_of(c)]; }
};

struct PriceSet {
    std::vector<double> electricity_eur_per_mwh;  // lambda_e[t]
    double hydrogen_eur_per_kg = 0.0;             // lambda_H2
    double crc_eur_per_mw = 0.0;                  // lambda_crc
    double crc_plus_eur_per_mw = 0.0;             // lambda_crc+ (strict > 0)
    // optional per-hour override of the scalar CRC price
    std::optional<std::vector<double>> crc_series_eur_per_mw;

    double crc_at(int t) const {
        return crc_series_eur_per_mw ? (*crc_series_eur_per_mw)[static_cast<size_t>(t)]
                                     : crc_eur_per_mw;
    }
};

struct NetworkSeries {
    std::vector<double> residual_capacity_mw;  // S_bar[t]
    std::vector<double> h2_offtake_kg_per_h;   // D[t]
};

/// Which side of the hourly congestion-management budget identity is pinned.
/// PinCrcPlus is the literal equation; PinCrc is the results-consistent
/// reinterpretation (pins mandated CRC spend, leaves CRC+ voluntary).
enum class BudgetBindingMode { PinCrc, PinCrcPlus };

struct BudgetPolicy {
    double nfa85_time_fraction = 0.15;       // B_NFA85
    double nfa_energy_multiplier = 1.0;      // B_NFA (hours-equivalent)
    double cm_budget_eur_per_h = 0.0;        // B_CM
    double theta = 0.0;                      // residual budget share in [0,1]
    double curtail_penalty_eur_per_mw = 1.0; // pi
    BudgetBindingMode mode = BudgetBindingMode::PinCrc;
};

struct ScenarioData {
    TimeHorizon horizon;
    ElectrolyzerTech tech;
    TariffSchedule tariffs;
    PriceSet prices;
    NetworkSeries network;
    BudgetPolicy budgets;
    std::optional<double> big_m_mw;               // defaulted by validation
    std::optional<double> annualization_scale;    // defaulted to |T|/8760

    int hours() const { return horizon.hours; }
    double big_m() const { return big_m_mw.value_or(0.0); }
    double scale() const { return annualization_scale.value_or(1.0); }
    double scaled_capital() const { return tech.annualized_capital_eur_per_mw_yr * scale(); }
    double scaled_tariff(ContractKind c) const { return tariffs[c] * scale(); }
};

namespace detail {
inline bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}
}  // namespace detail

/// Checks all type invariants and fills defaults (big-M, annualization scale,
/// C_el from the raw capital fields). Throws ValidationError with the full
/// issue list; non-fatal findings go to `warnings`. Idempotent.
inline ScenarioData validate_scenario(ScenarioData sc, std::vector<std::string>* warnings = nullptr) {
    std::vector<std::string> errs;
    auto warn = [&](const std::string& w) {
        if (warnings) warnings->push_back(w);
    };
    const int T = sc.horizon.hours;
    if (T < 1) errs.push_back("horizon: hour count must be >= 1");

    auto check_series = [&](const std::vector<double>& v, const std::string& name) {
        if (static_cast<int>(v.size()) != T)
            errs.push_back(name + ": length " + std::to_string(v.size()) + " != horizon " +
                           std::to_string(T));
        if (!detail::all_finite(v)) errs.push_back(name + ": non-finite values");
    };
    check_series(sc.prices.electricity_eur_per_mwh, "prices.electricity");
    check_series(sc.network.residual_capacity_mw, "network.residual_capacity");
    check_series(sc.network.h2_offtake_kg_per_h, "network.h2_offtake");
    if (sc.prices.crc_series_eur_per_mw) check_series(*sc.prices.crc_series_eur_per_mw, "prices.crc_series");

    auto& tech = sc.tech;
    if (tech.capital_eur_per_mw && tech.discount_rate && tech.lifetime_years) {
        double derived = annualize_capital(*tech.capital_eur_per_mw, *tech.discount_rate,
                                           *tech.lifetime_years);
        if (tech.annualized_capital_eur_per_mw_yr <= 0.0) {
            tech.annualized_capital_eur_per_mw_yr = derived;
        } else if (std::abs(tech.annualized_capital_eur_per_mw_yr - derived) >
                   1e-3 * derived) {
            errs.push_back("tech: annualized capital inconsistent with raw capital * CRF (>0.1%)");
        }
    }
    if (tech.annualized_capital_eur_per_mw_yr <= 0.0) errs.push_back("tech: C_el must be > 0");
    if (tech.min_load_ratio < 0.0 || tech.min_load_ratio >= 1.0)
        errs.push_back("tech: min load ratio must be in [0,1)");
    if (tech.eta_kg_per_mwh <= 0.0) errs.push_back("tech: eta_sys must be > 0 kg/MWh");

    const auto& tf = sc.tariffs;
    for (ContractKind c : kContracts)
        if (tf[c] < 0.0 || !std::isfinite(tf[c]))
            errs.push_back(std::string("tariffs: ") + to_string(c) + " must be finite and >= 0");
    if (!(tf[ContractKind::FA] >= tf[ContractKind::NFA85] &&
          tf[ContractKind::NFA85] >= tf[ContractKind::NFA]))
        warn("tariffs: expected T_FA >= T_NFA85 >= T_NFA (non-firm discounts)");

    if (sc.prices.crc_eur_per_mw < 0.0) errs.push_back("prices: crc price must be >= 0");
    if (sc.prices.crc_plus_eur_per_mw <= 0.0 &&
        sc.budgets.mode == BudgetBindingMode::PinCrcPlus)
        errs.push_back("prices: crc+ price must be > 0 in pin-crc-plus mode (divides the budget)");
    else if (sc.prices.crc_plus_eur_per_mw < 0.0)
        errs.push_back("prices: crc+ price must be >= 0");

    for (double v : sc.network.residual_capacity_mw)
        if (v < 0.0) {
            errs.push_back("network: residual capacity must be >= 0");
            break;
        }
    for (double v : sc.network.h2_offtake_kg_per_h)
        if (v < 0.0) {
            errs.push_back("network: hydrogen offtake must be >= 0");
            break;
        }

    const auto& bg = sc.budgets;
    if (bg.nfa85_time_fraction < 0.0 || bg.nfa85_time_fraction > 1.0)
        errs.push_back("budgets: NFA85 time fraction must be in [0,1]");
    if (bg.nfa_energy_multiplier < 0.0) errs.push_back("budgets: NFA energy multiplier must be >= 0");
    if (bg.cm_budget_eur_per_h < 0.0) errs.push_back("budgets: CM budget must be >= 0");
    if (bg.theta < 0.0 || bg.theta > 1.0) errs.push_back("budgets: theta must be in [0,1]");
    if (bg.curtail_penalty_eur_per_mw < 0.0) errs.push_back("budgets: penalty pi must be >= 0");

    if (!errs.empty()) throw ValidationError(std::move(errs));

    double max_s = 0.0;
    for (double v : sc.network.residual_capacity_mw) max_s = std::max(max_s, v);
    if (!sc.big_m_mw) sc.big_m_mw = 2.0 * max_s;
    if (*sc.big_m_mw < max_s)
        throw ValidationError({"big-M must be >= max residual capacity"});
    if (!sc.annualization_scale) sc.annualization_scale = static_cast<double>(T) / 8760.0;
    return sc;
}

}  // namespace gridpact

// Shared test fixtures: deterministic RNG and small scenario builders.
#pragma once

#include <random>
#include <vector>

#include "gridpact/core.hpp"

namespace gptest {

using namespace gridpact;

/// Small congested scenario with every series sized to `hours`.
/// Economically balanced at toy horizons via the default |T|/8760 scale.
inline ScenarioData toy_scenario(int hours = 3) {
    ScenarioData sc;
    sc.horizon.hours = hours;
    sc.tech.annualized_capital_eur_per_mw_yr = 123260.0;
    sc.tech.min_load_ratio = 0.0;
    sc.tech.eta_kg_per_mwh = 18.0;
    sc.tariffs[ContractKind::FA] = 80000.0;
    sc.tariffs[ContractKind::NFA85] = 40000.0;
    sc.tariffs[ContractKind::NFA] = 20000.0;
    sc.prices.electricity_eur_per_mwh.assign(hours, 30.0);
    sc.prices.hydrogen_eur_per_kg = 10.0;
    sc.prices.crc_eur_per_mw = 25.0;
    sc.prices.crc_plus_eur_per_mw = 10.0;
    sc.network.residual_capacity_mw.assign(hours, 2.0);
    if (hours >= 2) sc.network.residual_capacity_mw[1] = 1.0;
    sc.network.h2_offtake_kg_per_h.assign(hours, 1800.0);
    sc.budgets.nfa85_time_fraction = 0.5;  // generous at toy |T|
    sc.budgets.nfa_energy_multiplier = 1.0;
    sc.budgets.cm_budget_eur_per_h = 0.0;
    sc.budgets.theta = 0.0;
    sc.budgets.curtail_penalty_eur_per_mw = 1e-4;
    sc.budgets.mode = BudgetBindingMode::PinCrc;
    return sc;
}

/// Worst absolute residual over the feasibility invariants every returned
/// solution must satisfy (capacity accounting, transport, budgets, hydrogen
/// chain, no-double-curtailment, owner-side coupling).
template <typename Bundle>
inline double max_feasibility_violation(const Bundle& b, const ScenarioData& sc) {
    double worst = 0.0;
    auto chk = [&](double residual) { worst = std::max(worst, residual); };
    const int T = sc.hours();
    double sum_el = b.p_el[0] + b.p_el[1] + b.p_el[2];
    double sum_no = b.p_no[0] + b.p_no[1] + b.p_no[2];
    chk(sum_el - b.p_grid);                  // (1b)
    chk(std::abs(sum_no - b.p_grid));        // (2c)
    for (int c = 0; c < 3; ++c) chk(b.p_no[c] - b.p_el[c]);  // (2b)
    double sum_b = 0.0, sum_r3 = 0.0;
    for (int t = 0; t < T; ++t) {
        double curt = b.s[t] + b.s_plus[t] + b.r2[t] + b.r3[t];
        chk(b.p_e[t] - (sum_el - curt));                                   // hourly cap
        chk(sc.tech.min_load_ratio * b.p_grid - b.p_e[t]);                 // (1d)
        chk(b.f[t] - sc.tech.eta_kg_per_mwh * b.p_e[t]);                   // (1e)
        chk(b.f[t] - sc.network.h2_offtake_kg_per_h[t]);                   // (1f)
        chk(b.p_grid - curt - sc.network.residual_capacity_mw[t]);         // (2d)
        chk(b.r2[t] - b.p_no[1]);                                          // (2e)
        chk(b.r2[t] - b.b[t] * sc.network.h2_offtake_kg_per_h[t] / sc.tech.eta_kg_per_mwh);  // (2f)
        chk(b.r3[t] - b.p_no[2]);                                          // NFA cap
        chk(b.s[t] + b.s_plus[t] + b.r2[t] - b.p_no[0] - b.p_no[1]);       // (2m)
        sum_b += b.b[t];
        sum_r3 += b.r3[t];
    }
    chk(sum_b - sc.budgets.nfa85_time_fraction * T);                       // (2g)
    chk(sum_r3 - sc.budgets.nfa_energy_multiplier * b.p_no[2]);            // (2i)
    for (size_t t = 0; t < b.s_el.size(); ++t) {                           // (4b)-(4h)
        chk(b.s_el[t] - b.s[t]);
        chk(b.s_el_plus[t] - b.s_plus[t]);
        chk(b.r_el2[t] - b.r2[t]);
        chk(b.r_el3[t] - b.r3[t]);
        chk(b.s_el[t] + b.s_el_plus[t] - b.p_el[0] - b.p_el[1]);
    }
    return worst;
}

struct Rng {
    std::mt19937 g;
    explicit Rng(unsigned seed) : g(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
    int uniform_int(int a, int b) { return std::uniform_int_distribution<int>(a, b)(g); }
};

/// Objective change a one-grid-step leader perturbation can cause, used as
/// the oracle comparison tolerance (sum of every price/tariff sensitivity).
inline double grid_slack(const ScenarioData& sc, double step) {
    double sens = sc.scaled_capital();
    for (ContractKind c : kContracts) sens += sc.scaled_tariff(c);
    for (int t = 0; t < sc.hours(); ++t)
        sens += sc.prices.electricity_eur_per_mwh[t] +
                sc.tech.eta_kg_per_mwh * sc.prices.hydrogen_eur_per_kg +
                sc.prices.crc_at(t) + sc.prices.crc_plus_eur_per_mw +
                sc.budgets.curtail_penalty_eur_per_mw;
    return step * sens;
}

/// Randomized toy instance for oracle comparisons. Keeps min-load at zero so
/// every leader grid point stays feasible, and keeps at most one voluntary
/// curtailment mechanism priced attractively to bound oracle enumeration.
inline ScenarioData random_toy(Rng& rng, int hours) {
    ScenarioData sc = toy_scenario(hours);
    for (int t = 0; t < hours; ++t) {
        sc.network.residual_capacity_mw[t] = 0.25 * rng.uniform_int(2, 12);
        sc.prices.electricity_eur_per_mwh[t] = rng.uniform(5.0, 60.0);
        sc.network.h2_offtake_kg_per_h[t] = rng.uniform(0, 1) < 0.2 ? 18.0 : 1800.0;
    }
    sc.tech.min_load_ratio = 0.0;
    sc.prices.hydrogen_eur_per_kg = rng.uniform(4.0, 12.0);
    sc.prices.crc_eur_per_mw = rng.uniform(0.0, 30.0);
    sc.prices.crc_plus_eur_per_mw = rng.uniform(0.5, 30.0);
    sc.tariffs[ContractKind::NFA] = rng.uniform(10000.0, 30000.0);
    sc.tariffs[ContractKind::NFA85] = sc.tariffs[ContractKind::NFA] + rng.uniform(0.0, 30000.0);
    sc.tariffs[ContractKind::FA] = sc.tariffs[ContractKind::NFA85] + rng.uniform(0.0, 30000.0);
    sc.budgets.nfa85_time_fraction = 0.25 * rng.uniform_int(0, 2);
    sc.budgets.nfa_energy_multiplier = rng.uniform_int(0, 1);
    sc.budgets.theta = 0.0;
    sc.budgets.cm_budget_eur_per_h = 0.0;
    sc.budgets.curtail_penalty_eur_per_mw = 1e-4;
    return sc;
}

}  // namespace gptest

#include <catch_amalgamated.hpp>

#include "gridpact/games.hpp"
#include "helpers.hpp"

using namespace gridpact;
using Catch::Approx;

namespace {
const GameCase kAllCases[] = {GameCase::Game1, GameCase::Game2, GameCase::ElyHpr, GameCase::NoHpr};
}

TEST_CASE("game 1: lower constraint count matches instantiation rule") {
    for (int T : {2, 3, 5}) {
        auto sc = validate_scenario(gptest::toy_scenario(T));
        auto g = build_game1(sc);
        // 3 accommodation + 1 allocation + T transport + (2T+1) NFA85 block
        // + (T+1) NFA block + T budget + T no-double-curtail
        CHECK(g.bp.lower.constraints.size() == static_cast<size_t>(6 * T + 6));
        CHECK(g.bp.lower.vars.size() == static_cast<size_t>(4 + 5 * T));
        CHECK(g.bp.lower.relaxed.size() == static_cast<size_t>(T));
        // upper rows: (1b) + 4T operation rows
        CHECK(g.bp.model.num_constraints() == static_cast<size_t>(1 + 4 * T));
    }
}

TEST_CASE("game 1 KKT: one dual per lower row plus bound rows; stationarity per var") {
    const int T = 2;
    auto sc = validate_scenario(gptest::toy_scenario(T));
    auto g = build_game1(sc);
    auto kkt = derive_kkt(g.bp);
    size_t lower_rows = 6 * T + 6;
    // bound rows: every lower var has a finite lower bound; relaxed b adds his
    size_t bound_rows = (4 + 5 * T) + T;
    CHECK(kkt.artifacts.duals.size() == lower_rows + bound_rows);
    CHECK(kkt.artifacts.stationarity_ids.size() == g.bp.lower.vars.size());
    // equality rows carry no complementarity pair: allocation + T budget rows
    CHECK(kkt.artifacts.pairs.size() == lower_rows + bound_rows - 1 - T);
}

TEST_CASE("game 2: lower level is a pure LP") {
    auto sc = validate_scenario(gptest::toy_scenario(3));
    auto g = build_game2(sc);
    CHECK(g.bp.lower.relaxed.empty());
    for (auto v : g.bp.lower.vars) CHECK(g.bp.model.var(v).kind == VarKind::Continuous);
    CHECK_NOTHROW(derive_kkt(g.bp));
    // strong-duality cut must not degrade to the vacuous fallback
    auto kkt = derive_kkt(g.bp);
    add_strong_duality_cut(kkt.model, kkt.artifacts);
    CHECK(kkt.model.find_constraint("strong-duality") >= 0);
}

TEST_CASE("solved cases satisfy the feasibility invariant suite") {
    auto sc = validate_scenario(gptest::toy_scenario(3));
    for (GameCase gc : kAllCases) {
        CAPTURE(to_string(gc));
        auto b = solve_case(sc, gc);
        REQUIRE(b.usable());
        CHECK(gptest::max_feasibility_violation(b, sc) <= 1e-5);
        if (gc == GameCase::Game1 || gc == GameCase::Game2) {
            CHECK(b.complementarity_residual <= 1e-5);
            CHECK(b.strong_duality_gap <= 1e-5 * (1.0 + std::abs(b.lower_objective)));
        }
    }
}

TEST_CASE("uncongested scenario: no curtailment, capacity at standalone optimum") {
    auto sc = gptest::toy_scenario(3);
    sc.network.residual_capacity_mw.assign(3, 100.0);
    sc.prices.crc_plus_eur_per_mw = 1e-3;
    sc = validate_scenario(sc);
    for (GameCase gc : {GameCase::Game1, GameCase::ElyHpr}) {
        CAPTURE(to_string(gc));
        auto b = solve_case(sc, gc);
        REQUIRE(b.usable());
        for (int t = 0; t < 3; ++t)
            CHECK(b.s[t] + b.s_plus[t] + b.r2[t] + b.r3[t] == Approx(0.0).margin(1e-6));
        // profitable prices: owner builds up to the hydrogen offtake limit
        CHECK(b.p_grid > 1.0);
        CHECK(b.ely_profit > 0.0);
    }
}

TEST_CASE("relaxation dominance on random toys") {
    gptest::Rng rng(101);
    int checked = 0;
    for (int i = 0; i < 6; ++i) {
        auto sc = validate_scenario(gptest::random_toy(rng, 3));
        auto g1 = solve_case(sc, GameCase::Game1);
        auto eh = solve_case(sc, GameCase::ElyHpr);
        auto g2 = solve_case(sc, GameCase::Game2);
        auto nh = solve_case(sc, GameCase::NoHpr);
        if (!(g1.usable() && eh.usable() && g2.usable() && nh.usable())) continue;
        double scale1 = 1.0 + std::abs(g1.ely_profit);
        double scale2 = 1.0 + std::abs(g2.no_profit);
        CHECK(eh.ely_profit >= g1.ely_profit - 1e-6 * scale1);
        CHECK(nh.no_profit >= g2.no_profit - 1e-6 * scale2);
        ++checked;
    }
    CHECK(checked >= 4);
}

TEST_CASE("ely hpr: switch forces the NFA85 activation floor") {
    auto sc = validate_scenario(gptest::toy_scenario(4));
    auto b = solve_case(sc, GameCase::ElyHpr);
    REQUIRE(b.usable());
    double sum_b = 0.0;
    for (double v : b.b) sum_b += v;
    if (b.p_el[1] > 1e-6)  // NFA85 contracted -> switch on -> time floor binds
        CHECK(sum_b >= sc.budgets.nfa85_time_fraction * sc.hours() - 1e-6);
}

TEST_CASE("theta=0 pin-crc forces mandated CRC to zero") {
    auto sc = validate_scenario(gptest::toy_scenario(3));
    REQUIRE(sc.budgets.theta == 0.0);
    for (GameCase gc : kAllCases) {
        auto b = solve_case(sc, gc);
        REQUIRE(b.usable());
        for (double v : b.s) CHECK(v == Approx(0.0).margin(1e-7));
    }
}

TEST_CASE("profit arithmetic spot check") {
    auto sc = gptest::toy_scenario(1);
    sc.prices.electricity_eur_per_mwh = {0.0};
    sc.annualization_scale = 1.0;  // literal yearly terms
    sc = validate_scenario(sc);
    SolutionBundle b;
    b.status = SolveStatus::Optimal;
    b.game = GameCase::Game1;
    b.p_grid = 1.0;
    b.p_el[2] = 1.0;
    b.p_no[2] = 1.0;
    b.p_e = {1.0};
    b.f = {sc.tech.eta_kg_per_mwh};
    b.s = {0.0};
    b.s_plus = {0.0};
    b.r2 = {0.0};
    b.r3 = {0.0};
    b.b = {0.0};
    extract_profits(b, sc);
    double expect = sc.prices.hydrogen_eur_per_kg * sc.tech.eta_kg_per_mwh -
                    sc.tech.annualized_capital_eur_per_mw_yr - sc.tariffs[ContractKind::NFA];
    CHECK(b.ely_profit == Approx(expect));
    CHECK(b.no_profit == Approx(sc.tariffs[ContractKind::NFA]));

    // zero-activity solution
    SolutionBundle z;
    z.status = SolveStatus::Optimal;
    z.p_e = {0.0};
    z.f = {0.0};
    z.s = {0.0};
    z.s_plus = {0.0};
    z.r2 = {0.0};
    z.r3 = {0.0};
    z.b = {0.0};
    extract_profits(z, sc);
    CHECK(z.ely_profit == 0.0);
    CHECK(z.no_profit == 0.0);

    SolutionBundle bad;
    bad.status = SolveStatus::Infeasible;
    CHECK_THROWS_AS(extract_profits(bad, sc), ModelError);
}

TEST_CASE("infeasible scenario reports violated tags") {
    auto sc = gptest::toy_scenario(3);
    // pinned CRC spend with a zero CRC price: 0 = theta * B_CM > 0 can't hold
    sc.prices.crc_eur_per_mw = 0.0;
    sc.budgets.theta = 0.5;
    sc.budgets.cm_budget_eur_per_h = 100.0;
    sc = validate_scenario(sc);
    auto b = solve_case(sc, GameCase::ElyHpr);
    REQUIRE(b.status == SolveStatus::Infeasible);
    REQUIRE(!b.diagnostics.empty());
    bool names_budget = false;
    for (const auto& d : b.diagnostics) names_budget |= d.find("cm_budget") != std::string::npos;
    CHECK(names_budget);
}

TEST_CASE("solve_case rejects unvalidated big-M for ely hpr") {
    auto sc = gptest::toy_scenario(2);  // not validated: big_m unset
    CHECK_THROWS_AS(build_ely_hpr(sc), InvalidParameter);
}

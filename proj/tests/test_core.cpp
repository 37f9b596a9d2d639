#include <catch_amalgamated.hpp>

#include "gridpact/core.hpp"
#include "helpers.hpp"

using namespace gridpact;
using Catch::Approx;

TEST_CASE("capital annualization") {
    CHECK(annualize_capital(937500.0, 0.1, 15.0) == Approx(123260.0).epsilon(1e-3));
    CHECK(annualize_capital(1000.0, 0.0, 10.0) == Approx(100.0));
    CHECK(annualize_capital(500000.0, 0.05, 10.0) == Approx(64752.29).epsilon(1e-6));
    CHECK(capital_recovery_factor(0.1, 15.0) == Approx(0.1315).epsilon(1e-3));
    CHECK_THROWS_AS(annualize_capital(1000.0, 0.1, 0.0), InvalidParameter);
    CHECK_THROWS_AS(annualize_capital(-1.0, 0.1, 10.0), InvalidParameter);
    CHECK_THROWS_AS(annualize_capital(1000.0, -0.1, 10.0), InvalidParameter);
}

TEST_CASE("capital annualization: monotonicity and scale-free CRF") {
    gptest::Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        double r = rng.uniform(0.001, 0.3), n = rng.uniform(1.0, 40.0), c = rng.uniform(1.0, 1e7);
        CHECK(annualize_capital(c * 2.0, r, n) > annualize_capital(c, r, n));
        CHECK(annualize_capital(c, r + 0.01, n) > annualize_capital(c, r, n));
        CHECK(annualize_capital(c, r, n + 1.0) < annualize_capital(c, r, n));
        CHECK(annualize_capital(c, r, n) / c == Approx(capital_recovery_factor(r, n)));
    }
}

TEST_CASE("hydrogen yield") {
    CHECK(hydrogen_yield(100.0, 18.0) == Approx(1800.0));
    CHECK(hydrogen_yield(0.0, 18.0) == 0.0);
    CHECK(hydrogen_yield(55.0, 17.77) == Approx(977.35));
    CHECK_THROWS_AS(hydrogen_yield(-1.0, 18.0), InvalidParameter);
    CHECK_THROWS_AS(hydrogen_yield(1.0, 0.0), InvalidParameter);
}

TEST_CASE("efficiency fraction conversion") {
    CHECK(efficiency_fraction_to_kg_per_mwh(0.7) == Approx(18.0).margin(0.01));
    CHECK_THROWS_AS(efficiency_fraction_to_kg_per_mwh(0.0), InvalidParameter);
    CHECK_THROWS_AS(efficiency_fraction_to_kg_per_mwh(1.5), InvalidParameter);
}

TEST_CASE("contract kinds") {
    CHECK(ordinal(ContractKind::FA) == 1);
    CHECK(ordinal(ContractKind::NFA85) == 2);
    CHECK(ordinal(ContractKind::NFA) == 3);
    CHECK(crc_eligible(ContractKind::FA));
    CHECK(crc_eligible(ContractKind::NFA85));
    CHECK_FALSE(crc_eligible(ContractKind::NFA));
}

TEST_CASE("scenario validation: accept and default") {
    auto sc = validate_scenario(gptest::toy_scenario(3));
    CHECK(sc.big_m() == Approx(4.0));  // 2 x max residual capacity
    CHECK(sc.scale() == Approx(3.0 / 8760.0));
}

TEST_CASE("scenario validation: length mismatch") {
    auto sc = gptest::toy_scenario(4);
    sc.network.residual_capacity_mw.resize(3);
    CHECK_THROWS_AS(validate_scenario(sc), ValidationError);
}

TEST_CASE("scenario validation: crc+ division hazard") {
    auto sc = gptest::toy_scenario(3);
    sc.budgets.theta = 0.2;
    sc.budgets.mode = BudgetBindingMode::PinCrcPlus;
    sc.prices.crc_plus_eur_per_mw = 0.0;
    CHECK_THROWS_AS(validate_scenario(sc), ValidationError);
    sc.budgets.mode = BudgetBindingMode::PinCrc;
    CHECK_NOTHROW(validate_scenario(sc));  // zero crc+ price fine when voluntary
}

TEST_CASE("scenario validation: capital consistency and derivation") {
    auto sc = gptest::toy_scenario(3);
    sc.tech.capital_eur_per_mw = 937500.0;
    sc.tech.discount_rate = 0.1;
    sc.tech.lifetime_years = 15.0;
    sc.tech.annualized_capital_eur_per_mw_yr = 0.0;
    auto out = validate_scenario(sc);
    CHECK(out.tech.annualized_capital_eur_per_mw_yr == Approx(123260.0).epsilon(1e-3));

    sc.tech.annualized_capital_eur_per_mw_yr = 200000.0;  // off by far more than 0.1%
    CHECK_THROWS_AS(validate_scenario(sc), ValidationError);
}

TEST_CASE("scenario validation: idempotent; tariff ordering warns only") {
    auto sc = gptest::toy_scenario(3);
    sc.tariffs[ContractKind::NFA] = 90000.0;  // violates T_FA >= T_NFA85 >= T_NFA
    std::vector<std::string> warnings;
    auto v1 = validate_scenario(sc, &warnings);
    CHECK(!warnings.empty());
    auto v2 = validate_scenario(v1);
    CHECK(v2.big_m() == v1.big_m());
    CHECK(v2.scale() == v1.scale());
    CHECK(v2.tech.annualized_capital_eur_per_mw_yr == v1.tech.annualized_capital_eur_per_mw_yr);
}

TEST_CASE("scenario validation: error list aggregates issues") {
    auto sc = gptest::toy_scenario(2);
    sc.tech.eta_kg_per_mwh = -1.0;
    sc.budgets.theta = 2.0;
    try {
        validate_scenario(sc);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.issues.size() >= 2);
    }
}

#include <catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridpact/data_io.hpp"
#include "helpers.hpp"

using namespace gridpact;
using Catch::Approx;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& name, const std::string& content) {
        path = std::filesystem::temp_directory_path() / name;
        std::ofstream(path) << content;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

const char* kSeriesCsv =
    "hour,residual_capacity_mw,price_eur_mwh,h2_demand_kg\n"
    "0,2.0,30.5,1800\n"
    "1,1.0,28.0,1800\n"
    "2,2.0,31.0,900\n";

}  // namespace

TEST_CASE("series csv: happy path and shuffled columns") {
    std::istringstream in(kSeriesCsv);
    auto sf = parse_series_csv(in);
    REQUIRE(sf.residual_capacity_mw.size() == 3);
    CHECK(sf.residual_capacity_mw[1] == Approx(1.0));
    CHECK(sf.price_eur_mwh[0] == Approx(30.5));
    CHECK(sf.h2_demand_kg[2] == Approx(900.0));

    std::istringstream shuffled(
        "price_eur_mwh,hour,h2_demand_kg,residual_capacity_mw\n"
        "30.5, 0, 1800, 2.0\n"
        "28.0, 1, 1800, 1.0\n");
    auto sf2 = parse_series_csv(shuffled);
    CHECK(sf2.residual_capacity_mw[1] == Approx(1.0));
    CHECK(sf2.price_eur_mwh[0] == Approx(30.5));
}

TEST_CASE("series csv: schema errors name the problem") {
    auto expect = [](const std::string& text, const std::string& needle) {
        std::istringstream in(text);
        try {
            parse_series_csv(in);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect("hour,residual_capacity_mw,price_eur_mwh\n0,1,2\n", "h2_demand_kg");
    expect(std::string(kSeriesCsv) + "5,1,1,1\n", "consecutive");
    expect("hour,residual_capacity_mw,price_eur_mwh,h2_demand_kg\n0,abc,2,3\n",
           "residual_capacity_mw");
    expect("hour,residual_capacity_mw,price_eur_mwh,h2_demand_kg\n", "no data rows");
    expect("", "empty");
}

TEST_CASE("load_scenario: inline series with keur money unit") {
    TempFile f("gp_scen1.json", R"({
      "money_unit": "keur",
      "horizon": {"hours": 2},
      "tech": {"annualized_capital_per_mw_yr": 123.26, "min_load_ratio": 0.2,
               "eta_fraction": 0.7},
      "tariffs": {"fa": 87.6, "nfa85": 43.8, "nfa": 26.28},
      "prices": {"hydrogen_per_kg": 10, "crc_per_mw": 40, "crc_plus_per_mw": 1,
                 "electricity_per_mwh": [30, 25]},
      "network": {"residual_capacity_mw": [2, 1], "h2_offtake_kg_per_h": [1800, 1800]},
      "budgets": {"nfa85_time_fraction": 0.15, "nfa_energy_multiplier": 1,
                  "theta": 0, "mode": "pin-crc"}
    })");
    auto sc = load_scenario(f.path.string());
    CHECK(sc.hours() == 2);
    CHECK(sc.tech.annualized_capital_eur_per_mw_yr == Approx(123260.0));
    CHECK(sc.tech.eta_kg_per_mwh == Approx(0.7 * 1000.0 / 38.9));
    CHECK(sc.tariffs[ContractKind::FA] == Approx(87600.0));
    CHECK(sc.tariffs[ContractKind::NFA] == Approx(26280.0));
    CHECK(sc.prices.hydrogen_eur_per_kg == Approx(10.0));  // not money-scaled
    CHECK(sc.prices.electricity_eur_per_mwh[1] == Approx(25.0));
    CHECK(sc.budgets.mode == BudgetBindingMode::PinCrc);
    CHECK(sc.big_m() == Approx(4.0));             // validation default 2*max S
    CHECK(sc.scale() == Approx(2.0 / 8760.0));    // validation default
}

TEST_CASE("load_scenario: raw capital fields and series csv reference") {
    TempFile csv("gp_series.csv", kSeriesCsv);
    TempFile f("gp_scen2.json", R"({
      "horizon": {"hours": 3},
      "tech": {"capital_per_mw": 937500, "discount_rate": 0.1, "lifetime_years": 15,
               "min_load_ratio": 0.0, "eta_kg_per_mwh": 18},
      "tariffs": {"fa": 87600, "nfa85": 43800, "nfa": 26280},
      "prices": {"hydrogen_per_kg": 10, "crc_per_mw": 40, "crc_plus_per_mw": 1},
      "network": {"series_csv": ")" + csv.path.string() + R"("},
      "budgets": {}
    })");
    auto sc = load_scenario(f.path.string());
    CHECK(sc.tech.annualized_capital_eur_per_mw_yr == Approx(123260.0).epsilon(1e-3));
    CHECK(sc.network.residual_capacity_mw == std::vector<double>({2.0, 1.0, 2.0}));
    CHECK(sc.prices.electricity_eur_per_mwh[1] == Approx(28.0));
    CHECK(sc.network.h2_offtake_kg_per_h[2] == Approx(900.0));
    // explicit series path wins over the document reference
    TempFile csv2("gp_series2.csv",
                  "hour,residual_capacity_mw,price_eur_mwh,h2_demand_kg\n"
                  "0,5,10,100\n1,5,10,100\n2,5,10,100\n");
    auto sc2 = load_scenario(f.path.string(), csv2.path.string());
    CHECK(sc2.network.residual_capacity_mw[0] == Approx(5.0));
}

TEST_CASE("load_scenario: failure modes") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), IoError);
    TempFile bad("gp_bad.json", "{ not json");
    CHECK_THROWS_AS(load_scenario(bad.path.string()), IoError);
    TempFile missing("gp_missing.json", R"({"horizon": {"hours": 2}})");
    CHECK_THROWS_AS(load_scenario(missing.path.string()), IoError);
    TempFile badmode("gp_badmode.json", R"({
      "horizon": {"hours": 1},
      "tech": {"annualized_capital_per_mw_yr": 1, "eta_kg_per_mwh": 18},
      "tariffs": {"fa": 3, "nfa85": 2, "nfa": 1},
      "prices": {"hydrogen_per_kg": 10, "electricity_per_mwh": [30]},
      "network": {"residual_capacity_mw": [2], "h2_offtake_kg_per_h": [100]},
      "budgets": {"mode": "whatever"}
    })");
    CHECK_THROWS_AS(load_scenario(badmode.path.string()), IoError);
    // invariant violations surface as validation errors, not parse errors
    TempFile invalid("gp_invalid.json", R"({
      "horizon": {"hours": 2},
      "tech": {"annualized_capital_per_mw_yr": 1, "eta_kg_per_mwh": 18},
      "tariffs": {"fa": 3, "nfa85": 2, "nfa": 1},
      "prices": {"hydrogen_per_kg": 10, "electricity_per_mwh": [30]},
      "network": {"residual_capacity_mw": [2, 2], "h2_offtake_kg_per_h": [100, 100]},
      "budgets": {}
    })");
    CHECK_THROWS_AS(load_scenario(invalid.path.string()), ValidationError);
}

TEST_CASE("synthetic generator: shape, determinism, bounds") {
    SyntheticSpec spec;
    spec.hours = 72;
    spec.congestion_depth = 0.3;
    spec.congestion_hours_per_day = 4;
    spec.seed = 7;
    auto sc = generate_synthetic(spec);
    REQUIRE(sc.hours() == 72);
    int congested = 0;
    for (int t = 0; t < 72; ++t) {
        double s = sc.network.residual_capacity_mw[t];
        bool peak = s == Approx(63.0);
        bool dip = s == Approx(63.0 * 0.7);
        CHECK((peak || dip));
        congested += dip ? 1 : 0;
        CHECK(sc.prices.electricity_eur_per_mwh[t] >= 0.0);
        CHECK(sc.prices.electricity_eur_per_mwh[t] <= 50.0 + 15.0 + 1e-9);
        CHECK(sc.network.h2_offtake_kg_per_h[t] == Approx(1800.0));
    }
    CHECK(congested == 3 * 4);  // exactly the configured window each day
    CHECK(sc.tech.annualized_capital_eur_per_mw_yr == Approx(123260.0).epsilon(1e-3));
    CHECK(sc.tech.min_load_ratio == Approx(0.2));

    auto again = generate_synthetic(spec);
    CHECK(again.network.residual_capacity_mw == sc.network.residual_capacity_mw);
    CHECK(again.prices.electricity_eur_per_mwh == sc.prices.electricity_eur_per_mwh);
    spec.seed = 8;
    auto other = generate_synthetic(spec);
    CHECK(other.prices.electricity_eur_per_mwh != sc.prices.electricity_eur_per_mwh);
}

TEST_CASE("synthetic generator: guards and short horizons") {
    SyntheticSpec spec;
    spec.hours = 0;
    CHECK_THROWS_AS(generate_synthetic(spec), InvalidParameter);
    spec.hours = 5;  // partial day still sized correctly
    auto sc = generate_synthetic(spec);
    CHECK(sc.hours() == 5);
    spec.congestion_depth = 1.5;
    CHECK_THROWS_AS(generate_synthetic(spec), InvalidParameter);
    spec.congestion_depth = 0.3;
    spec.congestion_hours_per_day = 25;
    CHECK_THROWS_AS(generate_synthetic(spec), InvalidParameter);
}

TEST_CASE("result rows: csv round trip preserves values bit-exactly") {
    std::vector<ResultRow> rows(2);
    rows[0].case_label = "game1";
    rows[0].sweep_param = "crc_plus_price";
    rows[0].sweep_value = 12.5;
    rows[0].p_grid = 1.0 / 3.0;
    rows[0].p_el_fa = 0.1;
    rows[0].ely_profit = -12345.678901234567;
    rows[0].gap = 1e-3;
    rows[0].runtime_s = 0.25;
    rows[1].case_label = "game2";
    rows[1].sweep_param = "-";
    rows[1].no_profit = 7.25;
    rows[1].status = "infeasible";

    for (auto format : {ResultFormat::CSV, ResultFormat::JSON}) {
        std::ostringstream os;
        write_results(rows, os, format);
        std::istringstream in(os.str());
        auto back = load_results(in, format);
        REQUIRE(back.size() == 2);
        CHECK(back[0].case_label == "game1");
        CHECK(back[0].sweep_param == "crc_plus_price");
        CHECK(back[0].p_grid == rows[0].p_grid);  // exact
        CHECK(back[0].ely_profit == rows[0].ely_profit);
        CHECK(back[1].no_profit == rows[1].no_profit);
        CHECK(back[1].status == "infeasible");
    }
}

TEST_CASE("result rows: pinned csv header and empty input rejected") {
    std::vector<ResultRow> rows(1);
    rows[0].case_label = "ely-hpr";
    std::ostringstream os;
    write_results(rows, os, ResultFormat::CSV);
    std::string text = os.str();
    CHECK(text.rfind("case,sweep_param,sweep_value,p_grid,p_el_fa,p_el_nfa85,p_el_nfa,"
                     "ely_profit,no_profit,gap,runtime_s,status",
                     0) == 0);
    CHECK_THROWS_AS(write_results({}, os, ResultFormat::CSV), IoError);
}

TEST_CASE("to_result_row maps a solved bundle") {
    auto sc = validate_scenario(gptest::toy_scenario(2));
    auto b = solve_case(sc, GameCase::NoHpr);
    REQUIRE(b.usable());
    auto r = to_result_row(b, "theta", 0.0);
    CHECK(r.case_label == "no-hpr");
    CHECK(r.sweep_param == "theta");
    CHECK(r.p_grid == Approx(b.p_grid));
    CHECK(r.ely_profit == Approx(b.ely_profit));
    CHECK(r.no_profit == Approx(b.no_profit));
    CHECK(r.status == "optimal");
}

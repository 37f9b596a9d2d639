// Command-line front end: solve, sweep, oracle-check, gen-data, validate.
// Thin shell over the headers; every behavior is reachable as a library call.
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "gridpact/data_io.hpp"
#include "gridpact/oracle.hpp"
#include "gridpact/sweep.hpp"

using namespace gridpact;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitLimit = 3;

struct CommonFlags {
    std::string scenario;
    std::string series;
    std::string out;
    std::string format = "csv";
    double gap = 1e-3;
    double time_limit = 600.0;
    unsigned seed = 0;
    std::string budget_mode;
    std::string backend;

    void attach(CLI::App* app, bool scenario_required = true) {
        auto* s = app->add_option("--scenario", scenario, "scenario parameter JSON");
        if (scenario_required) s->required();
        app->add_option("--series", series, "hourly series CSV (overrides document reference)");
        app->add_option("--out", out, "output path (default: stdout)");
        app->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
        app->add_option("--gap", gap, "relative MIP gap")
            ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(0.5, 0.0)));
        app->add_option("--time-limit", time_limit, "solve time limit in seconds")
            ->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "solver tie-breaking seed");
        app->add_option("--budget-mode", budget_mode, "budget identity binding override")
            ->check(CLI::IsMember({"pin-crc", "pin-crc-plus"}));
        app->add_option("--solver", backend, "backend: builtin or scipy (env GRIDPACT_SOLVER)");
    }

    ScenarioData load() const {
        auto sc = load_scenario(scenario, series);
        if (budget_mode == "pin-crc") sc.budgets.mode = BudgetBindingMode::PinCrc;
        else if (budget_mode == "pin-crc-plus") sc.budgets.mode = BudgetBindingMode::PinCrcPlus;
        return validate_scenario(sc);
    }

    CaseOptions case_options() const {
        CaseOptions o;
        o.solver.rel_gap = gap;
        o.solver.time_limit_s = time_limit;
        o.solver.seed = seed;
        if (!backend.empty()) {
            o.backend = backend;
        } else if (const char* env = std::getenv("GRIDPACT_SOLVER")) {
            o.backend = env;
        }
        return o;
    }

    ResultFormat result_format() const {
        return format == "json" ? ResultFormat::JSON : ResultFormat::CSV;
    }

    void emit(const std::vector<ResultRow>& rows) const {
        if (out.empty()) write_results(rows, std::cout, result_format());
        else write_results(rows, out, result_format());
    }
};

GameCase parse_case(const std::string& s) {
    if (s == "game1") return GameCase::Game1;
    if (s == "game2") return GameCase::Game2;
    if (s == "ely-hpr") return GameCase::ElyHpr;
    if (s == "no-hpr") return GameCase::NoHpr;
    throw InvalidParameter("unknown case: " + s);
}

int status_exit(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal:
        case SolveStatus::GapOptimal: return kExitOk;
        case SolveStatus::Infeasible: return kExitInfeasible;
        default: return kExitLimit;
    }
}

int cmd_solve(const CommonFlags& flags, const std::string& case_name) {
    auto sc = flags.load();
    auto b = solve_case(sc, parse_case(case_name), flags.case_options());
    if (b.usable()) {
        flags.emit({to_result_row(b)});
    } else {
        std::cerr << "status: " << to_string(b.status) << "\n";
        for (const auto& d : b.diagnostics) std::cerr << "  violated: " << d << "\n";
    }
    return status_exit(b.status);
}

int cmd_sweep(const CommonFlags& flags, const std::string& axis, double from, double to,
              double step, const std::vector<std::string>& case_names, int jobs) {
    auto sc = flags.load();
    SweepPlan plan;
    plan.axis = parse_sweep_axis(axis);
    plan.values = sweep_range(from, to, step);
    for (const auto& c : case_names) plan.cases.push_back(parse_case(c));
    auto rows = run_sweep(sc, plan, flags.case_options(), jobs);
    flags.emit(rows);
    return kExitOk;
}

int cmd_oracle_check(const CommonFlags& flags, const std::string& case_name, double grid_step,
                     double ceiling) {
    auto sc = flags.load();
    GameCase game = parse_case(case_name);
    GridSpec grid;
    grid.step = grid_step;
    grid.ceiling = ceiling;
    auto oracle = enumerate_bilevel(sc, game, grid);
    if (!oracle.found) {
        std::cerr << "oracle: no feasible grid point\n";
        return kExitInfeasible;
    }
    auto b = solve_case(sc, game, flags.case_options());
    if (!b.usable()) {
        std::cerr << "reformulation status: " << to_string(b.status) << "\n";
        return status_exit(b.status);
    }
    // one grid step of objective sensitivity: every price/tariff the leader
    // point touches, scaled by the step
    double sens = sc.scaled_capital();
    for (ContractKind c : kContracts) sens += sc.scaled_tariff(c);
    for (int t = 0; t < sc.hours(); ++t)
        sens += sc.prices.electricity_eur_per_mwh[t] +
                sc.tech.eta_kg_per_mwh * sc.prices.hydrogen_eur_per_kg + sc.prices.crc_at(t) +
                sc.prices.crc_plus_eur_per_mw + sc.budgets.curtail_penalty_eur_per_mw;
    double slack = grid_step * sens;
    double denom = 1.0 + std::abs(oracle.leader_objective);
    double gap = (b.upper_objective - oracle.leader_objective);  // <=0 means refined
    double rel = std::max(0.0, std::max(gap, -gap - slack)) / denom;
    std::cout << "oracle objective:        " << oracle.leader_objective << "\n"
              << "reformulation objective: " << b.upper_objective << "\n"
              << "relative gap:            " << rel << " (slack " << slack << ")\n";
    if (!flags.out.empty()) {
        std::ofstream os(flags.out);
        write_oracle_report(oracle, os);
    }
    return rel <= std::max(1e-3, slack / denom) ? kExitOk : kExitUsage;
}

int cmd_gen_data(const SyntheticSpec& spec, const std::string& out,
                 const std::string& scenario_out) {
    auto sc = generate_synthetic(spec);
    std::ofstream os(out);
    if (!os) throw IoError("cannot write " + out);
    os << "hour,residual_capacity_mw,price_eur_mwh,h2_demand_kg\n";
    for (int t = 0; t < sc.hours(); ++t) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", t,
                      sc.network.residual_capacity_mw[static_cast<size_t>(t)],
                      sc.prices.electricity_eur_per_mwh[static_cast<size_t>(t)],
                      sc.network.h2_offtake_kg_per_h[static_cast<size_t>(t)]);
        os << buf;
    }
    if (!scenario_out.empty()) {
        nlohmann::json doc = {
            {"horizon", {{"hours", sc.hours()}}},
            {"tech",
             {{"capital_per_mw", 937500.0},
              {"discount_rate", 0.1},
              {"lifetime_years", 15},
              {"min_load_ratio", sc.tech.min_load_ratio},
              {"eta_kg_per_mwh", sc.tech.eta_kg_per_mwh}}},
            {"tariffs",
             {{"fa", sc.tariffs[ContractKind::FA]},
              {"nfa85", sc.tariffs[ContractKind::NFA85]},
              {"nfa", sc.tariffs[ContractKind::NFA]}}},
            {"prices",
             {{"hydrogen_per_kg", sc.prices.hydrogen_eur_per_kg},
              {"crc_per_mw", sc.prices.crc_eur_per_mw},
              {"crc_plus_per_mw", sc.prices.crc_plus_eur_per_mw}}},
            {"network", {{"series_csv", out}}},
            {"budgets",
             {{"nfa85_time_fraction", sc.budgets.nfa85_time_fraction},
              {"nfa_energy_multiplier", sc.budgets.nfa_energy_multiplier},
              {"cm_budget_per_h", sc.budgets.cm_budget_eur_per_h},
              {"theta", sc.budgets.theta},
              {"curtail_penalty_per_mw", sc.budgets.curtail_penalty_eur_per_mw},
              {"mode", sc.budgets.mode == BudgetBindingMode::PinCrc ? "pin-crc" : "pin-crc-plus"}}}};
        std::ofstream js(scenario_out);
        if (!js) throw IoError("cannot write " + scenario_out);
        js << doc.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_validate(const CommonFlags& flags) {
    std::vector<std::string> warnings;
    auto sc = load_scenario(flags.scenario, flags.series, &warnings);
    std::cout << "ok: " << sc.hours() << " hours, big-M " << sc.big_m() << " MW, scale "
              << sc.scale() << "\n";
    for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stackelberg contracting solver for grid connection agreements"};
    app.require_subcommand(1);
    app.footer(
        "exit codes: 0 solved/ok, 1 usage or check failure, 2 infeasible, 3 limit reached");

    CommonFlags solve_flags, sweep_flags, oracle_flags, validate_flags;
    std::string solve_case_name = "game1", oracle_case_name = "game1";
    std::string sweep_axis = "crc_plus_price";
    double sweep_from = 1.0, sweep_to = 55.0, sweep_step = 1.0;
    std::vector<std::string> sweep_cases = {"game1"};
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    double grid_step = 0.25, ceiling = 4.0;
    SyntheticSpec synth;
    std::string gen_out, gen_scenario_out;

    auto* solve = app.add_subcommand("solve", "solve one case and emit a summary row");
    solve_flags.attach(solve);
    solve->add_option("--case", solve_case_name, "game1|game2|ely-hpr|no-hpr")
        ->check(CLI::IsMember({"game1", "game2", "ely-hpr", "no-hpr"}));

    auto* sweep = app.add_subcommand("sweep", "sweep an axis over one or more cases");
    sweep_flags.attach(sweep);
    sweep->add_option("--axis", sweep_axis, "crc_plus_price|h2_price|theta")
        ->check(CLI::IsMember({"crc_plus_price", "h2_price", "theta"}));
    sweep->add_option("--from", sweep_from, "first axis value")->required();
    sweep->add_option("--to", sweep_to, "last axis value")->required();
    sweep->add_option("--step", sweep_step, "axis increment")->required();
    sweep->add_option("--cases", sweep_cases, "cases to solve per value");
    sweep->add_option("--jobs", jobs, "worker count")->check(CLI::PositiveNumber);

    auto* oracle = app.add_subcommand("oracle-check",
                                      "compare the reformulation against grid enumeration");
    oracle_flags.attach(oracle);
    oracle->add_option("--case", oracle_case_name, "game1|game2")
        ->check(CLI::IsMember({"game1", "game2"}));
    oracle->add_option("--grid-step", grid_step, "leader grid step in MW")
        ->check(CLI::PositiveNumber);
    oracle->add_option("--ceiling", ceiling, "leader grid ceiling in MW")
        ->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic hourly series CSV");
    gen->add_option("--hours", synth.hours, "horizon length");
    gen->add_option("--peak", synth.peak_mw, "residual capacity outside congestion (MW)");
    gen->add_option("--depth", synth.congestion_depth, "congestion depth fraction");
    gen->add_option("--congestion-hours", synth.congestion_hours_per_day,
                    "congested hours per day");
    gen->add_option("--price-level", synth.price_level_eur_mwh, "mean electricity price");
    gen->add_option("--price-volatility", synth.price_volatility_eur_mwh, "price noise bound");
    gen->add_option("--demand-cap", synth.demand_cap_kg_per_h, "hydrogen offtake cap (kg/h)");
    gen->add_option("--seed", synth.seed, "generator seed");
    gen->add_option("--out", gen_out, "series CSV path")->required();
    gen->add_option("--scenario-out", gen_scenario_out,
                    "also write a full scenario JSON referencing the CSV");

    auto* validate = app.add_subcommand("validate", "check a scenario and report findings");
    validate_flags.attach(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve->parsed()) return cmd_solve(solve_flags, solve_case_name);
        if (sweep->parsed())
            return cmd_sweep(sweep_flags, sweep_axis, sweep_from, sweep_to, sweep_step,
                             sweep_cases, jobs);
        if (oracle->parsed())
            return cmd_oracle_check(oracle_flags, oracle_case_name, grid_step, ceiling);
        if (gen->parsed()) return cmd_gen_data(synth, gen_out, gen_scenario_out);
        if (validate->parsed()) return cmd_validate(validate_flags);
    } catch (const ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

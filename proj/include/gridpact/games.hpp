// Instantiates the four cases over a scenario: two Stackelberg games between
// the electrolyzer owner and the network operator (each side leading once)
// and their high-point relaxations, plus end-to-end solving and profit
// extraction.
#pragma once

#include <string>
#include <vector>

#include "gridpact/bilevel.hpp"
#include "gridpact/core.hpp"
#include "gridpact/solve.hpp"

namespace gridpact {

enum class GameCase { Game1, Game2, ElyHpr, NoHpr };

inline const char* to_string(GameCase g) {
    switch (g) {
        case GameCase::Game1: return "game1";
        case GameCase::Game2: return "game2";
        case GameCase::ElyHpr: return "ely-hpr";
        default: return "no-hpr";
    }
}

/// Handles to every decision variable of a built case. Owner-side CRC/NFA
/// mirrors (own_*) exist only where the owner is the follower (Game II, NO HPR).
struct DecisionVars {
    VarRef p_grid;
    VarRef p_el[3];  // contracted CTA capacity per ContractKind
    VarRef p_no[3];  // operator-accommodated capacity per ContractKind
    std::vector<VarRef> p_e, f;
    std::vector<VarRef> curt_crc, curt_crc_plus;    // s, s+
    std::vector<VarRef> curt_nfa85, curt_nfa;       // r2, r3
    std::vector<VarRef> nfa85_active;               // b
    VarRef nfa85_switch;                            // b_s (Ely HPR only)
    std::vector<VarRef> own_crc, own_crc_plus;      // s_el, s_el+
    std::vector<VarRef> own_nfa85, own_nfa;         // r_el2, r_el3

    bool has_owner_mirrors() const { return !own_crc.empty(); }
};

struct GameModel {
    BilevelProblem bp;
    DecisionVars dv;
};

struct HprModel {
    ModelIR model;
    DecisionVars dv;
};

namespace detail {

inline std::string at(const std::string& base, int t) {
    return base + "[t=" + std::to_string(t) + "]";
}

/// Owner-side variables. Mirrors only for follower-owner cases.
inline void add_owner_vars(ModelIR& m, const ScenarioData& sc, DecisionVars& dv, bool mirrors) {
    const int T = sc.hours();
    for (ContractKind c : kContracts)
        dv.p_el[index_of(c)] =
            m.add_variable(std::string("p_el_") + to_string(c), VarKind::Continuous, 0.0, sc.big_m());
    for (int t = 0; t < T; ++t) {
        dv.p_e.push_back(m.add_variable(at("p_e", t), VarKind::Continuous, 0.0, sc.big_m()));
        dv.f.push_back(m.add_variable(at("f", t), VarKind::Continuous));
    }
    if (mirrors) {
        for (int t = 0; t < T; ++t) {
            dv.own_crc.push_back(m.add_variable(at("own_crc", t), VarKind::Continuous));
            dv.own_crc_plus.push_back(m.add_variable(at("own_crc_plus", t), VarKind::Continuous));
            dv.own_nfa85.push_back(m.add_variable(at("own_nfa85", t), VarKind::Continuous));
            dv.own_nfa.push_back(m.add_variable(at("own_nfa", t), VarKind::Continuous));
        }
    }
}

/// Operator-side variables. `capped` gives curtailments/capacities a finite
/// upper bound (needed when they appear as couplings in a strong-duality cut);
/// `b_binary` keeps the NFA85 activation indicators integral.
inline void add_operator_vars(ModelIR& m, const ScenarioData& sc, DecisionVars& dv, bool capped,
                              bool b_binary) {
    const int T = sc.hours();
    double hi = capped ? sc.big_m() : kInf;
    dv.p_grid = m.add_variable("p_grid", VarKind::Continuous, 0.0, hi);
    for (ContractKind c : kContracts)
        dv.p_no[index_of(c)] =
            m.add_variable(std::string("p_no_") + to_string(c), VarKind::Continuous, 0.0, hi);
    for (int t = 0; t < T; ++t) {
        dv.curt_crc.push_back(m.add_variable(at("curt_crc", t), VarKind::Continuous, 0.0, hi));
        dv.curt_crc_plus.push_back(
            m.add_variable(at("curt_crc_plus", t), VarKind::Continuous, 0.0, hi));
        dv.curt_nfa85.push_back(m.add_variable(at("curt_nfa85", t), VarKind::Continuous, 0.0, hi));
        dv.curt_nfa.push_back(m.add_variable(at("curt_nfa", t), VarKind::Continuous, 0.0, hi));
        dv.nfa85_active.push_back(m.add_variable(
            at("nfa85_active", t), b_binary ? VarKind::Binary : VarKind::Continuous, 0.0, 1.0));
    }
}

/// Owner problem rows when the owner leads (Game I upper / Ely HPR):
/// contract cap, consumption cap vs own contracts, min load, hydrogen chain.
inline std::vector<LowerConstraint> owner_block_leading(const ScenarioData& sc,
                                                        const DecisionVars& dv) {
    std::vector<LowerConstraint> rows;
    const int T = sc.hours();
    LinExpr total;
    for (int c = 0; c < 3; ++c) total.add(dv.p_el[c], 1.0);
    LinExpr cap = total;
    cap.add(dv.p_grid, -1.0);
    rows.push_back({cap, RelOp::LE, 0.0, "cta_cap_total"});
    for (int t = 0; t < T; ++t) {
        LinExpr use;
        use.add(dv.p_e[t], 1.0)
            .add(dv.curt_crc[t], 1.0)
            .add(dv.curt_crc_plus[t], 1.0)
            .add(dv.curt_nfa85[t], 1.0)
            .add(dv.curt_nfa[t], 1.0)
            .add(total, -1.0);
        rows.push_back({use, RelOp::LE, 0.0, at("consume_cap", t)});
        LinExpr ml;
        ml.add(dv.p_e[t], 1.0).add(dv.p_grid, -sc.tech.min_load_ratio);
        rows.push_back({ml, RelOp::GE, 0.0, at("min_load", t)});
        LinExpr conv;
        conv.add(dv.f[t], 1.0).add(dv.p_e[t], -sc.tech.eta_kg_per_mwh);
        rows.push_back({conv, RelOp::LE, 0.0, at("h2_conv", t)});
        LinExpr dem;
        dem.add(dv.f[t], 1.0);
        rows.push_back({dem, RelOp::LE, sc.network.h2_offtake_kg_per_h[t], at("h2_offtake", t)});
    }
    return rows;
}

/// Owner problem rows when the owner follows (Game II lower / NO HPR):
/// consumption capped by operator-accommodated capacity, owner-side CRC/NFA
/// takes bounded by the operator's offers, residual-profile visibility row.
inline std::vector<LowerConstraint> owner_block_following(const ScenarioData& sc,
                                                          const DecisionVars& dv) {
    std::vector<LowerConstraint> rows;
    const int T = sc.hours();
    LinExpr total_el;
    for (int c = 0; c < 3; ++c) total_el.add(dv.p_el[c], 1.0);
    LinExpr cap = total_el;
    cap.add(dv.p_grid, -1.0);
    rows.push_back({cap, RelOp::LE, 0.0, "cta_cap_total"});
    LinExpr total_no;
    for (int c = 0; c < 3; ++c) total_no.add(dv.p_no[c], 1.0);
    for (int t = 0; t < T; ++t) {
        LinExpr ml;
        ml.add(dv.p_e[t], 1.0).add(dv.p_grid, -sc.tech.min_load_ratio);
        rows.push_back({ml, RelOp::GE, 0.0, at("min_load", t)});
        LinExpr conv;
        conv.add(dv.f[t], 1.0).add(dv.p_e[t], -sc.tech.eta_kg_per_mwh);
        rows.push_back({conv, RelOp::LE, 0.0, at("h2_conv", t)});
        LinExpr dem;
        dem.add(dv.f[t], 1.0);
        rows.push_back({dem, RelOp::LE, sc.network.h2_offtake_kg_per_h[t], at("h2_offtake", t)});

        LinExpr use;
        use.add(dv.p_e[t], 1.0)
            .add(dv.curt_crc[t], 1.0)
            .add(dv.curt_crc_plus[t], 1.0)
            .add(dv.curt_nfa85[t], 1.0)
            .add(dv.curt_nfa[t], 1.0)
            .add(total_no, -1.0);
        rows.push_back({use, RelOp::LE, 0.0, at("consume_cap", t)});

        LinExpr oc;
        oc.add(dv.own_crc[t], 1.0).add(dv.curt_crc[t], -1.0);
        rows.push_back({oc, RelOp::LE, 0.0, at("own_crc_cap", t)});
        LinExpr ocp;
        ocp.add(dv.own_crc_plus[t], 1.0).add(dv.curt_crc_plus[t], -1.0);
        rows.push_back({ocp, RelOp::LE, 0.0, at("own_crc_plus_cap", t)});
        LinExpr el;
        el.add(dv.own_crc[t], 1.0)
            .add(dv.own_crc_plus[t], 1.0)
            .add(dv.p_el[0], -1.0)
            .add(dv.p_el[1], -1.0);
        rows.push_back({el, RelOp::LE, 0.0, at("own_crc_eligible", t)});

        LinExpr tr = total_el;
        tr.add(dv.own_crc[t], -1.0)
            .add(dv.own_crc_plus[t], -1.0)
            .add(dv.own_nfa85[t], -1.0)
            .add(dv.own_nfa[t], -1.0);
        rows.push_back({tr, RelOp::LE, sc.network.residual_capacity_mw[t], at("own_transport", t)});
        LinExpr on;
        on.add(dv.own_nfa[t], 1.0).add(dv.curt_nfa[t], -1.0);
        rows.push_back({on, RelOp::LE, 0.0, at("own_nfa_cap", t)});
        LinExpr on85;
        on85.add(dv.own_nfa85[t], 1.0).add(dv.curt_nfa85[t], -1.0);
        rows.push_back({on85, RelOp::LE, 0.0, at("own_nfa85_cap", t)});
    }
    return rows;
}

/// Operator problem rows: capacity accommodation and allocation, hourly
/// transport limit, NFA85 time-budgeted and NFA energy-budgeted curtailment,
/// congestion-budget identity, no-double-curtailment.
inline std::vector<LowerConstraint> operator_block(const ScenarioData& sc, const DecisionVars& dv) {
    std::vector<LowerConstraint> rows;
    const int T = sc.hours();
    for (ContractKind c : kContracts) {
        LinExpr e;
        e.add(dv.p_no[index_of(c)], 1.0).add(dv.p_el[index_of(c)], -1.0);
        rows.push_back({e, RelOp::LE, 0.0, std::string("accom_cap[") + to_string(c) + "]"});
    }
    LinExpr alloc;
    for (int c = 0; c < 3; ++c) alloc.add(dv.p_no[c], 1.0);
    alloc.add(dv.p_grid, -1.0);
    rows.push_back({alloc, RelOp::EQ, 0.0, "grid_cap_alloc"});

    LinExpr time_budget;
    for (int t = 0; t < T; ++t) {
        LinExpr tr;
        tr.add(dv.p_grid, 1.0)
            .add(dv.curt_crc[t], -1.0)
            .add(dv.curt_crc_plus[t], -1.0)
            .add(dv.curt_nfa85[t], -1.0)
            .add(dv.curt_nfa[t], -1.0);
        rows.push_back({tr, RelOp::LE, sc.network.residual_capacity_mw[t], at("transport", t)});

        LinExpr r2cap;
        r2cap.add(dv.curt_nfa85[t], 1.0).add(dv.p_no[1], -1.0);
        rows.push_back({r2cap, RelOp::LE, 0.0, at("nfa85_cap", t)});
        LinExpr r2act;
        r2act.add(dv.curt_nfa85[t], 1.0)
            .add(dv.nfa85_active[t],
                 -sc.network.h2_offtake_kg_per_h[t] / sc.tech.eta_kg_per_mwh);
        rows.push_back({r2act, RelOp::LE, 0.0, at("nfa85_active_cap", t)});
        time_budget.add(dv.nfa85_active[t], 1.0);
    }
    rows.push_back(
        {time_budget, RelOp::LE, sc.budgets.nfa85_time_fraction * T, "nfa85_time_budget"});

    LinExpr energy;
    for (int t = 0; t < T; ++t) {
        LinExpr r3cap;
        r3cap.add(dv.curt_nfa[t], 1.0).add(dv.p_no[2], -1.0);
        rows.push_back({r3cap, RelOp::LE, 0.0, at("nfa_cap", t)});
        energy.add(dv.curt_nfa[t], 1.0);
    }
    energy.add(dv.p_no[2], -sc.budgets.nfa_energy_multiplier);
    rows.push_back({energy, RelOp::LE, 0.0, "nfa_energy_budget"});

    double theta_budget = sc.budgets.theta * sc.budgets.cm_budget_eur_per_h;
    for (int t = 0; t < T; ++t) {
        LinExpr bud;
        if (sc.budgets.mode == BudgetBindingMode::PinCrc)
            bud.add(dv.curt_crc[t], sc.prices.crc_at(t));
        else
            bud.add(dv.curt_crc_plus[t], sc.prices.crc_plus_eur_per_mw);
        rows.push_back({bud, RelOp::EQ, theta_budget, at("cm_budget", t)});
    }

    for (int t = 0; t < T; ++t) {
        LinExpr dbl;
        dbl.add(dv.curt_crc[t], 1.0)
            .add(dv.curt_crc_plus[t], 1.0)
            .add(dv.curt_nfa85[t], 1.0)
            .add(dv.p_no[0], -1.0)
            .add(dv.p_no[1], -1.0);
        rows.push_back({dbl, RelOp::LE, 0.0, at("no_double_curtail", t)});
    }
    return rows;
}

/// Eq. (1a)/(4a): owner's annualized cost (minimized). `crc_vars` selects which
/// curtailment variables generate CRC revenue (operator's s or owner's s_el).
inline LinExpr owner_objective(const ScenarioData& sc, const DecisionVars& dv,
                               const std::vector<VarRef>& crc_vars,
                               const std::vector<VarRef>& crc_plus_vars) {
    LinExpr obj;
    obj.add(dv.p_grid, sc.scaled_capital());
    for (ContractKind c : kContracts) obj.add(dv.p_el[index_of(c)], sc.scaled_tariff(c));
    for (int t = 0; t < sc.hours(); ++t) {
        obj.add(dv.p_e[t], sc.prices.electricity_eur_per_mwh[t]);
        obj.add(dv.f[t], -sc.prices.hydrogen_eur_per_kg);
        obj.add(crc_vars[t], -sc.prices.crc_at(t));
        obj.add(crc_plus_vars[t], -sc.prices.crc_plus_eur_per_mw);
    }
    return obj;
}

/// Eq. (2a): operator's annual cost (minimized), with the tie-break penalty.
inline LinExpr operator_objective(const ScenarioData& sc, const DecisionVars& dv) {
    LinExpr obj;
    for (int t = 0; t < sc.hours(); ++t) {
        obj.add(dv.curt_crc[t], sc.prices.crc_at(t));
        obj.add(dv.curt_crc_plus[t], sc.prices.crc_plus_eur_per_mw);
        obj.add(dv.curt_nfa85[t], sc.budgets.curtail_penalty_eur_per_mw);
        obj.add(dv.curt_nfa[t], sc.budgets.curtail_penalty_eur_per_mw);
    }
    for (ContractKind c : kContracts) obj.add(dv.p_no[index_of(c)], -sc.scaled_tariff(c));
    return obj;
}

}  // namespace detail

/// Game I (EL-NO): owner leads with contract and operation choices; operator
/// follows with accommodation and curtailment. NFA85 activations relaxed.
inline GameModel build_game1(const ScenarioData& sc) {
    GameModel g;
    ModelIR& m = g.bp.model;
    detail::add_owner_vars(m, sc, g.dv, /*mirrors=*/false);
    detail::add_operator_vars(m, sc, g.dv, /*capped=*/false, /*b_binary=*/true);
    m.set_objective(Sense::Min,
                    detail::owner_objective(sc, g.dv, g.dv.curt_crc, g.dv.curt_crc_plus));
    for (const auto& c : detail::owner_block_leading(sc, g.dv))
        m.add_constraint(c.expr, c.op, c.rhs, c.tag);

    LowerLevelLP& lp = g.bp.lower;
    lp.vars.push_back(g.dv.p_grid);
    for (int c = 0; c < 3; ++c) lp.vars.push_back(g.dv.p_no[c]);
    for (int t = 0; t < sc.hours(); ++t) {
        lp.vars.push_back(g.dv.curt_crc[t]);
        lp.vars.push_back(g.dv.curt_crc_plus[t]);
        lp.vars.push_back(g.dv.curt_nfa85[t]);
        lp.vars.push_back(g.dv.curt_nfa[t]);
        lp.vars.push_back(g.dv.nfa85_active[t]);
    }
    for (int c = 0; c < 3; ++c) lp.couplings.push_back(g.dv.p_el[c]);
    lp.constraints = detail::operator_block(sc, g.dv);
    lp.objective = detail::operator_objective(sc, g.dv);
    g.bp.lower = relax_binaries(std::move(lp), g.dv.nfa85_active);
    return g;
}

/// Game II (NO-EL): operator leads with accommodation/curtailment; owner
/// follows with contracts, operation, and CRC/NFA take-up mirrors.
inline GameModel build_game2(const ScenarioData& sc) {
    GameModel g;
    ModelIR& m = g.bp.model;
    detail::add_operator_vars(m, sc, g.dv, /*capped=*/true, /*b_binary=*/true);
    detail::add_owner_vars(m, sc, g.dv, /*mirrors=*/true);
    m.set_objective(Sense::Min, detail::operator_objective(sc, g.dv));
    for (const auto& c : detail::operator_block(sc, g.dv)) m.add_constraint(c.expr, c.op, c.rhs, c.tag);

    LowerLevelLP& lp = g.bp.lower;
    for (int c = 0; c < 3; ++c) lp.vars.push_back(g.dv.p_el[c]);
    for (int t = 0; t < sc.hours(); ++t) {
        lp.vars.push_back(g.dv.p_e[t]);
        lp.vars.push_back(g.dv.f[t]);
        lp.vars.push_back(g.dv.own_crc[t]);
        lp.vars.push_back(g.dv.own_crc_plus[t]);
        lp.vars.push_back(g.dv.own_nfa85[t]);
        lp.vars.push_back(g.dv.own_nfa[t]);
    }
    lp.couplings.push_back(g.dv.p_grid);
    for (int c = 0; c < 3; ++c) lp.couplings.push_back(g.dv.p_no[c]);
    for (int t = 0; t < sc.hours(); ++t) {
        lp.couplings.push_back(g.dv.curt_crc[t]);
        lp.couplings.push_back(g.dv.curt_crc_plus[t]);
        lp.couplings.push_back(g.dv.curt_nfa85[t]);
        lp.couplings.push_back(g.dv.curt_nfa[t]);
    }
    lp.constraints = detail::owner_block_following(sc, g.dv);
    lp.objective = detail::owner_objective(sc, g.dv, g.dv.own_crc, g.dv.own_crc_plus);
    return g;
}

/// Ely HPR: owner's problem over the operator's feasible set (operator
/// objective dropped, activations binary) plus the NFA85-priority switch rows.
inline HprModel build_ely_hpr(const ScenarioData& sc) {
    if (sc.big_m() <= 0.0) throw InvalidParameter("Ely HPR needs a positive big-M");
    HprModel h;
    ModelIR& m = h.model;
    detail::add_owner_vars(m, sc, h.dv, /*mirrors=*/false);
    detail::add_operator_vars(m, sc, h.dv, /*capped=*/false, /*b_binary=*/true);
    h.dv.nfa85_switch = m.add_variable("nfa85_switch", VarKind::Binary);
    m.set_objective(Sense::Min,
                    detail::owner_objective(sc, h.dv, h.dv.curt_crc, h.dv.curt_crc_plus));
    for (const auto& c : detail::owner_block_leading(sc, h.dv))
        m.add_constraint(c.expr, c.op, c.rhs, c.tag);
    for (const auto& c : detail::operator_block(sc, h.dv)) m.add_constraint(c.expr, c.op, c.rhs, c.tag);

    LinExpr prio;
    for (int t = 0; t < sc.hours(); ++t) prio.add(h.dv.nfa85_active[t], 1.0);
    prio.add(h.dv.nfa85_switch, -sc.budgets.nfa85_time_fraction * sc.hours());
    m.add_constraint(prio, RelOp::GE, 0.0, "nfa85_priority");
    LinExpr sw;
    sw.add(h.dv.nfa85_switch, sc.big_m()).add(h.dv.p_el[1], -1.0);
    m.add_constraint(sw, RelOp::GE, 0.0, "nfa85_switch_link");
    return h;
}

/// NO HPR: operator's problem over the owner's feasible set.
inline HprModel build_no_hpr(const ScenarioData& sc) {
    HprModel h;
    ModelIR& m = h.model;
    detail::add_operator_vars(m, sc, h.dv, /*capped=*/false, /*b_binary=*/true);
    detail::add_owner_vars(m, sc, h.dv, /*mirrors=*/true);
    m.set_objective(Sense::Min, detail::operator_objective(sc, h.dv));
    for (const auto& c : detail::operator_block(sc, h.dv)) m.add_constraint(c.expr, c.op, c.rhs, c.tag);
    for (const auto& c : detail::owner_block_following(sc, h.dv))
        m.add_constraint(c.expr, c.op, c.rhs, c.tag);
    return h;
}

struct SolutionBundle {
    GameCase game = GameCase::Game1;
    SolveStatus status = SolveStatus::Error;
    double gap = 0.0;
    double runtime_s = 0.0;
    double upper_objective = 0.0;
    double lower_objective = 0.0;  // follower primal objective (games only)
    double p_grid = 0.0;
    double p_el[3] = {0, 0, 0};
    double p_no[3] = {0, 0, 0};
    std::vector<double> p_e, f, s, s_plus, r2, r3, b;
    std::vector<double> s_el, s_el_plus, r_el2, r_el3;  // empty unless owner follows
    double ely_profit = 0.0;
    double no_profit = 0.0;
    double complementarity_residual = 0.0;  // games only
    double strong_duality_gap = 0.0;        // games only
    std::vector<std::string> diagnostics;   // violated tags when infeasible

    bool usable() const { return status == SolveStatus::Optimal || status == SolveStatus::GapOptimal; }
};

struct CaseOptions {
    SolveOptions solver;
    std::string backend = "builtin";
    ComplementarityMethod method = ComplementarityMethod::SOS1;
    double dual_big_m = 1e4;  // BigM method only
};

/// Elastic-relaxation diagnosis: minimizes total constraint violation with
/// binaries relaxed and reports the tags that stay violated. Best effort —
/// integrality-only infeasibility is not distinguished.
inline std::vector<std::string> diagnose_infeasible(const ModelIR& model, SolverBackend& backend) {
    ModelIR m;  // rebuilt with elastic variables; ids of original vars preserved
    for (const auto& v : model.vars())
        m.add_variable(v.name, VarKind::Continuous, v.lo, std::min(v.hi, kInf));
    LinExpr total;
    for (const auto& c : model.constraints()) {
        VarRef e = m.add_variable("elastic::" + c.tag, VarKind::Continuous);
        total.add(e, 1.0);
        LinExpr expr = c.expr;
        if (c.op == RelOp::LE) {
            expr.add(e, -1.0);
            m.add_constraint(expr, RelOp::LE, c.rhs, c.tag);
        } else if (c.op == RelOp::GE) {
            expr.add(e, 1.0);
            m.add_constraint(expr, RelOp::GE, c.rhs, c.tag);
        } else {
            VarRef e2 = m.add_variable("elastic2::" + c.tag, VarKind::Continuous);
            total.add(e2, 1.0);
            expr.add(e, 1.0).add(e2, -1.0);
            m.add_constraint(expr, RelOp::EQ, c.rhs, c.tag);
        }
    }
    m.set_objective(Sense::Min, total);
    std::vector<std::string> out;
    auto s = solve(m, backend);
    if (!s.usable()) return {"(diagnosis failed: elastic model " + std::string(to_string(s.status)) + ")"};
    for (const auto& v : m.vars()) {
        if (v.name.rfind("elastic", 0) != 0) continue;
        double val = s.values[static_cast<size_t>(m.find_var(v.name).id)];
        if (val > 1e-6) out.push_back(v.name.substr(v.name.find("::") + 2));
    }
    return out;
}

namespace detail {

inline void read_values(const RawSolution& s, const DecisionVars& dv, SolutionBundle& out) {
    auto val = [&](VarRef v) { return s.value(v); };
    out.p_grid = val(dv.p_grid);
    for (int c = 0; c < 3; ++c) {
        out.p_el[c] = val(dv.p_el[c]);
        out.p_no[c] = val(dv.p_no[c]);
    }
    for (size_t t = 0; t < dv.p_e.size(); ++t) {
        out.p_e.push_back(val(dv.p_e[t]));
        out.f.push_back(val(dv.f[t]));
        out.s.push_back(val(dv.curt_crc[t]));
        out.s_plus.push_back(val(dv.curt_crc_plus[t]));
        out.r2.push_back(val(dv.curt_nfa85[t]));
        out.r3.push_back(val(dv.curt_nfa[t]));
        out.b.push_back(val(dv.nfa85_active[t]));
    }
    if (dv.has_owner_mirrors()) {
        for (size_t t = 0; t < dv.own_crc.size(); ++t) {
            out.s_el.push_back(val(dv.own_crc[t]));
            out.s_el_plus.push_back(val(dv.own_crc_plus[t]));
            out.r_el2.push_back(val(dv.own_nfa85[t]));
            out.r_el3.push_back(val(dv.own_nfa[t]));
        }
    }
}

}  // namespace detail

/// Profits per year-equivalent horizon: owner revenue minus annualized costs,
/// operator tariff income minus CRC payments. The tie-break penalty term is
/// excluded from both.
inline void extract_profits(SolutionBundle& bundle, const ScenarioData& sc) {
    if (!bundle.usable()) throw ModelError("extract_profits: non-optimal solution");
    const bool owner_follows = !bundle.s_el.empty();
    double ely = -sc.scaled_capital() * bundle.p_grid;
    for (ContractKind c : kContracts) ely -= sc.scaled_tariff(c) * bundle.p_el[index_of(c)];
    double no = 0.0;
    for (ContractKind c : kContracts) no += sc.scaled_tariff(c) * bundle.p_no[index_of(c)];
    for (int t = 0; t < sc.hours(); ++t) {
        ely += sc.prices.hydrogen_eur_per_kg * bundle.f[t];
        ely -= sc.prices.electricity_eur_per_mwh[t] * bundle.p_e[t];
        double se = owner_follows ? bundle.s_el[t] : bundle.s[t];
        double sp = owner_follows ? bundle.s_el_plus[t] : bundle.s_plus[t];
        ely += sc.prices.crc_at(t) * se + sc.prices.crc_plus_eur_per_mw * sp;
        no -= sc.prices.crc_at(t) * bundle.s[t] +
              sc.prices.crc_plus_eur_per_mw * bundle.s_plus[t];
    }
    bundle.ely_profit = ely;
    bundle.no_profit = no;
}

/// Builds, reformulates (for the games), solves, and extracts one case.
inline SolutionBundle solve_case(const ScenarioData& sc, GameCase game,
                                 const CaseOptions& opts = {}) {
    auto backend = make_backend(opts.backend);
    SolutionBundle out;
    out.game = game;

    auto finish = [&](const ModelIR& m, const DecisionVars& dv, const RawSolution& s,
                      const ReformulationArtifacts* art) {
        out.status = s.status;
        out.gap = s.gap;
        out.runtime_s = s.wall_time_s;
        if (s.status == SolveStatus::Infeasible) {
            out.diagnostics = diagnose_infeasible(m, *backend);
            return;
        }
        if (!s.usable()) return;
        out.upper_objective = s.objective;
        detail::read_values(s, dv, out);
        if (art) {
            out.lower_objective = art->eval_primal_objective(s);
            out.complementarity_residual = art->max_complementarity_residual(s);
            double d = art->eval_dual_objective(s);
            out.strong_duality_gap = std::abs(out.lower_objective - d);
        }
        extract_profits(out, sc);
    };

    if (game == GameCase::Game1 || game == GameCase::Game2) {
        // big-M linearization bounds slacks and duals; a solution touching a
        // bound may be a cutoff, so widen and re-solve. The duals scale with
        // the follower objective (through stationarity and the duality cut),
        // so that objective is first normalized to O(100) coefficients --
        // scaling a follower's objective does not change its optima -- which
        // keeps every M at solver-friendly magnitude on long horizons.
        // Dual escalation is capped: past ~1e7 the MIP integrality tolerance
        // lets a binary sit at 1-eps and admit sizeable fake duals, so points
        // that violate lower-level optimality would pass as complementary.
        constexpr double kDualBigMCap = 1e6;
        double slack_big_m = opts.dual_big_m;
        double dual_big_m = opts.dual_big_m;
        SolveOptions solver_opts = opts.solver;
        for (int round = 0;; ++round) {
            GameModel g = game == GameCase::Game1 ? build_game1(sc) : build_game2(sc);
            double cmax = 0.0;
            for (const auto& [id, c] : g.bp.lower.objective.terms())
                cmax = std::max(cmax, std::abs(c));
            // The normalization serves the indicator (big-M) linearization,
            // whose dual bounds must stay well below the magnitude where MIP
            // integrality tolerances leak; the SOS1 path branches exactly and
            // instead widens the emulation bound to clear the unscaled duals.
            double scale = 1.0;
            if (opts.method == ComplementarityMethod::BigM && cmax > 100.0) {
                scale = cmax / 100.0;
                LinExpr normalized;
                normalized.add(g.bp.lower.objective, 1.0 / scale);
                g.bp.lower.objective = std::move(normalized);
            } else if (round == 0) {
                solver_opts.sos1_big_m = std::max(solver_opts.sos1_big_m, 10.0 * cmax);
            }
            auto kkt = derive_kkt(g.bp);
            linearize_complementarity(kkt.model, kkt.artifacts, opts.method,
                                      opts.method == ComplementarityMethod::BigM ? slack_big_m
                                                                                 : kInf,
                                      dual_big_m);
            add_strong_duality_cut(kkt.model, kkt.artifacts);
            auto s = solve(kkt.model, *backend, solver_opts);
            bool bind_slack = false, bind_dual = false;
            if (opts.method == ComplementarityMethod::BigM && round < 3) {
                if (s.usable())
                    for (const auto& p : kkt.artifacts.pairs) {
                        bind_slack |= !std::isfinite(detail::interval_upper(p.slack, kkt.model)) &&
                                      evaluate(p.slack, s) >= 0.999 * slack_big_m;
                        bind_dual |= s.value(p.dual) >= 0.999 * dual_big_m;
                    }
                // truncated duals can also render stationarity infeasible
                bind_dual |= s.status == SolveStatus::Infeasible;
                bind_dual &= dual_big_m < kDualBigMCap;
            }
            if (bind_slack || bind_dual) {
                if (bind_dual) dual_big_m = std::min(dual_big_m * 32.0, kDualBigMCap);
                if (bind_slack) slack_big_m *= 8.0;
                continue;
            }
            finish(kkt.model, g.dv, s, &kkt.artifacts);
            // report follower-side certificates in the model's native units
            out.lower_objective *= scale;
            out.complementarity_residual *= scale;
            out.strong_duality_gap *= scale;
            break;
        }
    } else {
        HprModel h = game == GameCase::ElyHpr ? build_ely_hpr(sc) : build_no_hpr(sc);
        auto s = solve(h.model, *backend, opts.solver);
        finish(h.model, h.dv, s, nullptr);
    }
    return out;
}

}  // namespace gridpact

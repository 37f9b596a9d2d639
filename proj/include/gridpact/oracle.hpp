// Brute-force bilevel oracle for tiny instances: enumerate leader decisions
// on a grid, solve the follower exactly as an LP, coordinate optimistically,
// and return the best achievable leader outcome. Ground truth for testing the
// KKT reformulation, not a scalable solver.
#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "gridpact/games.hpp"

namespace gridpact {

struct GridSpec {
    double step = 0.25;     // MW
    double ceiling = 4.0;   // MW, per enumerated dimension
    long max_points = 1000000;
};

struct FollowerResult {
    SolveStatus status = SolveStatus::Error;
    double objective = 0.0;  // follower optimum (lower objective incl. couplings)
    RawSolution solution;    // follower variable values (coordinated when asked)
};

namespace detail {

/// Follower LP over the shared registry: lower rows only, couplings pinned.
inline ModelIR follower_model(const BilevelProblem& bp) {
    ModelIR m = bp.model;
    for (auto v : bp.lower.relaxed) {
        m.set_kind(VarRef{v}, VarKind::Continuous);
        m.set_bounds(VarRef{v}, 0.0, 1.0);
    }
    ModelIR f;
    for (const auto& vi : m.vars()) f.add_variable(vi.name, vi.kind, vi.lo, vi.hi);
    for (const auto& c : bp.lower.constraints) f.add_constraint(c.expr, c.op, c.rhs, c.tag);
    f.set_objective(Sense::Min, bp.lower.objective);
    return f;
}

inline void pin(ModelIR& m, VarRef v, double value) { m.set_bounds(v, value, value); }

}  // namespace detail

/// Exact follower response at a fixed leader assignment (by variable name).
/// Game I: operator problem with p_el pinned, activations relaxed. Game II:
/// owner problem with the operator's variables pinned.
inline FollowerResult solve_follower(const std::map<std::string, double>& leader_fix,
                                     const ScenarioData& sc, GameCase game,
                                     SolverBackend* backend = nullptr) {
    if (game != GameCase::Game1 && game != GameCase::Game2)
        throw InvalidParameter("solve_follower: games only");
    GameModel g = game == GameCase::Game1 ? build_game1(sc) : build_game2(sc);
    auto fm = detail::follower_model(g.bp);
    for (auto v : g.bp.lower.couplings) {
        const auto& name = g.bp.model.var(v).name;
        auto it = leader_fix.find(name);
        if (it == leader_fix.end())
            throw InvalidParameter("solve_follower: leader assignment misses " + name);
        detail::pin(fm, fm.find_var(name), it->second);
    }
    std::unique_ptr<SolverBackend> own;
    if (!backend) {
        own = make_backend("builtin");
        backend = own.get();
    }
    FollowerResult out;
    auto s = solve(fm, *backend);
    out.status = s.status;
    if (s.usable()) {
        out.objective = s.objective;
        out.solution = std::move(s);
    }
    return out;
}

struct OraclePoint {
    std::vector<double> leader_point;
    SolveStatus follower_status = SolveStatus::Error;
    double leader_objective = 0.0;
    bool achievable = false;
};

struct OracleResult {
    bool found = false;
    double leader_objective = 0.0;
    std::vector<double> leader_point;
    std::vector<std::string> dimension_names;
    long points_scanned = 0;
    std::vector<OraclePoint> report;  // evaluated points, deterministic order
};

namespace detail {

struct Dim {
    std::string name;
    std::vector<double> values;
};

inline std::vector<double> grid_values(const GridSpec& grid) {
    std::vector<double> v;
    for (double x = 0.0; x <= grid.ceiling + 1e-9; x += grid.step) v.push_back(x);
    return v;
}

/// Prebuilt Game I evaluation context: follower LP and coordination model
/// (all rows, binaries relaxed, follower-optimality face row) built once;
/// per-point work is re-pinning bounds and re-solving.
struct Game1Eval {
    GameModel g;
    ModelIR fm;  // follower LP
    ModelIR co;  // joint model, leader objective
    int face_row = -1;

    explicit Game1Eval(const ScenarioData& sc) : g(build_game1(sc)) {
        fm = follower_model(g.bp);
        co = g.bp.model;
        for (auto v : g.bp.lower.relaxed) {
            co.set_kind(VarRef{v}, VarKind::Continuous);
            co.set_bounds(VarRef{v}, 0.0, 1.0);
        }
        for (const auto& c : g.bp.lower.constraints) co.add_constraint(c.expr, c.op, c.rhs, c.tag);
        face_row = co.add_constraint(g.bp.lower.objective, RelOp::LE, 0.0, "follower-optimal");
    }

    /// Optimistic evaluation: leader objective minimized over the joint
    /// feasible set restricted to the follower-optimal face at this point.
    OraclePoint eval(const std::vector<double>& pt, SolverBackend& backend) {
        OraclePoint out;
        out.leader_point = pt;
        for (int c = 0; c < 3; ++c) {
            pin(fm, g.dv.p_el[c], pt[c]);
            pin(co, g.dv.p_el[c], pt[c]);
        }
        auto fs = solve(fm, backend);
        out.follower_status = fs.status;
        if (!fs.usable()) return out;
        double eps = 1e-6 * (1.0 + std::abs(fs.objective));
        ModelIR co_pt = co;
        co_pt.set_rhs(face_row, fs.objective + eps);
        auto cs = solve(co_pt, backend);
        if (!cs.usable()) return out;
        out.achievable = true;
        out.leader_objective = cs.objective;
        return out;
    }
};

}  // namespace detail

/// Exhaustive leader-grid scan. Game I enumerates the owner's three contract
/// capacities. Game II enumerates the operator's accommodation capacities plus
/// any curtailment series not pinned by the scenario (pinned: CRC spend under
/// the budget identity, NFA85/NFA series under zero budgets); p_grid follows
/// from the allocation identity and activations from the curtailment pattern.
inline OracleResult enumerate_bilevel(const ScenarioData& sc, GameCase game, const GridSpec& grid) {
    if (grid.step <= 0.0) throw InvalidParameter("oracle: step must be > 0");
    auto backend = make_backend("builtin");
    OracleResult res;
    const int T = sc.hours();
    auto values = detail::grid_values(grid);

    if (game == GameCase::Game1) {
        res.dimension_names = {"p_el_fa", "p_el_nfa85", "p_el_nfa"};
        long pts = 1;
        for (int i = 0; i < 3; ++i) {
            pts *= static_cast<long>(values.size());
            if (pts > grid.max_points) throw InvalidParameter("oracle: grid guard exceeded");
        }
        detail::Game1Eval ev(sc);
        for (double a : values)
            for (double b : values)
                for (double c : values) {
                    auto p = ev.eval({a, b, c}, *backend);
                    ++res.points_scanned;
                    res.report.push_back(p);
                    if (p.achievable &&
                        (!res.found || p.leader_objective < res.leader_objective - 1e-9)) {
                        res.found = true;
                        res.leader_objective = p.leader_objective;
                        res.leader_point = p.leader_point;
                    }
                }
        return res;
    }
    if (game != GameCase::Game2) throw InvalidParameter("oracle: games only");

    // Game II: build dimension list (unpinned leader coordinates)
    std::vector<detail::Dim> dims;
    for (ContractKind c : kContracts)
        dims.push_back({std::string("p_no_") + to_string(c), values});
    double crc_pin = 0.0, crc_plus_pin = -1.0;
    if (sc.budgets.mode == BudgetBindingMode::PinCrc) {
        double rhs = sc.budgets.theta * sc.budgets.cm_budget_eur_per_h;
        crc_pin = rhs == 0.0 ? 0.0 : rhs / sc.prices.crc_eur_per_mw;
    } else {
        crc_plus_pin = sc.budgets.theta * sc.budgets.cm_budget_eur_per_h /
                       sc.prices.crc_plus_eur_per_mw;
    }
    bool r2_pinned = sc.budgets.nfa85_time_fraction * T < 1.0 - 1e-9;
    bool r3_pinned = sc.budgets.nfa_energy_multiplier == 0.0;
    for (int t = 0; t < T; ++t) {
        if (sc.budgets.mode != BudgetBindingMode::PinCrc)
            dims.push_back({detail::at("curt_crc", t), values});
        if (crc_plus_pin < 0.0) dims.push_back({detail::at("curt_crc_plus", t), values});
        if (!r2_pinned) dims.push_back({detail::at("curt_nfa85", t), values});
        if (!r3_pinned) dims.push_back({detail::at("curt_nfa", t), values});
    }
    long pts = 1;
    for (const auto& d : dims) {
        pts *= static_cast<long>(d.values.size());
        if (pts > grid.max_points) throw InvalidParameter("oracle: grid guard exceeded");
    }

    struct Candidate {
        double obj;
        std::vector<double> point;  // dims order
        std::vector<double> s, sp, r2, r3, b;
        std::array<double, 3> p_no;
        double p_grid;
    };
    std::vector<Candidate> cands;
    std::vector<size_t> idx(dims.size(), 0);
    std::vector<double> pt(dims.size());
    bool done = dims.empty();
    while (!done) {
        for (size_t i = 0; i < dims.size(); ++i) pt[i] = dims[i].values[idx[i]];
        ++res.points_scanned;
        Candidate cd;
        cd.point = pt;
        size_t k = 0;
        for (int c = 0; c < 3; ++c) cd.p_no[c] = pt[k++];
        cd.p_grid = cd.p_no[0] + cd.p_no[1] + cd.p_no[2];
        cd.s.assign(T, crc_pin);
        cd.sp.assign(T, crc_plus_pin < 0.0 ? 0.0 : crc_plus_pin);
        cd.r2.assign(T, 0.0);
        cd.r3.assign(T, 0.0);
        for (int t = 0; t < T; ++t) {
            if (sc.budgets.mode != BudgetBindingMode::PinCrc) cd.s[t] = pt[k++];
            if (crc_plus_pin < 0.0) cd.sp[t] = pt[k++];
            if (!r2_pinned) cd.r2[t] = pt[k++];
            if (!r3_pinned) cd.r3[t] = pt[k++];
        }
        cd.b.assign(T, 0.0);
        for (int t = 0; t < T; ++t) cd.b[t] = cd.r2[t] > 0.0 ? 1.0 : 0.0;

        // leader-only feasibility (all upper rows except accommodation (2b))
        bool ok = true;
        double sum_b = 0.0, sum_r3 = 0.0;
        for (int t = 0; t < T && ok; ++t) {
            double curt = cd.s[t] + cd.sp[t] + cd.r2[t] + cd.r3[t];
            ok = cd.p_grid - curt <= sc.network.residual_capacity_mw[t] + 1e-9 &&
                 cd.r2[t] <= cd.p_no[1] + 1e-9 &&
                 cd.r2[t] <= cd.b[t] * sc.network.h2_offtake_kg_per_h[t] /
                                     sc.tech.eta_kg_per_mwh + 1e-9 &&
                 cd.r3[t] <= cd.p_no[2] + 1e-9 &&
                 cd.s[t] + cd.sp[t] + cd.r2[t] <= cd.p_no[0] + cd.p_no[1] + 1e-9;
            sum_b += cd.b[t];
            sum_r3 += cd.r3[t];
        }
        ok = ok && sum_b <= sc.budgets.nfa85_time_fraction * T + 1e-9 &&
             sum_r3 <= sc.budgets.nfa_energy_multiplier * cd.p_no[2] + 1e-9;
        if (ok) {
            cd.obj = 0.0;
            for (int t = 0; t < T; ++t)
                cd.obj += sc.prices.crc_at(t) * cd.s[t] +
                          sc.prices.crc_plus_eur_per_mw * cd.sp[t] +
                          sc.budgets.curtail_penalty_eur_per_mw * (cd.r2[t] + cd.r3[t]);
            for (ContractKind c : kContracts) cd.obj -= sc.scaled_tariff(c) * cd.p_no[index_of(c)];
            cands.push_back(std::move(cd));
        }
        for (size_t i = dims.size(); i-- > 0;) {
            if (++idx[i] < dims[i].values.size()) break;
            idx[i] = 0;
            if (i == 0) done = true;
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.obj != b.obj) return a.obj < b.obj;
        return a.point < b.point;  // deterministic lexicographic tie-break
    });

    // accept the first (cheapest) point admitting a follower-optimal response
    // that also satisfies the accommodation coupling p_no <= p_el
    GameModel g = build_game2(sc);
    auto fm = detail::follower_model(g.bp);
    for (const auto& cd : cands) {
        detail::pin(fm, g.dv.p_grid, cd.p_grid);
        for (int c = 0; c < 3; ++c) detail::pin(fm, g.dv.p_no[c], cd.p_no[c]);
        for (int t = 0; t < T; ++t) {
            detail::pin(fm, g.dv.curt_crc[t], cd.s[t]);
            detail::pin(fm, g.dv.curt_crc_plus[t], cd.sp[t]);
            detail::pin(fm, g.dv.curt_nfa85[t], cd.r2[t]);
            detail::pin(fm, g.dv.curt_nfa[t], cd.r3[t]);
        }
        auto fs = solve(fm, *backend);
        OraclePoint op;
        op.leader_point = cd.point;
        op.follower_status = fs.status;
        op.leader_objective = cd.obj;
        if (fs.usable()) {
            ModelIR feas = fm;  // follower-optimal face + accommodation rows
            double eps = 1e-6 * (1.0 + std::abs(fs.objective));
            feas.add_constraint(g.bp.lower.objective, RelOp::LE, fs.objective + eps,
                                "follower-optimal");
            for (int c = 0; c < 3; ++c) {
                LinExpr e;
                e.add(g.dv.p_no[c], 1.0).add(g.dv.p_el[c], -1.0);
                feas.add_constraint(e, RelOp::LE, 0.0,
                                    std::string("accom_cap[") + std::to_string(c) + "]");
            }
            feas.set_objective(Sense::Min, LinExpr());
            auto vs = solve(feas, *backend);
            op.achievable = vs.usable();
        }
        res.report.push_back(op);
        if (op.achievable) {
            res.found = true;
            res.leader_objective = cd.obj;
            res.leader_point = cd.point;
            for (const auto& d : dims) res.dimension_names.push_back(d.name);
            break;
        }
    }
    return res;
}

/// CSV of evaluated leader points: one row per point.
inline void write_oracle_report(const OracleResult& res, std::ostream& os) {
    os << "leader_point,follower_status,leader_objective,achievable\n";
    for (const auto& p : res.report) {
        for (size_t i = 0; i < p.leader_point.size(); ++i)
            os << (i ? ";" : "") << p.leader_point[i];
        os << "," << to_string(p.follower_status) << "," << p.leader_objective << ","
           << (p.achievable ? 1 : 0) << "\n";
    }
}

}  // namespace gridpact

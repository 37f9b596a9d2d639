#include <catch_amalgamated.hpp>
#include <sstream>

#include "gridpact/bilevel.hpp"
#include "gridpact/solve.hpp"
#include "helpers.hpp"

using namespace gridpact;
using Catch::Approx;

namespace {

// Leader picks x in [0,1]; follower solves min -y s.t. y <= x, y >= 0.
// Leader objective max y - 0.5x -> optimum x = 1, y = 1, value 0.5.
BilevelProblem toy_bilevel() {
    BilevelProblem bp;
    auto x = bp.model.add_variable("x", VarKind::Continuous, 0.0, 1.0);
    auto y = bp.model.add_variable("y", VarKind::Continuous, 0.0, kInf);
    LinExpr up;
    up.add(y, 1.0).add(x, -0.5);
    bp.model.set_objective(Sense::Max, up);
    bp.lower.vars = {y};
    bp.lower.couplings = {x};
    LinExpr row;
    row.add(y, 1.0).add(x, -1.0);
    bp.lower.constraints.push_back({row, RelOp::LE, 0.0, "cap"});
    bp.lower.objective.add(y, -1.0);
    return bp;
}

}  // namespace

TEST_CASE("relax_binaries marks lower binaries; rejects upper vars") {
    BilevelProblem bp = toy_bilevel();
    auto b = bp.model.add_variable("b", VarKind::Binary);
    bp.lower.vars.push_back(b);
    auto lp = relax_binaries(bp.lower, {b});
    CHECK(lp.relaxed.count(b.id) == 1);
    CHECK(relax_binaries(bp.lower, {}).relaxed.empty());
    auto x = bp.model.find_var("x");
    CHECK_THROWS_AS(relax_binaries(bp.lower, {x}), ModelError);
}

TEST_CASE("derive_kkt: hand example structure") {
    auto bp = toy_bilevel();
    auto kkt = derive_kkt(bp);
    // duals: "cap" plus the y >= 0 bound row; one stationarity row for y
    REQUIRE(kkt.artifacts.duals.size() == 2);
    REQUIRE(kkt.artifacts.pairs.size() == 2);
    REQUIRE(kkt.artifacts.stationarity_ids.size() == 1);
    // stationarity: -1 + mu_cap - mu_lo = 0 (constant folded into rhs)
    const auto& st = kkt.model.constraint(kkt.artifacts.stationarity_ids[0]);
    CHECK(st.op == RelOp::EQ);
    CHECK(st.rhs == Approx(1.0));
    auto mu_cap = kkt.model.find_var("du::cap");
    auto mu_lo = kkt.model.find_var("du::y::lo");
    REQUIRE(mu_cap.valid());
    REQUIRE(mu_lo.valid());
    CHECK(st.expr.coeff(mu_cap) == Approx(1.0));
    CHECK(st.expr.coeff(mu_lo) == Approx(-1.0));
    // pair slacks: (x - y, mu_cap) and (y, mu_lo)
    auto x = kkt.model.find_var("x");
    auto y = kkt.model.find_var("y");
    CHECK(kkt.artifacts.pairs[0].slack.coeff(x) == Approx(1.0));
    CHECK(kkt.artifacts.pairs[0].slack.coeff(y) == Approx(-1.0));
    CHECK(kkt.artifacts.pairs[1].slack.coeff(y) == Approx(1.0));
}

TEST_CASE("derive_kkt: empty lower level; unrelaxed binary rejected") {
    BilevelProblem bp;
    auto x = bp.model.add_variable("x", VarKind::Continuous, 0.0, 1.0);
    LinExpr up;
    up.add(x, 1.0);
    bp.model.set_objective(Sense::Max, up);
    auto kkt = derive_kkt(bp);
    CHECK(kkt.artifacts.pairs.empty());
    CHECK(kkt.artifacts.stationarity_ids.empty());

    auto bp2 = toy_bilevel();
    auto b = bp2.model.add_variable("b", VarKind::Binary);
    bp2.lower.vars.push_back(b);
    CHECK_THROWS_AS(derive_kkt(bp2), ModelError);
    bp2.lower = relax_binaries(bp2.lower, {b});
    auto kkt2 = derive_kkt(bp2);
    CHECK(kkt2.model.var(kkt2.model.find_var("b")).kind == VarKind::Continuous);
    CHECK(kkt2.model.var(kkt2.model.find_var("b")).hi == 1.0);
}

TEST_CASE("toy bilevel solved via KKT with SOS1 and strong duality") {
    auto bp = toy_bilevel();
    auto kkt = derive_kkt(bp);
    linearize_complementarity(kkt.model, kkt.artifacts, ComplementarityMethod::SOS1);
    add_strong_duality_cut(kkt.model, kkt.artifacts);
    CHECK(kkt.model.find_constraint("strong-duality") >= 0);
    auto be = make_backend("builtin");
    auto s = solve(kkt.model, *be);
    REQUIRE(s.usable());
    CHECK(s.objective == Approx(0.5).margin(1e-6));
    CHECK(s.value(kkt.model.find_var("x")) == Approx(1.0).margin(1e-6));
    CHECK(s.value(kkt.model.find_var("y")) == Approx(1.0).margin(1e-6));
    CHECK(kkt.artifacts.max_complementarity_residual(s) <= 1e-5);
    double p = kkt.artifacts.eval_primal_objective(s);
    double d = kkt.artifacts.eval_dual_objective(s);
    CHECK(std::abs(p - d) <= 1e-5 * (1.0 + std::abs(p)));
}

TEST_CASE("toy bilevel: BIGM linearization agrees with SOS1") {
    auto bp = toy_bilevel();
    auto kkt = derive_kkt(bp);
    linearize_complementarity(kkt.model, kkt.artifacts, ComplementarityMethod::BigM, 100.0);
    add_strong_duality_cut(kkt.model, kkt.artifacts);
    auto be = make_backend("builtin");
    auto s = solve(kkt.model, *be);
    REQUIRE(s.usable());
    CHECK(s.objective == Approx(0.5).margin(1e-6));
}

TEST_CASE("strong-duality cut turns vacuous when couplings are unbounded") {
    auto bp = toy_bilevel();
    bp.model.set_bounds(bp.model.find_var("x"), 0.0, kInf);
    // coupling coefficient on x is negative, so the cut uses x's LOWER bound
    auto kkt = derive_kkt(bp);
    add_strong_duality_cut(kkt.model, kkt.artifacts);
    CHECK(kkt.model.find_constraint("strong-duality") >= 0);

    // flip the coupling sign: now the upper bound is needed and it is infinite
    BilevelProblem bp2;
    auto x = bp2.model.add_variable("x", VarKind::Continuous, 0.0, kInf);
    auto y = bp2.model.add_variable("y", VarKind::Continuous, 0.0, 5.0);
    LinExpr up;
    up.add(y, 1.0);
    bp2.model.set_objective(Sense::Max, up);
    bp2.lower.vars = {y};
    bp2.lower.couplings = {x};
    LinExpr row;
    row.add(y, 1.0).add(x, 1.0);
    bp2.lower.constraints.push_back({row, RelOp::LE, 10.0, "cap"});
    bp2.lower.objective.add(y, -1.0);
    auto kkt2 = derive_kkt(bp2);
    add_strong_duality_cut(kkt2.model, kkt2.artifacts);
    CHECK(kkt2.model.find_constraint("strong-duality[vacuous]") >= 0);
}

TEST_CASE("build_hpr keeps lower feasibility, drops lower objective") {
    auto bp = toy_bilevel();
    size_t upper_cons = bp.model.num_constraints();
    LowerConstraint extra{LinExpr{}, RelOp::LE, 0.0, "extra"};
    auto hpr = build_hpr(bp, {extra});
    CHECK(hpr.num_constraints() == upper_cons + bp.lower.constraints.size() + 1);
    auto be = make_backend("builtin");
    auto s = solve(hpr, *be);
    REQUIRE(s.usable());
    // HPR (leader max) dominates the bilevel optimum; here they coincide
    CHECK(s.objective >= 0.5 - 1e-9);
}

TEST_CASE("KKT soundness on random lower LPs with fixed couplings") {
    auto be = make_backend("builtin");
    gptest::Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        int ny = rng.uniform_int(2, 4);
        int nc = rng.uniform_int(1, 6);
        BilevelProblem bp;
        auto x = bp.model.add_variable("x", VarKind::Continuous, 0.0, 2.0);
        double xfix = rng.uniform(0.0, 2.0);
        bp.model.set_bounds(x, xfix, xfix);
        bp.lower.couplings = {x};
        std::vector<VarRef> ys;
        for (int j = 0; j < ny; ++j)
            ys.push_back(bp.model.add_variable("y" + std::to_string(j), VarKind::Continuous, 0.0,
                                               rng.uniform(1.0, 3.0)));
        bp.lower.vars = ys;
        for (int i = 0; i < nc; ++i) {
            LinExpr e;
            for (auto yv : ys)
                if (rng.uniform(0, 1) < 0.7) e.add(yv, rng.uniform(-1.0, 1.0));
            if (rng.uniform(0, 1) < 0.5) e.add(x, rng.uniform(-1.0, 1.0));
            bp.lower.constraints.push_back(
                {e, RelOp::LE, rng.uniform(std::max(0.0, xfix), 3.0), "c" + std::to_string(i)});
        }
        for (auto yv : ys) bp.lower.objective.add(yv, rng.uniform(-1.0, 1.0));
        // upper objective = follower objective, so the reformulation optimum
        // must equal the direct LP optimum
        bp.model.set_objective(Sense::Min, bp.lower.objective);

        ModelIR direct = bp.model;  // same vars/bounds; lower rows as plain constraints
        for (const auto& c : bp.lower.constraints) direct.add_constraint(c.expr, c.op, c.rhs, c.tag);
        auto sd = solve(direct, *be);

        auto kkt = derive_kkt(bp);
        linearize_complementarity(kkt.model, kkt.artifacts, ComplementarityMethod::SOS1);
        add_strong_duality_cut(kkt.model, kkt.artifacts);
        auto sk = solve(kkt.model, *be);

        if (sd.status == SolveStatus::Infeasible) {
            CHECK(sk.status == SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(sd.usable());
        REQUIRE(sk.usable());
        CHECK(sk.objective == Approx(sd.objective).margin(1e-6));
        CHECK(kkt.artifacts.max_complementarity_residual(sk) <= 1e-5);
        double p = kkt.artifacts.eval_primal_objective(sk);
        double dql = kkt.artifacts.eval_dual_objective(sk);
        CHECK(std::abs(p - dql) <= 1e-5 * (1.0 + std::abs(p)));
    }
}

TEST_CASE("reformulation trace names every row") {
    auto bp = toy_bilevel();
    auto kkt = derive_kkt(bp);
    add_strong_duality_cut(kkt.model, kkt.artifacts);
    std::ostringstream os;
    write_reformulation_trace(kkt.artifacts, kkt.model, os);
    auto text = os.str();
    CHECK(text.find("cap -> dual du::cap") != std::string::npos);
    CHECK(text.find("st::y") != std::string::npos);
    CHECK(text.find("strong-duality") != std::string::npos);
}

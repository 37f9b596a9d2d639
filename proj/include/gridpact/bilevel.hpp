// Single-level reformulation of bilevel problems with an LP lower level:
// KKT conditions (stationarity, primal/dual feasibility, complementarity),
// SOS1 or big-M linearization of the complementarity pairs, a linear
// strong-duality cut, and high-point relaxations.
#pragma once

#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gridpact/model.hpp"

namespace gridpact {

struct LowerConstraint {
    LinExpr expr;
    RelOp op = RelOp::LE;
    double rhs = 0.0;
    std::string tag;
};

/// Lower-level LP fragment. Variables and couplings are handles into the
/// shared registry of the enclosing BilevelProblem. Binary lower variables
/// must be relaxed (relax_binaries) before KKT derivation.
struct LowerLevelLP {
    std::vector<VarRef> vars;
    std::vector<VarRef> couplings;  // upper-level vars appearing in lower data
    std::vector<LowerConstraint> constraints;
    LinExpr objective;  // minimized; may carry coupling terms (constant to the follower)
    std::set<int> relaxed;

    bool is_lower(VarRef v) const {
        for (VarRef w : vars)
            if (w == v) return true;
        return false;
    }
    bool is_coupling(VarRef v) const {
        for (VarRef w : couplings)
            if (w == v) return true;
        return false;
    }
};

/// Upper-level fragment (objective + upper constraints, full variable
/// registry) plus the lower-level LP. Optimistic semantics: among follower
/// optima the leader-favorable point is selected by construction.
struct BilevelProblem {
    ModelIR model;  // registry of ALL variables; upper objective and constraints
    LowerLevelLP lower;
};

/// Marks binary lower-level variables as relaxed to continuous [0,1].
inline LowerLevelLP relax_binaries(LowerLevelLP lp, const std::vector<VarRef>& vars) {
    for (VarRef v : vars) {
        if (!lp.is_lower(v)) throw ModelError("relax_binaries: variable is not in the lower level");
        lp.relaxed.insert(v.id);
    }
    return lp;
}

struct ComplementarityPair {
    LinExpr slack;  // >= 0 at feasible points
    VarRef dual;
    std::string source_tag;
};

struct ReformulationArtifacts {
    std::vector<std::pair<std::string, VarRef>> duals;  // per lower constraint (+ bound rows)
    std::vector<ComplementarityPair> pairs;
    std::vector<int> stationarity_ids;
    int strong_duality_id = -1;
    LinExpr lower_primal_objective;  // full follower objective incl. couplings

    // dual objective = sum_i mu_i * (coupling_i(x) - rhs_i); exact (bilinear) evaluation
    struct DualTerm {
        VarRef dual;
        LinExpr coupling;  // f_i'x of the normalized (<=) row
        double rhs = 0.0;
    };
    std::vector<DualTerm> dual_terms;
    LinExpr coupling_objective_part;  // d(x): coupling terms of the follower objective

    double eval_primal_objective(const RawSolution& s) const {
        return evaluate(lower_primal_objective, s) - evaluate(coupling_objective_part, s);
    }
    double eval_dual_objective(const RawSolution& s) const {
        double v = 0.0;
        for (const auto& t : dual_terms) v += s.value(t.dual) * (evaluate(t.coupling, s) - t.rhs);
        return v;
    }
    double max_complementarity_residual(const RawSolution& s) const {
        double r = 0.0;
        for (const auto& p : pairs)
            r = std::max(r, std::abs(evaluate(p.slack, s) * s.value(p.dual)));
        return r;
    }
};

namespace detail {

struct NormalizedRow {
    LinExpr lower_part;     // a'y
    LinExpr coupling_part;  // f'x
    double rhs = 0.0;
    bool equality = false;
    std::string tag;
};

inline NormalizedRow normalize_lower_row(const LowerConstraint& c, const std::set<int>& lower_ids,
                                         const std::set<int>& coupling_ids) {
    double sgn = (c.op == RelOp::GE) ? -1.0 : 1.0;
    NormalizedRow row;
    row.equality = (c.op == RelOp::EQ);
    row.rhs = sgn * (c.rhs - c.expr.constant());
    row.tag = c.tag;
    for (const auto& [id, coeff] : c.expr.terms()) {
        if (lower_ids.count(id))
            row.lower_part.add(VarRef{id}, sgn * coeff);
        else if (coupling_ids.count(id))
            row.coupling_part.add(VarRef{id}, sgn * coeff);
        else
            throw ModelError("lower constraint " + c.tag + " references undeclared variable id " +
                             std::to_string(id));
    }
    return row;
}

/// Upper bound of a linear expression over the variable box, +inf if unbounded.
inline double interval_upper(const LinExpr& e, const ModelIR& m) {
    double u = e.constant();
    for (const auto& [id, c] : e.terms()) {
        const auto& v = m.var(VarRef{id});
        double contrib = c > 0 ? c * v.hi : c * v.lo;
        if (std::isinf(contrib)) return kInf;
        u += contrib;
    }
    return u;
}

}  // namespace detail

struct KktResult {
    ModelIR model;  // upper fragment + lower primal + stationarity; pairs not yet linearized
    ReformulationArtifacts artifacts;
};

/// KKT single-level reformulation. Precondition: the lower level is a pure LP
/// (binaries relaxed). Dual convention: normalized <= rows get duals >= 0
/// entering the Lagrangian with +; equalities get free duals.
inline KktResult derive_kkt(const BilevelProblem& bp) {
    const LowerLevelLP& lp = bp.lower;
    std::set<int> lower_ids, coupling_ids;
    for (VarRef v : lp.vars) lower_ids.insert(v.id);
    for (VarRef v : lp.couplings) coupling_ids.insert(v.id);

    KktResult out;
    out.model = bp.model;
    ModelIR& m = out.model;
    ReformulationArtifacts& art = out.artifacts;

    for (VarRef v : lp.vars) {
        if (m.var(v).kind == VarKind::Binary) {
            if (!lp.relaxed.count(v.id))
                throw ModelError("derive_kkt: lower level contains unrelaxed binary " +
                                 m.var(v).name);
            m.set_kind(v, VarKind::Continuous);
            m.set_bounds(v, 0.0, 1.0);
        } else if (lp.relaxed.count(v.id)) {
            m.set_kind(v, VarKind::Continuous);
            m.set_bounds(v, 0.0, 1.0);
        }
    }

    // objective split (coupling terms are constants to the follower)
    for (const auto& [id, c] : lp.objective.terms()) {
        if (coupling_ids.count(id)) art.coupling_objective_part.add(VarRef{id}, c);
        else if (!lower_ids.count(id))
            throw ModelError("lower objective references undeclared variable id " +
                             std::to_string(id));
    }
    art.lower_primal_objective = lp.objective;

    // normalized rows: declared constraints then variable-bound rows
    std::vector<detail::NormalizedRow> rows;
    for (const auto& c : lp.constraints)
        rows.push_back(detail::normalize_lower_row(c, lower_ids, coupling_ids));
    for (VarRef v : lp.vars) {
        const auto& vi = m.var(v);
        if (std::isfinite(vi.lo)) {
            detail::NormalizedRow r;  // -y <= -lo
            r.lower_part.add(v, -1.0);
            r.rhs = -vi.lo;
            r.tag = vi.name + "::lo";
            rows.push_back(std::move(r));
        }
        if (std::isfinite(vi.hi)) {
            detail::NormalizedRow r;  // y <= hi
            r.lower_part.add(v, 1.0);
            r.rhs = vi.hi;
            r.tag = vi.name + "::hi";
            rows.push_back(std::move(r));
        }
    }

    // lower primal feasibility (declared constraints only; bounds already on vars)
    for (const auto& c : lp.constraints) m.add_constraint(c.expr, c.op, c.rhs, c.tag);

    // duals
    std::vector<VarRef> mu(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        double lo = rows[i].equality ? -kInf : 0.0;
        mu[i] = m.add_variable("du::" + rows[i].tag, VarKind::Continuous, lo, kInf);
        art.duals.emplace_back(rows[i].tag, mu[i]);
    }

    // stationarity: dL/dy_j = c_j + sum_i a_ij mu_i = 0
    for (VarRef y : lp.vars) {
        LinExpr st;
        st.add_constant(lp.objective.coeff(y));
        for (size_t i = 0; i < rows.size(); ++i) {
            double a = rows[i].lower_part.coeff(y);
            if (a != 0.0) st.add(mu[i], a);
        }
        art.stationarity_ids.push_back(m.add_constraint(st, RelOp::EQ, 0.0, "st::" + m.var(y).name));
    }

    // complementarity pairs (inequality rows) and exact dual-objective terms (all rows)
    for (size_t i = 0; i < rows.size(); ++i) {
        art.dual_terms.push_back({mu[i], rows[i].coupling_part, rows[i].rhs});
        if (rows[i].equality) continue;
        LinExpr slack;  // rhs - a'y - f'x >= 0
        slack.add_constant(rows[i].rhs);
        slack.add(rows[i].lower_part, -1.0);
        slack.add(rows[i].coupling_part, -1.0);
        art.pairs.push_back({std::move(slack), mu[i], rows[i].tag});
    }
    return out;
}

enum class ComplementarityMethod { SOS1, BigM };

/// Linearizes the queued complementarity pairs in-place on `m`.
/// SOS1: one auxiliary slack variable + linking equality + SOS1 group per pair.
/// BigM: indicator binary z with slack <= Ms z and dual <= Md (1-z).
inline void linearize_complementarity(ModelIR& m, const ReformulationArtifacts& art,
                                      ComplementarityMethod method, double big_m = kInf,
                                      double dual_big_m = kInf) {
    for (const auto& p : art.pairs) {
        double slack_ub = detail::interval_upper(p.slack, m);
        if (method == ComplementarityMethod::SOS1) {
            VarRef aux = m.add_variable("cs::" + p.source_tag, VarKind::Continuous, 0.0,
                                        std::isfinite(slack_ub) ? slack_ub : kInf);
            LinExpr link = p.slack;  // aux - slack = 0
            link.add(aux, -1.0);
            m.add_constraint(link, RelOp::EQ, 0.0, "cs::" + p.source_tag);
            m.add_sos1({aux, p.dual});
        } else {
            // a finite interval bound on the slack is valid as-is; the
            // caller-supplied M only stands in for unbounded slacks
            double ms = std::isfinite(slack_ub) ? slack_ub : big_m;
            double md = dual_big_m == kInf ? big_m : dual_big_m;
            if (!std::isfinite(ms) || !std::isfinite(md))
                throw ModelError("big-M linearization needs a finite M for pair " + p.source_tag);
            VarRef z = m.add_variable("cz::" + p.source_tag, VarKind::Binary);
            LinExpr s = p.slack;  // slack - Ms z <= 0
            s.add(z, -ms);
            m.add_constraint(s, RelOp::LE, 0.0, "czs::" + p.source_tag);
            LinExpr d;  // dual + Md z <= Md
            d.add(p.dual, 1.0).add(z, md);
            m.add_constraint(d, RelOp::LE, md, "czd::" + p.source_tag);
        }
    }
}

/// Linear strong-duality cut: follower primal objective <= follower dual
/// objective. Bilinear dual*coupling products are replaced by linear
/// over-estimators from the coupling variable bounds, which keeps the cut
/// valid; exact equality at solutions is certified via eval_*_objective.
/// Falls back to a vacuous row when a needed bound is infinite.
inline int add_strong_duality_cut(ModelIR& m, ReformulationArtifacts& art) {
    LinExpr cut;  // c'y - overestimate(dual objective) <= 0
    for (const auto& [id, c] : art.lower_primal_objective.terms())
        if (!art.coupling_objective_part.terms().count(id)) cut.add(VarRef{id}, c);
    bool ok = true;
    for (const auto& t : art.dual_terms) {
        bool free_dual = m.var(t.dual).lo == -kInf;
        cut.add(t.dual, t.rhs);  // -(-rhs * mu)
        for (const auto& [id, f] : t.coupling.terms()) {
            if (free_dual) {
                ok = false;  // cannot bound a free dual's bilinear term
                break;
            }
            const auto& v = m.var(VarRef{id});
            double bound = f > 0 ? v.hi : v.lo;  // over-estimator f * bound * mu (mu >= 0)
            if (!std::isfinite(bound)) {
                ok = false;
                break;
            }
            cut.add(t.dual, -f * bound);
        }
        if (!ok) break;
    }
    if (!ok) {
        art.strong_duality_id = m.add_constraint(LinExpr(), RelOp::LE, 0.0, "strong-duality[vacuous]");
        return art.strong_duality_id;
    }
    art.strong_duality_id = m.add_constraint(cut, RelOp::LE, 0.0, "strong-duality");
    return art.strong_duality_id;
}

/// High-point relaxation: upper objective and constraints plus the lower
/// feasible set (lower objective dropped, lower binaries kept).
inline ModelIR build_hpr(const BilevelProblem& bp,
                         const std::vector<LowerConstraint>& extra_constraints = {}) {
    ModelIR m = bp.model;
    for (const auto& c : bp.lower.constraints) m.add_constraint(c.expr, c.op, c.rhs, c.tag);
    for (const auto& c : extra_constraints) m.add_constraint(c.expr, c.op, c.rhs, c.tag);
    return m;
}

/// Per-constraint provenance of the reformulation, as a text report.
inline void write_reformulation_trace(const ReformulationArtifacts& art, const ModelIR& m,
                                      std::ostream& os) {
    os << "reformulation trace\n";
    for (const auto& [tag, dual] : art.duals) os << "  " << tag << " -> dual " << m.var(dual).name << "\n";
    for (const auto& p : art.pairs)
        os << "  pair: slack(" << p.source_tag << ") x " << m.var(p.dual).name << "\n";
    for (int id : art.stationarity_ids) os << "  stationarity: " << m.constraint(id).tag << "\n";
    if (art.strong_duality_id >= 0)
        os << "  cut: " << m.constraint(art.strong_duality_id).tag << "\n";
}

}  // namespace gridpact

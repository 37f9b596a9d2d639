// Solver-agnostic MILP intermediate representation: variables, linear
// constraints, SOS1 groups, objective. Backends consume this IR; nothing
// here depends on a particular solver.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridpact {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class VarKind { Continuous, Binary };

/// Opaque variable handle, stable for the lifetime of its ModelIR.
struct VarRef {
    int id = -1;
    bool valid() const { return id >= 0; }
    friend bool operator==(VarRef a, VarRef b) { return a.id == b.id; }
    friend bool operator<(VarRef a, VarRef b) { return a.id < b.id; }
};

struct VarInfo {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lo = 0.0;
    double hi = kInf;
};

/// Sparse linear expression: coefficient map plus constant offset.
/// Zero coefficients are dropped on normalization; insertion merges duplicates.
class LinExpr {
  public:
    LinExpr() = default;
    explicit LinExpr(double constant) : offset_(constant) {}

    LinExpr& add(VarRef v, double coeff) {
        if (!v.valid()) throw ModelError("LinExpr: invalid VarRef");
        if (!std::isfinite(coeff)) throw ModelError("LinExpr: non-finite coefficient");
        if (coeff == 0.0) return *this;
        auto [it, inserted] = terms_.try_emplace(v.id, coeff);
        if (!inserted) {
            it->second += coeff;
            if (it->second == 0.0) terms_.erase(it);
        }
        return *this;
    }
    LinExpr& add(const LinExpr& other, double scale = 1.0) {
        for (const auto& [id, c] : other.terms_) add(VarRef{id}, scale * c);
        offset_ += scale * other.offset_;
        return *this;
    }
    LinExpr& add_constant(double c) {
        offset_ += c;
        return *this;
    }

    double coeff(VarRef v) const {
        auto it = terms_.find(v.id);
        return it == terms_.end() ? 0.0 : it->second;
    }
    double constant() const { return offset_; }
    const std::map<int, double>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

  private:
    std::map<int, double> terms_;  // var id -> coefficient, ordered for determinism
    double offset_ = 0.0;
};

enum class RelOp { LE, EQ, GE };
enum class Sense { Min, Max };

struct Constraint {
    LinExpr expr;  // compared against rhs; expr constant folded into rhs at insert
    RelOp op = RelOp::LE;
    double rhs = 0.0;
    std::string tag;
};

struct SOS1Group {
    std::vector<VarRef> members;  // at most one member nonzero in any solution
};

enum class SolveStatus { Optimal, GapOptimal, Infeasible, Unbounded, Limit, Error };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::GapOptimal: return "gap-optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::Limit: return "limit";
        default: return "error";
    }
}

struct RawSolution {
    std::vector<double> values;  // indexed by VarRef id
    double objective = 0.0;
    SolveStatus status = SolveStatus::Error;
    double gap = 0.0;  // achieved relative gap
    double wall_time_s = 0.0;

    bool has(VarRef v) const { return v.valid() && v.id < static_cast<int>(values.size()); }
    double value(VarRef v) const {
        if (!has(v)) throw ModelError("RawSolution: no value for variable id " + std::to_string(v.id));
        return values[static_cast<size_t>(v.id)];
    }
    bool usable() const { return status == SolveStatus::Optimal || status == SolveStatus::GapOptimal; }
};

class ModelIR {
  public:
    VarRef add_variable(const std::string& name, VarKind kind, double lo = 0.0, double hi = kInf) {
        if (name_index_.count(name)) throw ModelError("duplicate variable name: " + name);
        if (kind == VarKind::Binary) {
            lo = std::max(lo, 0.0);
            hi = std::min(hi, 1.0);
        }
        if (lo > hi) throw ModelError("variable " + name + ": lo > hi");
        VarRef v{static_cast<int>(vars_.size())};
        vars_.push_back(VarInfo{name, kind, lo, hi});
        name_index_.emplace(name, v.id);
        return v;
    }

    int add_constraint(LinExpr expr, RelOp op, double rhs, const std::string& tag) {
        check_expr(expr, "constraint " + tag);
        if (tag_index_.count(tag)) throw ModelError("duplicate constraint tag: " + tag);
        rhs -= expr.constant();
        LinExpr flat;
        flat.add(expr);
        flat.add_constant(-expr.constant());
        int id = static_cast<int>(cons_.size());
        cons_.push_back(Constraint{std::move(flat), op, rhs, tag});
        tag_index_.emplace(tag, id);
        return id;
    }

    int add_sos1(std::vector<VarRef> members) {
        for (VarRef v : members) check_var(v, "SOS1 group");
        sos1_.push_back(SOS1Group{std::move(members)});
        return static_cast<int>(sos1_.size()) - 1;
    }

    void set_objective(Sense sense, LinExpr expr) {
        check_expr(expr, "objective");
        sense_ = sense;
        objective_ = std::move(expr);
        has_objective_ = true;
    }

    // accessors
    size_t num_vars() const { return vars_.size(); }
    size_t num_constraints() const { return cons_.size(); }
    const std::vector<VarInfo>& vars() const { return vars_; }
    const VarInfo& var(VarRef v) const {
        check_var(v, "var()");
        return vars_[static_cast<size_t>(v.id)];
    }
    VarRef find_var(const std::string& name) const {
        auto it = name_index_.find(name);
        return it == name_index_.end() ? VarRef{} : VarRef{it->second};
    }
    const std::vector<Constraint>& constraints() const { return cons_; }
    const Constraint& constraint(int id) const { return cons_.at(static_cast<size_t>(id)); }
    int find_constraint(const std::string& tag) const {
        auto it = tag_index_.find(tag);
        return it == tag_index_.end() ? -1 : it->second;
    }
    const std::vector<SOS1Group>& sos1_groups() const { return sos1_; }
    bool has_objective() const { return has_objective_; }
    Sense sense() const { return sense_; }
    const LinExpr& objective() const { return objective_; }

    void set_rhs(int id, double rhs) { cons_.at(static_cast<size_t>(id)).rhs = rhs; }

    void set_bounds(VarRef v, double lo, double hi) {
        check_var(v, "set_bounds");
        if (lo > hi) throw ModelError("set_bounds: lo > hi for " + vars_[v.id].name);
        vars_[static_cast<size_t>(v.id)].lo = lo;
        vars_[static_cast<size_t>(v.id)].hi = hi;
    }
    void set_kind(VarRef v, VarKind kind) {
        check_var(v, "set_kind");
        vars_[static_cast<size_t>(v.id)].kind = kind;
        if (kind == VarKind::Binary) {
            auto& vi = vars_[static_cast<size_t>(v.id)];
            vi.lo = std::max(vi.lo, 0.0);
            vi.hi = std::min(vi.hi, 1.0);
        }
    }

  private:
    void check_var(VarRef v, const std::string& where) const {
        if (!v.valid() || v.id >= static_cast<int>(vars_.size()))
            throw ModelError(where + ": unregistered variable");
    }
    void check_expr(const LinExpr& e, const std::string& where) const {
        for (const auto& [id, c] : e.terms()) {
            check_var(VarRef{id}, where);
            if (!std::isfinite(c)) throw ModelError(where + ": non-finite coefficient");
        }
    }

    std::vector<VarInfo> vars_;
    std::unordered_map<std::string, int> name_index_;
    std::vector<Constraint> cons_;
    std::unordered_map<std::string, int> tag_index_;
    std::vector<SOS1Group> sos1_;
    LinExpr objective_;
    Sense sense_ = Sense::Min;
    bool has_objective_ = false;
};

/// Exact linear evaluation of an expression at a solution.
inline double evaluate(const LinExpr& expr, const RawSolution& sol) {
    double v = expr.constant();
    for (const auto& [id, c] : expr.terms()) v += c * sol.value(VarRef{id});
    return v;
}

/// Signed constraint violation at a solution (positive = violated).
inline double violation(const Constraint& c, const RawSolution& sol) {
    double lhs = evaluate(c.expr, sol);
    switch (c.op) {
        case RelOp::LE: return lhs - c.rhs;
        case RelOp::GE: return c.rhs - lhs;
        case RelOp::EQ: return std::abs(lhs - c.rhs);
    }
    return 0.0;
}

/// LP-format-compatible text export for debugging, one constraint per line.
inline void write_lp_format(const ModelIR& m, std::ostream& os) {
    auto write_expr = [&](const LinExpr& e) {
        bool first = true;
        for (const auto& [id, c] : e.terms()) {
            if (c >= 0 && !first) os << " + ";
            if (c < 0) os << (first ? "- " : " - ");
            double a = std::abs(c);
            if (a != 1.0) os << a << " ";
            os << m.var(VarRef{id}).name;
            first = false;
        }
        if (first) os << "0";
    };
    os << (m.sense() == Sense::Min ? "Minimize" : "Maximize") << "\n obj: ";
    write_expr(m.objective());
    os << "\nSubject To\n";
    for (const auto& c : m.constraints()) {
        os << " " << c.tag << ": ";
        write_expr(c.expr);
        os << (c.op == RelOp::LE ? " <= " : c.op == RelOp::GE ? " >= " : " = ") << c.rhs << "\n";
    }
    os << "Bounds\n";
    for (const auto& v : m.vars()) {
        if (v.lo == 0.0 && v.hi == kInf) continue;
        if (v.lo == -kInf)
            os << " -inf <= " << v.name;
        else
            os << " " << v.lo << " <= " << v.name;
        if (v.hi == kInf)
            os << " <= +inf\n";
        else
            os << " <= " << v.hi << "\n";
    }
    bool any_bin = false;
    for (const auto& v : m.vars()) any_bin |= (v.kind == VarKind::Binary);
    if (any_bin) {
        os << "Binary\n";
        for (const auto& v : m.vars())
            if (v.kind == VarKind::Binary) os << " " << v.name << "\n";
    }
    if (!m.sos1_groups().empty()) {
        os << "SOS\n";
        int k = 0;
        for (const auto& g : m.sos1_groups()) {
            os << " s" << k++ << ": S1 ::";
            int w = 1;
            for (VarRef v : g.members) os << " " << m.var(v).name << ":" << w++;
            os << "\n";
        }
    }
    os << "End\n";
}

}  // namespace gridpact

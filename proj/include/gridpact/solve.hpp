// Solver backends for the ModelIR contract.
//
// "builtin": embedded simplex + branch-and-bound. Binaries branch on bounds,
// SOS1 groups branch by fixing subsets to zero, so complementarity is enforced
// exactly without big-M constants.
//
// "scipy": shells out to python3 / scipy.optimize.milp (HiGHS). SOS1 groups
// are emulated with indicator binaries and finite big-M bounds; intended for
// models too large for the dense builtin engine.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <unistd.h>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "gridpact/model.hpp"
#include "gridpact/simplex.hpp"
#include "json.hpp"

namespace gridpact {

struct SolveOptions {
    double rel_gap = 0.001;
    // Absolute bound tolerance accepted alongside rel_gap (0 = unused).
    // Needed when the optimal value is 0: a relative gap is undefined there,
    // so without an absolute target no node can ever be pruned on bound.
    double abs_gap = 0.0;
    double time_limit_s = 600.0;
    double int_tol = 1e-6;
    long max_nodes = 500000;
    // Starting bound when emulating SOS1 members with indicator binaries.
    // Kept modest for numerical stability; the emulation re-solves with a
    // larger bound whenever a member lands on it, so it is not a cutoff.
    double sos1_big_m = 2e4;
    int seed = 0;
};

class SolverBackend {
  public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual RawSolution solve(const ModelIR& model, const SolveOptions& opts) = 0;
};

namespace detail {

inline LpModel to_lp(const ModelIR& m) {
    LpModel lp;
    lp.n = static_cast<int>(m.num_vars());
    lp.cost.assign(lp.n, 0.0);
    lp.lo.resize(lp.n);
    lp.hi.resize(lp.n);
    for (int j = 0; j < lp.n; ++j) {
        lp.lo[j] = m.vars()[j].lo;
        lp.hi[j] = m.vars()[j].hi;
    }
    double sgn = (m.sense() == Sense::Min) ? 1.0 : -1.0;
    for (const auto& [id, c] : m.objective().terms()) lp.cost[id] = sgn * c;
    lp.c0 = sgn * m.objective().constant();
    for (const auto& c : m.constraints()) {
        LpModel::Row row;
        row.coeffs.assign(c.expr.terms().begin(), c.expr.terms().end());
        row.op = c.op;
        row.rhs = c.rhs;
        lp.rows.push_back(std::move(row));
    }
    return lp;
}

}  // namespace detail

class EmbeddedBackend final : public SolverBackend {
  public:
    std::string name() const override { return "builtin"; }

    RawSolution solve(const ModelIR& m, const SolveOptions& opts) override {
        auto t0 = std::chrono::steady_clock::now();
        LpModel base = detail::to_lp(m);
        std::vector<int> binaries;
        for (int j = 0; j < base.n; ++j)
            if (m.vars()[j].kind == VarKind::Binary) binaries.push_back(j);

        double sgn = (m.sense() == Sense::Min) ? 1.0 : -1.0;
        RawSolution out;

        struct Node {
            std::vector<double> lo, hi;
            double bound;
            long id;
        };
        struct NodeCmp {
            bool operator()(const Node& a, const Node& b) const {
                return a.bound > b.bound || (a.bound == b.bound && a.id > b.id);
            }
        };
        std::priority_queue<Node, std::vector<Node>, NodeCmp> open;
        long next_id = 0;
        open.push(Node{base.lo, base.hi, -kInf, next_id++});

        bool have_incumbent = false;
        std::vector<double> best_x;
        double best_obj = kInf;
        bool any_unbounded = false, any_error = false;
        long nodes = 0;
        double global_lb = -kInf;

        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };
        bool hit_limit = false;

        while (!open.empty()) {
            if (nodes >= opts.max_nodes || elapsed() > opts.time_limit_s) {
                hit_limit = true;
                break;
            }
            Node node = open.top();
            open.pop();
            global_lb = node.bound;
            if (have_incumbent && node.bound >= best_obj - prune_eps(best_obj, opts)) break;
            ++nodes;

            LpModel lp = base;
            lp.lo = node.lo;
            lp.hi = node.hi;
            SimplexSolver solver;
            LpResult res = solver.solve(lp);
            if (res.status == SolveStatus::Infeasible) continue;
            if (res.status == SolveStatus::Unbounded) {
                any_unbounded = true;
                break;
            }
            if (res.status != SolveStatus::Optimal) {
                any_error = true;
                continue;
            }
            if (have_incumbent && res.obj >= best_obj - prune_eps(best_obj, opts)) continue;

            // most fractional binary
            int frac_var = -1;
            double frac_best = opts.int_tol;
            for (int j : binaries) {
                double f = std::abs(res.x[j] - std::round(res.x[j]));
                if (f > frac_best) {
                    frac_best = f;
                    frac_var = j;
                }
            }
            // most violated SOS1 group: two largest magnitudes both above tol
            int viol_group = -1;
            double viol_best = opts.int_tol;
            {
                int gi = 0;
                for (const auto& g : m.sos1_groups()) {
                    double m1 = 0.0, m2 = 0.0;
                    for (VarRef v : g.members) {
                        double a = std::abs(res.x[v.id]);
                        if (a > m1) {
                            m2 = m1;
                            m1 = a;
                        } else if (a > m2) {
                            m2 = a;
                        }
                    }
                    if (m2 > viol_best) {
                        viol_best = m2;
                        viol_group = gi;
                    }
                    ++gi;
                }
            }

            if (frac_var < 0 && viol_group < 0) {
                // integral and complementary: candidate incumbent
                if (res.obj < best_obj) {
                    best_obj = res.obj;
                    best_x = res.x;
                    have_incumbent = true;
                }
                continue;
            }
            if (frac_var >= 0) {
                Node down = node, up = node;
                down.hi[frac_var] = 0.0;
                down.bound = res.obj;
                down.id = next_id++;
                up.lo[frac_var] = 1.0;
                up.bound = res.obj;
                up.id = next_id++;
                open.push(std::move(down));
                open.push(std::move(up));
            } else {
                const auto& g = m.sos1_groups()[static_cast<size_t>(viol_group)];
                size_t half = g.members.size() / 2;
                Node a = node, b = node;
                for (size_t k = 0; k < g.members.size(); ++k) {
                    int j = g.members[k].id;
                    Node& tgt = (k < half) ? a : b;
                    tgt.lo[j] = 0.0;
                    tgt.hi[j] = 0.0;
                }
                a.bound = b.bound = res.obj;
                a.id = next_id++;
                b.id = next_id++;
                open.push(std::move(a));
                open.push(std::move(b));
            }
        }

        double lb = open.empty() && !hit_limit ? best_obj : global_lb;
        if (have_incumbent) {
            out.values = best_x;
            out.objective = sgn * best_obj;
            double denom = std::max(1.0, std::abs(best_obj));
            double gap = std::max(0.0, (best_obj - lb) / denom);
            out.gap = (open.empty() && !hit_limit) ? 0.0 : gap;
            if (hit_limit && out.gap > opts.rel_gap &&
                best_obj - lb > opts.abs_gap)
                out.status = SolveStatus::Limit;
            else
                out.status = (out.gap <= 1e-12) ? SolveStatus::Optimal : SolveStatus::GapOptimal;
        } else if (any_unbounded) {
            out.status = SolveStatus::Unbounded;
        } else if (hit_limit) {
            out.status = SolveStatus::Limit;
        } else if (any_error) {
            out.status = SolveStatus::Error;
        } else {
            out.status = SolveStatus::Infeasible;
        }
        out.wall_time_s = elapsed();
        return out;
    }

  private:
    static double prune_eps(double incumbent, const SolveOptions& opts) {
        // allow gap-based pruning: nodes within the gap target of the
        // incumbent are cut
        return std::max({1e-9, opts.rel_gap * std::max(1.0, std::abs(incumbent)),
                         opts.abs_gap});
    }
};

class ScipyBackend final : public SolverBackend {
  public:
    std::string name() const override { return "scipy"; }

    static bool available() {
        static int cached = -1;
        static std::mutex mu;
        std::lock_guard<std::mutex> lk(mu);
        if (cached < 0)
            cached = std::system("python3 -c 'import scipy.optimize' >/dev/null 2>&1") == 0 ? 1 : 0;
        return cached == 1;
    }

    RawSolution solve(const ModelIR& m, const SolveOptions& opts) override {
        if (!available()) throw ModelError("scipy backend unavailable (python3/scipy not found)");
        // members whose emulation bound is artificial (no finite bound of
        // their own); a solution touching that bound triggers a re-solve
        // with the bound widened
        std::vector<int> artificial;
        for (const auto& g : m.sos1_groups())
            for (VarRef v : g.members)
                if (!std::isfinite(m.var(v).hi) || !std::isfinite(m.var(v).lo))
                    artificial.push_back(v.id);
        SolveOptions cur = opts;
        for (int round = 0;; ++round) {
            RawSolution out = solve_once(m, cur);
            bool binding = false;
            if (out.usable()) {
                for (int id : artificial)
                    if (std::abs(out.values[static_cast<size_t>(id)]) >= 0.999 * cur.sos1_big_m)
                        binding = true;
            } else if (out.status == SolveStatus::Infeasible && !artificial.empty()) {
                binding = true;  // the artificial bound itself may be the cause
            }
            if (!binding || round >= 3) return out;
            cur.sos1_big_m *= 32.0;
        }
    }

  private:
    RawSolution solve_once(const ModelIR& m, const SolveOptions& opts) {
        auto t0 = std::chrono::steady_clock::now();
        nlohmann::json spec = encode(m, opts);

        namespace fs = std::filesystem;
        static std::atomic<long> counter{0};
        std::string stem = "gridpact_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
        fs::path dir = fs::temp_directory_path();
        fs::path in = dir / (stem + "_in.json");
        fs::path outp = dir / (stem + "_out.json");
        {
            std::ofstream os(in);
            os << spec;
        }
        std::string cmd = "python3 " + runner_path() + " " + in.string() + " " + outp.string() +
                          " >/dev/null 2>&1";
        int rc = std::system(cmd.c_str());
        RawSolution out;
        out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (rc != 0 || !fs::exists(outp)) {
            fs::remove(in);
            out.status = SolveStatus::Error;
            return out;
        }
        nlohmann::json res;
        {
            std::ifstream is(outp);
            is >> res;
        }
        fs::remove(in);
        fs::remove(outp);

        std::string st = res.value("status", "error");
        if (st == "optimal") out.status = SolveStatus::Optimal;
        else if (st == "gap-optimal") out.status = SolveStatus::GapOptimal;
        else if (st == "infeasible") out.status = SolveStatus::Infeasible;
        else if (st == "unbounded") out.status = SolveStatus::Unbounded;
        else if (st == "limit") out.status = SolveStatus::Limit;
        else out.status = SolveStatus::Error;
        out.gap = res.value("gap", 0.0);
        out.objective = res.value("obj", 0.0);
        if (res.contains("x") && res["x"].is_array()) {
            out.values.reserve(m.num_vars());
            for (const auto& v : res["x"]) out.values.push_back(v.get<double>());
            out.values.resize(m.num_vars(), 0.0);  // emulation binaries dropped
        }
        return out;
    }

  private:
    nlohmann::json encode(const ModelIR& m, const SolveOptions& opts) const {
        // SOS1 emulation: member_k in [0, U_k * z_k], sum z_k <= 1.
        int n = static_cast<int>(m.num_vars());
        std::vector<double> c(n, 0.0), lo(n), hi(n);
        std::vector<int> integ(n, 0);
        for (int j = 0; j < n; ++j) {
            lo[j] = m.vars()[j].lo;
            hi[j] = m.vars()[j].hi;
            integ[j] = m.vars()[j].kind == VarKind::Binary ? 1 : 0;
        }
        for (const auto& [id, v] : m.objective().terms()) c[id] = v;

        nlohmann::json coo = nlohmann::json::array();
        std::vector<nlohmann::json> rlb, rub;
        int row = 0;
        auto push_row = [&](const std::vector<std::pair<int, double>>& coeffs, double lb, double ub) {
            for (auto [j, a] : coeffs) coo.push_back({row, j, a});
            rlb.push_back(std::isinf(lb) ? nlohmann::json() : nlohmann::json(lb));
            rub.push_back(std::isinf(ub) ? nlohmann::json() : nlohmann::json(ub));
            ++row;
        };
        for (const auto& con : m.constraints()) {
            std::vector<std::pair<int, double>> coeffs(con.expr.terms().begin(), con.expr.terms().end());
            double lb = -kInf, ub = kInf;
            if (con.op == RelOp::LE) ub = con.rhs;
            else if (con.op == RelOp::GE) lb = con.rhs;
            else lb = ub = con.rhs;
            push_row(coeffs, lb, ub);
        }
        for (const auto& g : m.sos1_groups()) {
            std::vector<std::pair<int, double>> sum;
            for (VarRef v : g.members) {
                int z = n++;
                c.push_back(0.0);
                lo.push_back(0.0);
                hi.push_back(1.0);
                integ.push_back(1);
                const auto& vi = m.var(v);
                double up = std::isfinite(vi.hi) ? vi.hi : opts.sos1_big_m;
                double dn = std::isfinite(vi.lo) ? vi.lo : -opts.sos1_big_m;
                push_row({{v.id, 1.0}, {z, -up}}, -kInf, 0.0);  // x <= U z
                if (dn < 0.0) push_row({{v.id, 1.0}, {z, -dn}}, 0.0, kInf);  // x >= L z
                sum.emplace_back(z, 1.0);
            }
            push_row(sum, -kInf, 1.0);
        }

        nlohmann::json spec;
        spec["sense"] = m.sense() == Sense::Min ? 1 : -1;
        spec["c"] = c;
        spec["c0"] = m.objective().constant();
        spec["lo"] = nlohmann::json::array();
        spec["hi"] = nlohmann::json::array();
        for (double v : lo) spec["lo"].push_back(std::isinf(v) ? nlohmann::json() : nlohmann::json(v));
        for (double v : hi) spec["hi"].push_back(std::isinf(v) ? nlohmann::json() : nlohmann::json(v));
        spec["integrality"] = integ;
        spec["rows"] = {{"coo", coo}, {"lb", rlb}, {"ub", rub}};
        spec["n_report"] = m.num_vars();
        spec["options"] = {{"mip_rel_gap", opts.rel_gap}, {"time_limit", opts.time_limit_s}};
        if (opts.abs_gap > 0.0) spec["options"]["mip_abs_gap"] = opts.abs_gap;
        return spec;
    }

    static const std::string& runner_path() {
        static std::string path = [] {
            namespace fs = std::filesystem;
            fs::path p = fs::temp_directory_path() /
                         ("gridpact_runner_" + std::to_string(::getpid()) + ".py");
            std::ofstream os(p);
            os << runner_source();
            return p.string();
        }();
        return path;
    }

    static const char* runner_source() {
        return R"PY(
import json, sys
import numpy as np
from scipy import sparse
from scipy.optimize import milp, LinearConstraint, Bounds

def num(v, default):
    return default if v is None else float(v)

def main():
    spec = json.load(open(sys.argv[1]))
    n = len(spec["c"])
    sgn = 1.0 if spec["sense"] > 0 else -1.0
    c = sgn * np.asarray(spec["c"], dtype=float)
    lo = np.array([num(v, -np.inf) for v in spec["lo"]])
    hi = np.array([num(v, np.inf) for v in spec["hi"]])
    integ = np.asarray(spec["integrality"], dtype=int)
    cons = []
    coo = spec["rows"]["coo"]
    if coo:
        arr = np.asarray(coo, dtype=float)
        nrows = len(spec["rows"]["lb"])
        A = sparse.csr_matrix((arr[:, 2], (arr[:, 0].astype(int), arr[:, 1].astype(int))),
                              shape=(nrows, n))
        rlb = np.array([num(v, -np.inf) for v in spec["rows"]["lb"]])
        rub = np.array([num(v, np.inf) for v in spec["rows"]["ub"]])
        cons = [LinearConstraint(A, rlb, rub)]
    opts = spec.get("options", {})
    hopts = {"mip_rel_gap": opts.get("mip_rel_gap", 1e-3),
             "time_limit": opts.get("time_limit", 600),
             "disp": False}
    if "mip_abs_gap" in opts:
        hopts["mip_abs_gap"] = opts["mip_abs_gap"]  # forwarded to HiGHS
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = milp(c, constraints=cons, integrality=integ, bounds=Bounds(lo, hi),
                   options=hopts)
    out = {}
    has_x = res.x is not None
    gap = float(getattr(res, "mip_gap", 0.0) or 0.0)
    bound = getattr(res, "mip_dual_bound", None)
    agap = np.inf
    if has_x and bound is not None and np.isfinite(bound):
        agap = abs(float(res.fun) - float(bound))
    if not np.isfinite(gap):
        # relative gap is undefined at a zero-valued incumbent; report the
        # absolute bound distance over the 1+|obj| convention instead
        gap = agap / max(1.0, abs(float(res.fun))) if np.isfinite(agap) else 1e30
    if res.status == 0:
        out["status"] = "optimal" if gap <= 1e-9 else "gap-optimal"
    elif res.status == 1:
        # time/iteration limit; an incumbent already inside the gap target is
        # as good as a converged run
        if has_x and (gap <= opts.get("mip_rel_gap", 1e-3) + 1e-12
                      or agap <= opts.get("mip_abs_gap", 0.0) + 1e-12):
            out["status"] = "gap-optimal"
        else:
            out["status"] = "limit"
    elif res.status == 2:
        out["status"] = "infeasible"
    elif res.status == 3:
        out["status"] = "unbounded"
    else:
        out["status"] = "error"
    if has_x:
        nrep = spec.get("n_report", n)
        out["x"] = [float(v) if np.isfinite(v) else 0.0 for v in res.x[:nrep]]
        obj = float(sgn * res.fun + spec.get("c0", 0.0) * 1.0)
        out["obj"] = obj if np.isfinite(obj) else 0.0
        out["gap"] = gap
    json.dump(out, open(sys.argv[2], "w"))

main()
)PY";
    }
};

inline std::unique_ptr<SolverBackend> make_backend(const std::string& name) {
    if (name.empty() || name == "builtin") return std::make_unique<EmbeddedBackend>();
    if (name == "scipy") return std::make_unique<ScipyBackend>();
    throw ModelError("unknown solver backend: " + name);
}

/// Solve entry point for the IR contract: requires an objective, validates
/// returned values against variable bounds (1e-6 tolerance).
inline RawSolution solve(const ModelIR& m, SolverBackend& backend, const SolveOptions& opts = {}) {
    if (!m.has_objective()) throw ModelError("solve: model has no objective");
    RawSolution sol = backend.solve(m, opts);
    if (sol.usable()) {
        for (size_t j = 0; j < m.num_vars(); ++j) {
            const auto& v = m.vars()[j];
            if (sol.values[j] < v.lo - 1e-6 || sol.values[j] > v.hi + 1e-6)
                throw ModelError("solver returned out-of-bounds value for " + v.name);
        }
        if (sol.status == SolveStatus::GapOptimal && sol.gap > opts.rel_gap + 1e-12 &&
            sol.gap * std::max(1.0, std::abs(sol.objective)) > opts.abs_gap + 1e-12)
            sol.status = SolveStatus::Limit;
    }
    return sol;
}

}  // namespace gridpact

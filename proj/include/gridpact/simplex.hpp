// Embedded LP engine: dense bounded-variable two-phase primal simplex with
// an explicitly maintained basis inverse. Sized for desk-scale models (a few
// hundred rows); year-scale models go through an external backend.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gridpact/model.hpp"

namespace gridpact {

/// Plain LP in row form, always a minimization internally.
struct LpModel {
    int n = 0;                       // structural variables
    std::vector<double> cost;        // size n
    std::vector<double> lo, hi;      // size n
    double c0 = 0.0;                 // objective constant
    struct Row {
        std::vector<std::pair<int, double>> coeffs;
        RelOp op = RelOp::LE;
        double rhs = 0.0;
    };
    std::vector<Row> rows;
};

struct LpResult {
    SolveStatus status = SolveStatus::Error;
    std::vector<double> x;  // structural values, size n
    double obj = 0.0;
};

class SimplexSolver {
  public:
    explicit SimplexSolver(int max_iters = 50000) : max_iters_(max_iters) {}

    LpResult solve(const LpModel& lp) {
        init(lp);
        // Phase 1: minimize total infeasibility via artificials.
        if (num_art_ > 0) {
            std::vector<double> phase1_cost(cols_, 0.0);
            for (int j = first_art_; j < cols_; ++j) phase1_cost[j] = 1.0;
            SolveStatus st = iterate(phase1_cost, /*phase1=*/true);
            if (st == SolveStatus::Error) return {SolveStatus::Error, {}, 0.0};
            double infeas = 0.0;
            for (int i = 0; i < m_; ++i)
                if (basis_[i] >= first_art_) infeas += std::abs(xb_[i]);
            if (infeas > 1e-7 * (1.0 + rhs_scale_)) return {SolveStatus::Infeasible, {}, 0.0};
            drive_out_artificials();
            for (int j = first_art_; j < cols_; ++j) {
                lo_[j] = hi_[j] = 0.0;
                if (status_[j] != kBasic) {
                    status_[j] = kAtLo;
                    val_[j] = 0.0;
                }
            }
        }
        // Phase 2.
        std::vector<double> cost(cols_, 0.0);
        for (int j = 0; j < lp.n; ++j) cost[j] = lp.cost[j];
        SolveStatus st = iterate(cost, /*phase1=*/false);
        if (st != SolveStatus::Optimal) return {st, {}, 0.0};
        LpResult res;
        res.status = SolveStatus::Optimal;
        res.x.resize(lp.n);
        sync_values();
        double obj = lp.c0;
        for (int j = 0; j < lp.n; ++j) {
            double v = val_[j];
            v = std::min(std::max(v, lo_[j]), hi_[j]);  // clamp roundoff
            res.x[j] = v;
            obj += lp.cost[j] * v;
        }
        res.obj = obj;
        return res;
    }

  private:
    static constexpr int8_t kAtLo = 0, kAtUp = 1, kFree = 2, kBasic = 3;
    static constexpr double kEps = 1e-9;
    static constexpr double kPivTol = 1e-8;

    void init(const LpModel& lp) {
        m_ = static_cast<int>(lp.rows.size());
        n_ = lp.n;
        first_slack_ = n_;
        cols_ = n_ + m_;
        col_.assign(cols_, std::vector<double>(m_, 0.0));
        lo_.assign(cols_, 0.0);
        hi_.assign(cols_, kInf);
        b_.assign(m_, 0.0);
        rhs_scale_ = 0.0;
        for (int j = 0; j < n_; ++j) {
            lo_[j] = lp.lo[j];
            hi_[j] = lp.hi[j];
        }
        for (int i = 0; i < m_; ++i) {
            for (auto [j, a] : lp.rows[i].coeffs) col_[j][i] += a;
            b_[i] = lp.rows[i].rhs;
            rhs_scale_ = std::max(rhs_scale_, std::abs(b_[i]));
            int s = first_slack_ + i;
            col_[s][i] = 1.0;
            switch (lp.rows[i].op) {
                case RelOp::LE: lo_[s] = 0.0; hi_[s] = kInf; break;
                case RelOp::GE: lo_[s] = -kInf; hi_[s] = 0.0; break;
                case RelOp::EQ: lo_[s] = 0.0; hi_[s] = 0.0; break;
            }
        }
        // Nonbasic start: every column at its bound nearest zero.
        status_.assign(cols_, kAtLo);
        val_.assign(cols_, 0.0);
        for (int j = 0; j < cols_; ++j) set_nonbasic_start(j);
        // Slack basis; rows whose slack value violates its bounds get an artificial.
        basis_.assign(m_, -1);
        in_basis_.assign(cols_, false);
        xb_.assign(m_, 0.0);
        first_art_ = cols_;
        num_art_ = 0;
        std::vector<double> act(m_, 0.0);
        for (int j = 0; j < cols_; ++j)
            if (val_[j] != 0.0)
                for (int i = 0; i < m_; ++i) act[i] += col_[j][i] * val_[j];
        for (int i = 0; i < m_; ++i) {
            int s = first_slack_ + i;
            double resid = b_[i] - (act[i] - col_[s][i] * val_[s]);  // value slack must take
            if (resid >= lo_[s] - kEps && resid <= hi_[s] + kEps) {
                basis_[i] = s;
                in_basis_[s] = true;
                status_[s] = kBasic;
                xb_[i] = resid;
            } else {
                // pin slack at nearest bound, cover the rest with an artificial
                double sval = (resid < lo_[s]) ? lo_[s] : hi_[s];
                val_[s] = sval;
                status_[s] = (sval == lo_[s]) ? kAtLo : kAtUp;
                double r = resid - sval;
                std::vector<double> ac(m_, 0.0);
                ac[i] = (r >= 0) ? 1.0 : -1.0;
                col_.push_back(std::move(ac));
                lo_.push_back(0.0);
                hi_.push_back(kInf);
                status_.push_back(kBasic);
                val_.push_back(std::abs(r));
                in_basis_.push_back(true);
                int aj = cols_ + num_art_;
                basis_[i] = aj;
                xb_[i] = std::abs(r);
                ++num_art_;
            }
        }
        first_art_ = cols_;
        cols_ += num_art_;
        binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
        refactorize();
    }

    void set_nonbasic_start(int j) {
        if (lo_[j] == -kInf && hi_[j] == kInf) {
            status_[j] = kFree;
            val_[j] = 0.0;
        } else if (lo_[j] == -kInf || (hi_[j] != kInf && std::abs(hi_[j]) < std::abs(lo_[j]))) {
            status_[j] = kAtUp;
            val_[j] = hi_[j];
        } else {
            status_[j] = kAtLo;
            val_[j] = lo_[j];
        }
    }

    double& binv(int i, int k) { return binv_[static_cast<size_t>(i) * m_ + k]; }

    bool refactorize() {
        // Gauss-Jordan inversion of the basis matrix with partial pivoting.
        std::vector<double> M(static_cast<size_t>(m_) * m_, 0.0);
        for (int k = 0; k < m_; ++k)
            for (int i = 0; i < m_; ++i) M[static_cast<size_t>(i) * m_ + k] = col_[basis_[k]][i];
        std::fill(binv_.begin(), binv_.end(), 0.0);
        for (int i = 0; i < m_; ++i) binv(i, i) = 1.0;
        for (int p = 0; p < m_; ++p) {
            int piv = p;
            double best = std::abs(M[static_cast<size_t>(p) * m_ + p]);
            for (int i = p + 1; i < m_; ++i) {
                double a = std::abs(M[static_cast<size_t>(i) * m_ + p]);
                if (a > best) {
                    best = a;
                    piv = i;
                }
            }
            if (best < 1e-12) return false;
            if (piv != p) {
                for (int k = 0; k < m_; ++k) {
                    std::swap(M[static_cast<size_t>(piv) * m_ + k], M[static_cast<size_t>(p) * m_ + k]);
                    std::swap(binv(piv, k), binv(p, k));
                }
            }
            double d = M[static_cast<size_t>(p) * m_ + p];
            for (int k = 0; k < m_; ++k) {
                M[static_cast<size_t>(p) * m_ + k] /= d;
                binv(p, k) /= d;
            }
            for (int i = 0; i < m_; ++i) {
                if (i == p) continue;
                double f = M[static_cast<size_t>(i) * m_ + p];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) {
                    M[static_cast<size_t>(i) * m_ + k] -= f * M[static_cast<size_t>(p) * m_ + k];
                    binv(i, k) -= f * binv(p, k);
                }
            }
        }
        recompute_xb();
        return true;
    }

    void recompute_xb() {
        // xB = B^-1 (b - N xN)
        std::vector<double> r(b_);
        for (int j = 0; j < cols_; ++j) {
            if (in_basis_[j] || val_[j] == 0.0) continue;
            for (int i = 0; i < m_; ++i) r[i] -= col_[j][i] * val_[j];
        }
        for (int i = 0; i < m_; ++i) {
            double v = 0.0;
            for (int k = 0; k < m_; ++k) v += binv(i, k) * r[k];
            xb_[i] = v;
        }
    }

    void sync_values() {
        for (int i = 0; i < m_; ++i) val_[basis_[i]] = xb_[i];
    }

    SolveStatus iterate(const std::vector<double>& cost, bool phase1) {
        int degen_run = 0;
        bool bland = false;
        int since_refactor = 0;
        std::vector<double> y(m_), w(m_);
        for (int iter = 0; iter < max_iters_; ++iter) {
            // y = cB' B^-1
            for (int k = 0; k < m_; ++k) {
                double v = 0.0;
                for (int i = 0; i < m_; ++i) {
                    double cb = cost_of(cost, basis_[i]);
                    if (cb != 0.0) v += cb * binv(i, k);
                }
                y[k] = v;
            }
            // pricing
            int enter = -1, dir = 0;
            double best = bland ? 0.0 : kEps * 10;
            for (int j = 0; j < cols_; ++j) {
                if (in_basis_[j]) continue;
                if (lo_[j] == hi_[j]) continue;  // fixed
                double d = cost_of(cost, j);
                const auto& aj = col_[j];
                for (int i = 0; i < m_; ++i)
                    if (aj[i] != 0.0) d -= y[i] * aj[i];
                int cand_dir = 0;
                if (status_[j] == kAtLo && d < -kEps) cand_dir = +1;
                else if (status_[j] == kAtUp && d > kEps) cand_dir = -1;
                else if (status_[j] == kFree && std::abs(d) > kEps) cand_dir = d < 0 ? +1 : -1;
                if (!cand_dir) continue;
                if (bland) {
                    enter = j;
                    dir = cand_dir;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    enter = j;
                    dir = cand_dir;
                }
            }
            if (enter < 0) return SolveStatus::Optimal;

            // w = B^-1 a_enter
            const auto& ae = col_[enter];
            for (int i = 0; i < m_; ++i) {
                double v = 0.0;
                for (int k = 0; k < m_; ++k)
                    if (ae[k] != 0.0) v += binv(i, k) * ae[k];
                w[i] = v;
            }
            // ratio test; entering moves by t*dir from its current value
            double tmax = kInf;
            int leave = -1;       // basis position
            int leave_to = kAtLo; // bound the leaving variable hits
            double own_range = (lo_[enter] == -kInf || hi_[enter] == kInf) ? kInf : hi_[enter] - lo_[enter];
            if (own_range < tmax) tmax = own_range;
            for (int i = 0; i < m_; ++i) {
                double delta = -dir * w[i];  // change of xb_i per unit t
                if (delta > kPivTol) {
                    double cap = hi_[basis_[i]];
                    if (cap == kInf) continue;
                    double t = (cap - xb_[i]) / delta;
                    if (t < tmax - 1e-12 || (std::abs(t - tmax) <= 1e-12 && (leave < 0 || basis_[i] < basis_[leave]))) {
                        tmax = std::max(t, 0.0);
                        leave = i;
                        leave_to = kAtUp;
                    }
                } else if (delta < -kPivTol) {
                    double cap = lo_[basis_[i]];
                    if (cap == -kInf) continue;
                    double t = (cap - xb_[i]) / delta;
                    if (t < tmax - 1e-12 || (std::abs(t - tmax) <= 1e-12 && (leave < 0 || basis_[i] < basis_[leave]))) {
                        tmax = std::max(t, 0.0);
                        leave = i;
                        leave_to = kAtLo;
                    }
                }
            }
            if (tmax == kInf) return phase1 ? SolveStatus::Error : SolveStatus::Unbounded;

            if (tmax < 1e-11) {
                if (++degen_run > 200) bland = true;
            } else {
                degen_run = 0;
            }

            // apply step
            for (int i = 0; i < m_; ++i) xb_[i] -= tmax * dir * w[i];
            double enter_val = val_[enter] + tmax * dir;
            if (leave < 0) {
                // bound flip, no basis change
                val_[enter] = enter_val;
                status_[enter] = (dir > 0) ? kAtUp : kAtLo;
                continue;
            }
            int out = basis_[leave];
            double pivot = w[leave];
            if (std::abs(pivot) < kPivTol) {
                if (!refactorize()) return SolveStatus::Error;
                continue;
            }
            in_basis_[out] = false;
            status_[out] = leave_to;
            val_[out] = (leave_to == kAtUp) ? hi_[out] : lo_[out];
            basis_[leave] = enter;
            in_basis_[enter] = true;
            status_[enter] = kBasic;
            xb_[leave] = enter_val;
            // rank-1 update of B^-1
            for (int k = 0; k < m_; ++k) binv(leave, k) /= pivot;
            for (int i = 0; i < m_; ++i) {
                if (i == leave) continue;
                double f = w[i];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) binv(i, k) -= f * binv(leave, k);
            }
            if (++since_refactor >= 64) {
                if (!refactorize()) return SolveStatus::Error;
                since_refactor = 0;
            }
        }
        return SolveStatus::Limit;
    }

    static double cost_of(const std::vector<double>& cost, int j) {
        return j < static_cast<int>(cost.size()) ? cost[j] : 0.0;
    }

    void drive_out_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < first_art_) continue;
            // try to replace the basic artificial by any regular column
            int repl = -1;
            for (int j = 0; j < first_art_ && repl < 0; ++j) {
                if (in_basis_[j] || lo_[j] == hi_[j]) continue;
                double v = 0.0;
                for (int k = 0; k < m_; ++k)
                    if (col_[j][k] != 0.0) v += binv(i, k) * col_[j][k];
                if (std::abs(v) > 1e-7) repl = j;
            }
            if (repl < 0) continue;  // redundant row; artificial stays fixed at 0
            std::vector<double> w(m_);
            for (int r = 0; r < m_; ++r) {
                double v = 0.0;
                for (int k = 0; k < m_; ++k)
                    if (col_[repl][k] != 0.0) v += binv(r, k) * col_[repl][k];
                w[r] = v;
            }
            double pivot = w[i];
            int out = basis_[i];
            in_basis_[out] = false;
            status_[out] = kAtLo;
            val_[out] = 0.0;
            basis_[i] = repl;
            in_basis_[repl] = true;
            status_[repl] = kBasic;
            xb_[i] = val_[repl];  // degenerate swap at zero level
            for (int k = 0; k < m_; ++k) binv(i, k) /= pivot;
            for (int r = 0; r < m_; ++r) {
                if (r == i) continue;
                double f = w[r];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) binv(r, k) -= f * binv(i, k);
            }
            recompute_xb();
        }
    }

    int max_iters_;
    int m_ = 0, n_ = 0, cols_ = 0, first_slack_ = 0, first_art_ = 0, num_art_ = 0;
    double rhs_scale_ = 0.0;
    std::vector<std::vector<double>> col_;
    std::vector<double> lo_, hi_, b_, val_, xb_, binv_;
    std::vector<int8_t> status_;
    std::vector<int> basis_;
    std::vector<bool> in_basis_;
};

}  // namespace gridpact

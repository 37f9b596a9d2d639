// Parameter sweeps over scenario clones: axis overrides, parallel execution
// with deterministic row order, and switch-point detection on the results.
#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <thread>

#include "gridpact/data_io.hpp"
#include "gridpact/games.hpp"

namespace gridpact {

enum class SweepAxis { CrcPlusPrice, H2Price, Theta };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::CrcPlusPrice: return "crc_plus_price";
        case SweepAxis::H2Price: return "h2_price";
        default: return "theta";
    }
}

inline SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "crc_plus_price") return SweepAxis::CrcPlusPrice;
    if (s == "h2_price") return SweepAxis::H2Price;
    if (s == "theta") return SweepAxis::Theta;
    throw InvalidParameter("unknown sweep axis: " + s +
                           " (expected crc_plus_price, h2_price or theta)");
}

/// Clone of `base` with the axis parameter overridden, re-validated so axis
/// values that break an invariant (e.g. theta > 1) fail loudly per point.
inline ScenarioData apply_axis(ScenarioData base, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::CrcPlusPrice: base.prices.crc_plus_eur_per_mw = value; break;
        case SweepAxis::H2Price: base.prices.hydrogen_eur_per_kg = value; break;
        case SweepAxis::Theta: base.budgets.theta = value; break;
    }
    return validate_scenario(base);
}

struct SweepPlan {
    SweepAxis axis = SweepAxis::CrcPlusPrice;
    std::vector<double> values;   // strictly increasing
    std::vector<GameCase> cases;  // solved per value, row order is case-major
};

/// Evenly spaced inclusive range helper for plan construction.
inline std::vector<double> sweep_range(double from, double to, double step) {
    if (step <= 0.0) throw InvalidParameter("sweep range: step must be > 0");
    if (to < from) throw InvalidParameter("sweep range: to must be >= from");
    std::vector<double> v;
    for (int i = 0;; ++i) {
        double x = from + i * step;
        if (x > to + 1e-9 * (1.0 + std::abs(to))) break;
        v.push_back(std::min(x, to));
    }
    return v;
}

struct SweepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Runs |cases| x |values| solves on a worker pool. Per-point failures
/// (infeasibility, solver errors) are retained as rows with their status;
/// only an all-failed sweep is an error. Row order is deterministic and
/// independent of the worker count.
inline std::vector<ResultRow> run_sweep(const ScenarioData& base, const SweepPlan& plan,
                                        const CaseOptions& options = {}, int jobs = 1) {
    if (plan.values.empty()) throw InvalidParameter("sweep: no values");
    if (plan.cases.empty()) throw InvalidParameter("sweep: no cases");
    for (size_t i = 1; i < plan.values.size(); ++i)
        if (!(plan.values[i] > plan.values[i - 1]))
            throw InvalidParameter("sweep: values must be strictly increasing");
    if (jobs < 1) throw InvalidParameter("sweep: jobs must be >= 1");

    struct Task {
        GameCase game;
        double value;
    };
    std::vector<Task> tasks;
    for (GameCase g : plan.cases)
        for (double v : plan.values) tasks.push_back({g, v});

    std::vector<ResultRow> rows(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            ResultRow& r = rows[i];
            r.case_label = to_string(tasks[i].game);
            r.sweep_param = to_string(plan.axis);
            r.sweep_value = tasks[i].value;
            try {
                ScenarioData sc = apply_axis(base, plan.axis, tasks[i].value);
                auto b = solve_case(sc, tasks[i].game, options);
                r = to_result_row(b, to_string(plan.axis), tasks[i].value);
            } catch (const std::exception&) {
                r.status = "error";
            }
        }
    };
    if (jobs == 1 || tasks.size() == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        int n = std::min<int>(jobs, static_cast<int>(tasks.size()));
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    bool any_ok = false;
    for (const auto& r : rows)
        any_ok |= (r.status == "optimal" || r.status == "gap-optimal");
    if (!any_ok) throw SweepError("sweep: every point failed");
    return rows;
}

/// Numeric field accessor by column name (solve outputs only).
inline double result_field(const ResultRow& r, const std::string& field) {
    if (field == "p_grid") return r.p_grid;
    if (field == "p_el_fa") return r.p_el_fa;
    if (field == "p_el_nfa85") return r.p_el_nfa85;
    if (field == "p_el_nfa") return r.p_el_nfa;
    if (field == "ely_profit") return r.ely_profit;
    if (field == "no_profit") return r.no_profit;
    if (field == "gap") return r.gap;
    throw InvalidParameter("unknown result field: " + field);
}

/// First sweep value (ascending) of `case_label` whose usable row satisfies
/// the predicate on `field`; nullopt when no row does.
inline std::optional<double> find_switch(const std::vector<ResultRow>& rows,
                                         const std::string& case_label, const std::string& field,
                                         const std::function<bool(double)>& predicate) {
    std::vector<const ResultRow*> mine;
    for (const auto& r : rows)
        if (r.case_label == case_label &&
            (r.status == "optimal" || r.status == "gap-optimal"))
            mine.push_back(&r);
    std::stable_sort(mine.begin(), mine.end(),
                     [](const ResultRow* a, const ResultRow* b) { return a->sweep_value < b->sweep_value; });
    for (const ResultRow* r : mine)
        if (predicate(result_field(*r, field))) return r->sweep_value;
    return std::nullopt;
}

}  // namespace gridpact

#include "bundletrade/offline.hpp"

#include <algorithm>
#include <string>

namespace bundletrade {

std::string_view to_string(OfflineMethod method) {
    return method == OfflineMethod::Simplex ? "simplex" : "brute_force";
}

PrimalLP build_lp(const Instance& inst, Augmentation augmentation, std::size_t max_vars) {
    require_valid(inst);
    const std::size_t n = inst.catalog.size();
    const std::size_t T = inst.events.size();
    std::size_t bundles = 0;
    for (const Event& ev : inst.events) bundles += ev.menu.size();
    const std::size_t total = bundles + n * (T + 1);
    if (total > max_vars)
        throw std::length_error("offline LP needs " + std::to_string(total) + " variables, cap is " +
                                std::to_string(max_vars));

    PrimalLP out;
    out.augmentation = augmentation;
    LPProblem& lp = out.lp;
    const double up = 1.0 + inst.eps;
    out.bundle_col.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        const Event& ev = inst.events[t];
        for (const Bundle& b : ev.menu) {
            double c;
            if (ev.kind == EventKind::Customer)
                c = augmentation == Augmentation::Suppliers ? b.value : b.value / up;
            else
                c = augmentation == Augmentation::Suppliers ? -up * b.value : -b.value;
            out.bundle_col[t].push_back(lp.add_var(c));
        }
    }
    out.rbar_col.assign(T + 1, std::vector<std::size_t>(n));
    for (std::size_t t = 0; t <= T; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double w = static_cast<double>(inst.catalog.caps[i]);
            out.rbar_col[t][i] = t == 0 ? lp.add_var(0.0, w, w) : lp.add_var(0.0);
        }
    }

    const std::size_t cols = lp.num_vars();
    for (std::size_t t = 0; t < T; ++t) {
        const Event& ev = inst.events[t];
        const double sign = ev.kind == EventKind::Customer ? 1.0 : -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(cols, 0.0);
            row[out.rbar_col[t + 1][i]] = 1.0;
            row[out.rbar_col[t][i]] = -1.0;
            for (std::size_t s = 0; s < ev.menu.size(); ++s)
                row[out.bundle_col[t][s]] = sign * static_cast<double>(ev.menu[s].counts[i]);
            lp.add_row(std::move(row), Sense::LessEqual, 0.0);
        }
    }
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> row(cols, 0.0);
        for (std::size_t c : out.bundle_col[t]) row[c] = 1.0;
        lp.add_row(std::move(row), Sense::LessEqual, 1.0);
    }
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(cols, 0.0);
            row[out.rbar_col[t][i]] = 1.0;
            lp.add_row(std::move(row), Sense::LessEqual, static_cast<double>(inst.catalog.caps[i]));
        }
    }
    return out;
}

OfflineResult solve_lp(const PrimalLP& primal, const SimplexOptions& options) {
    LPSolution sol = solve_simplex(primal.lp, options);
    if (sol.status != LPStatus::Optimal)
        throw NumericalError(std::string("offline LP reported ") +
                             (sol.status == LPStatus::Infeasible ? "infeasible" : "unbounded") +
                             ", which the benchmark LP cannot be");
    OfflineResult out;
    out.method = OfflineMethod::Simplex;
    out.value = std::max(0.0, sol.value);
    std::vector<double> alloc;
    for (const auto& cols : primal.bundle_col)
        for (std::size_t c : cols) alloc.push_back(sol.x[c]);
    out.allocation = std::move(alloc);
    return out;
}

OfflineResult offline_opt(const Instance& inst, Augmentation augmentation, std::size_t max_vars) {
    return solve_lp(build_lp(inst, augmentation, max_vars));
}

namespace {

struct Search {
    const Instance& inst;
    Augmentation augmentation;
    std::vector<Count> r;
    std::vector<std::size_t> choice;
    std::vector<std::size_t> best_choice;
    double best = 0.0;

    double customer_gain(double v) const {
        return augmentation == Augmentation::Suppliers ? v : v / (1.0 + inst.eps);
    }
    double supplier_cost(double v) const {
        return augmentation == Augmentation::Suppliers ? (1.0 + inst.eps) * v : v;
    }

    void dfs(std::size_t t, double value) {
        if (t == inst.events.size()) {
            if (value > best) {
                best = value;
                best_choice = choice;
            }
            return;
        }
        const Event& ev = inst.events[t];
        choice[t] = SIZE_MAX;
        dfs(t + 1, value);
        const std::size_t n = r.size();
        for (std::size_t s = 0; s < ev.menu.size(); ++s) {
            const Bundle& b = ev.menu[s];
            std::vector<Count> saved = r;
            if (ev.kind == EventKind::Customer) {
                bool ok = true;
                for (std::size_t i = 0; i < n && ok; ++i) ok = r[i] >= b.counts[i];
                if (!ok) continue;
                for (std::size_t i = 0; i < n; ++i) r[i] -= b.counts[i];
                choice[t] = s;
                dfs(t + 1, value + customer_gain(b.value));
            } else {
                for (std::size_t i = 0; i < n; ++i)
                    r[i] = std::min(r[i] + b.counts[i], inst.catalog.caps[i]);
                choice[t] = s;
                dfs(t + 1, value - supplier_cost(b.value));
            }
            r = std::move(saved);
        }
        choice[t] = SIZE_MAX;
    }
};

}  // namespace

OfflineResult brute_force_opt(const Instance& inst, Augmentation augmentation, const BruteForceCaps& caps) {
    require_valid(inst);
    if (inst.events.size() > caps.max_events)
        throw std::length_error("brute force: " + std::to_string(inst.events.size()) +
                                " events exceed the cap of " + std::to_string(caps.max_events));
    std::size_t bundles = 0;
    for (const Event& ev : inst.events) bundles += ev.menu.size();
    if (bundles > caps.max_bundles)
        throw std::length_error("brute force: " + std::to_string(bundles) + " bundles exceed the cap of " +
                                std::to_string(caps.max_bundles));
    double states = 1.0;
    for (Count w : inst.catalog.caps) states *= static_cast<double>(w + 1);
    if (states > caps.max_inventory_states)
        throw std::length_error("brute force: inventory state space too large");

    Search search{inst, augmentation, inst.catalog.caps, std::vector<std::size_t>(inst.events.size(), SIZE_MAX),
                  std::vector<std::size_t>(inst.events.size(), SIZE_MAX), 0.0};
    search.dfs(0, 0.0);

    OfflineResult out;
    out.method = OfflineMethod::BruteForce;
    out.value = search.best;
    std::vector<double> alloc;
    for (std::size_t t = 0; t < inst.events.size(); ++t)
        for (std::size_t s = 0; s < inst.events[t].menu.size(); ++s)
            alloc.push_back(search.best_choice[t] == s ? 1.0 : 0.0);
    out.allocation = std::move(alloc);
    return out;
}

}  // namespace bundletrade

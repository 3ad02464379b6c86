#include "bundletrade/dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bundletrade {

namespace {

void check_vectors(const Trace& trace) {
    const std::size_t n = trace.catalog.size();
    for (const TraceStep& s : trace.steps) {
        if (s.x_before.size() != n || s.x_after.size() != n || s.r_before.size() != n ||
            s.r_after.size() != n)
            throw std::invalid_argument("trace step " + std::to_string(s.t) +
                                        " is missing price or inventory vectors");
    }
}

bool sold_inventory(const TraceStep& s) {
    return s.kind == EventKind::Customer && s.inventory_sold;
}

bool bought(const TraceStep& s) { return s.kind == EventKind::Supplier && s.traded; }

double dot(const std::vector<Count>& a, const std::vector<double>& x) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0) total += static_cast<double>(a[i]) * x[i];
    return total;
}

class Checker {
public:
    explicit Checker(Report& report, double tau) : report_(report), tau_(tau) {}

    // Records lhs >= rhs.
    void at_least(const char* name, double lhs, double rhs, std::optional<std::size_t> t,
                  std::optional<std::size_t> s = {}, std::optional<std::size_t> i = {}) {
        ++report_.checked;
        double slack = lhs - rhs;
        if (!(slack >= -scaled_tolerance(tau_, lhs, rhs)))
            report_.violations.push_back({name, t, s, i, slack});
    }

    void at_most(const char* name, double lhs, double rhs, std::optional<std::size_t> t,
                 std::optional<std::size_t> s = {}, std::optional<std::size_t> i = {}) {
        at_least(name, rhs, lhs, t, s, i);
    }

    void near(const char* name, double a, double b, std::optional<std::size_t> t,
              std::optional<std::size_t> s = {}, std::optional<std::size_t> i = {}) {
        ++report_.checked;
        double gap = std::abs(a - b);
        if (!(gap <= scaled_tolerance(tau_, a, b))) report_.violations.push_back({name, t, s, i, -gap});
    }

private:
    Report& report_;
    double tau_;
};

}  // namespace

DualSolution fit_dual(const Trace& trace) {
    check_vectors(trace);
    const std::size_t n = trace.catalog.size();
    const std::size_t T = trace.steps.size();
    DualSolution dual;
    dual.x.reserve(T + 1);
    dual.x.push_back(T ? trace.steps.front().x_before : std::vector<double>(n, 0.0));
    for (const TraceStep& s : trace.steps) dual.x.push_back(s.x_after);
    dual.ell.assign(T, std::vector<double>(n, 0.0));
    dual.alpha.assign(T, 0.0);
    dual.beta.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < n; ++i)
            dual.ell[t][i] = std::max(0.0, dual.x[t + 1][i] - dual.x[t][i]);
        const TraceStep& s = trace.steps[t];
        if (sold_inventory(s)) dual.alpha[t] = s.value;
        if (bought(s)) dual.beta[t] = s.P - (1.0 + trace.eps) * s.value;
    }
    dual.objective = dual_objective(dual, trace.catalog);
    return dual;
}

double dual_objective(const DualSolution& dual, const ItemCatalog& catalog) {
    double total = 0.0;
    for (const auto& row : dual.ell)
        for (std::size_t i = 0; i < row.size(); ++i) total += static_cast<double>(catalog.caps[i]) * row[i];
    for (double a : dual.alpha) total += a;
    for (double b : dual.beta) total += b;
    return total;
}

Report verify_dual(const Instance& inst, const Trace& trace, const DualSolution& dual, double tau) {
    const std::size_t T = inst.events.size();
    const std::size_t n = inst.catalog.size();
    if (trace.steps.size() != T) throw std::invalid_argument("verify_dual: trace and instance lengths differ");
    if (dual.x.size() != T + 1 || dual.ell.size() != T || dual.alpha.size() != T || dual.beta.size() != T)
        throw std::invalid_argument("verify_dual: dual solution shape does not match the instance");
    for (const auto& row : dual.x)
        if (row.size() != n) throw std::invalid_argument("verify_dual: price vector length does not match n");
    for (const auto& row : dual.ell)
        if (row.size() != n) throw std::invalid_argument("verify_dual: ell vector length does not match n");

    Report report;
    Checker check(report, tau);
    for (std::size_t t = 0; t <= T; ++t)
        for (std::size_t i = 0; i < n; ++i) check.at_least("nonnegativity", dual.x[t][i], 0.0, t, {}, i);

    for (std::size_t t = 0; t < T; ++t) {
        const Event& ev = inst.events[t];
        const TraceStep& step = trace.steps[t];
        const auto& x_now = dual.x[t + 1];
        for (std::size_t i = 0; i < n; ++i) {
            check.at_least("nonnegativity", dual.ell[t][i], 0.0, t, {}, i);
            check.at_least("price_increase", dual.ell[t][i], x_now[i] - dual.x[t][i], t, {}, i);
        }
        check.at_least("nonnegativity", dual.alpha[t], 0.0, t);
        check.at_least("nonnegativity", dual.beta[t], 0.0, t);

        if (ev.kind == EventKind::Customer) {
            if (!step.inventory_sold) {
                for (std::size_t i = 0; i < n; ++i)
                    check.near("no_trade_prices", x_now[i], dual.x[t][i], t, {}, i);
            }
            for (std::size_t s = 0; s < ev.menu.size(); ++s) {
                const Bundle& b = ev.menu[s];
                check.at_least("customer_cover", dot(b.counts, x_now) + dual.alpha[t], b.value, t, s);
            }
        } else {
            for (std::size_t s = 0; s < ev.menu.size(); ++s) {
                const Bundle& b = ev.menu[s];
                check.at_most("supplier_cover", dot(b.counts, x_now) - dual.beta[t],
                              (1.0 + inst.eps) * b.value, t, s);
            }
        }
    }
    check.near("objective", dual.objective, dual_objective(dual, inst.catalog), {});
    return report;
}

Report verify_step_inequalities(const Trace& trace, double tau) {
    check_vectors(trace);
    const std::size_t n = trace.catalog.size();
    const double eta = trace.params.eta;
    const double mu = trace.params.mu;
    const double shift = 1.0 / (static_cast<double>(trace.declared_d) * mu);
    const double eps = trace.eps;

    Report report;
    Checker check(report, tau);
    double sell_sum = 0.0;
    double buy_sum = 0.0;

    for (const TraceStep& s : trace.steps) {
        const std::size_t t = s.t;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = static_cast<double>(trace.catalog.caps[i]);
            check.at_least("nonnegative_price", s.x_after[i], 0.0, t, {}, i);
            check.at_least("inventory_bounds", static_cast<double>(s.r_after[i]), 0.0, t, {}, i);
            check.at_most("inventory_bounds", static_cast<double>(s.r_after[i]), w, t, {}, i);
            const double lhs = std::log((s.x_after[i] + shift) / (s.x_before[i] + shift)) / eta;
            const double rhs = static_cast<double>(s.r_before[i] - s.r_after[i]) / w;
            check.near("log_price_identity", lhs, rhs, t, {}, i);
            if (s.kind == EventKind::Customer)
                check.at_least("monotone_prices", s.x_after[i], s.x_before[i], t, {}, i);
            else
                check.at_most("monotone_prices", s.x_after[i], s.x_before[i], t, {}, i);
        }

        if (sold_inventory(s)) {
            check.at_least("sell_criterion", s.value, std::max(1.0, s.P), t, s.chosen);
            double kl = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double hat_now = s.x_after[i] + shift;
                const double hat_prev = s.x_before[i] + shift;
                kl += static_cast<double>(trace.catalog.caps[i]) * hat_now * std::log(hat_now / hat_prev);
            }
            check.at_most("sell_kl_bound", kl / eta, std::exp(eps / 8.0) * (s.P + 1.0 / mu), t, s.chosen);
            sell_sum += s.P + 1.0 / mu;
        }
        if (bought(s)) {
            check.at_least("buy_criterion", s.P / (1.0 + eps), s.value, t, s.chosen);
            double lhs = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double w = static_cast<double>(trace.catalog.caps[i]);
                if (s.x_after[i] > 0.0) {
                    const double hat_now = s.x_after[i] + shift;
                    lhs += w * hat_now * std::log(hat_now / (s.x_before[i] + shift));
                } else {
                    lhs -= w * s.x_before[i];
                }
            }
            check.at_most("buy_kl_bound", lhs / eta, -std::exp(-eps / 8.0) * s.P, t, s.chosen);
            buy_sum += s.P;
        }
    }
    check.at_least("aggregate_balance", sell_sum, std::exp(-eps / 4.0) * buy_sum, {});
    check.near("profit_sum", trace.profit, trace.recomputed_profit(), {});
    return report;
}

DualGap dual_gap(const Trace& trace, const DualSolution& dual, double tau) {
    DualGap gap;
    gap.degenerate = !(trace.profit > tau);
    gap.ratio = dual.objective / std::max(trace.profit, tau);
    gap.eta_over_eps = trace.params.eta / trace.eps;
    return gap;
}

}  // namespace bundletrade

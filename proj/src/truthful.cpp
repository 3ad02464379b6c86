#include "bundletrade/truthful.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bundletrade/rng.hpp"

namespace bundletrade {

TruthfulParams truthful_params(double v, Count d, double eps, std::uint64_t seed) {
    if (!(v >= 1.0)) throw std::invalid_argument("truthful_params: v must be >= 1");
    if (d < 1) throw std::invalid_argument("truthful_params: d must be >= 1");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("truthful_params: eps outside (0, 1]");
    TruthfulParams p;
    p.base.eps = eps;
    p.base.v = v;
    p.base.d = d;
    p.base.mu = 32.0 / eps * (1.0 + std::log(v));
    p.base.eta = 32.0 * (1.0 + std::log1p(static_cast<double>(d) * v * p.base.mu));
    p.delta = eps / 8.0;
    p.seed = seed;
    return p;
}

int floor_log2(double v) {
    if (!(v >= 1.0) || !std::isfinite(v)) throw std::invalid_argument("floor_log2: v must be a finite value >= 1");
    int j = 0;
    double next = 2.0;
    while (next <= v) {
        ++j;
        next *= 2.0;
    }
    return j;
}

double RhoDistribution::total_probability() const {
    double total = 0.0;
    for (const auto& atom : support) total += atom.second;
    return total;
}

RhoDistribution rho_distribution_with_delta(double v, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("rho distribution: delta outside [0, 1]");
    RhoDistribution dist;
    dist.delta = delta;
    dist.J = floor_log2(v);
    dist.support.reserve(static_cast<std::size_t>(dist.J) + 2);
    dist.support.emplace_back(0.0, 1.0 - delta);
    const double each = delta / (1.0 + dist.J);
    double value = 1.0;
    for (int j = 0; j <= dist.J; ++j) {
        dist.support.emplace_back(value, each);
        value *= 2.0;
    }
    return dist;
}

RhoDistribution rho_distribution(double v, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("rho distribution: eps outside (0, 1]");
    return rho_distribution_with_delta(v, eps / 8.0);
}

double sample_rho(const RhoDistribution& dist, std::uint64_t seed) {
    Rng rng(seed);
    const double u = rng.uniform01();
    double cumulative = 0.0;
    for (const auto& [value, prob] : dist.support) {
        cumulative += prob;
        if (u < cumulative) return value;
    }
    // rounding left the cumulative sum just below 1; the last positive atom absorbs it
    for (auto it = dist.support.rbegin(); it != dist.support.rend(); ++it)
        if (it->second > 0.0) return it->first;
    return 0.0;
}

TruthfulEngine::TruthfulEngine(ItemCatalog catalog, EngineParams base, double rho, double tau)
    : engine_(std::move(catalog), base, tau), rho_(rho) {
    if (!(rho_ >= 0.0) || !std::isfinite(rho_)) throw std::invalid_argument("rho must be finite and >= 0");
}

double TruthfulEngine::customer_quote(const Bundle& bundle) const {
    return rho_ + std::max(1.0, engine_.bundle_price(bundle));
}

double TruthfulEngine::supplier_quote(const Bundle& bundle) const {
    return engine_.bundle_price(bundle) / (1.0 + engine_.params().eps);
}

TraceStep TruthfulEngine::step_customer(std::span<const Bundle> menu) {
    // rho shifts every quote equally, so the argmax matches the trading engine's
    Selection sel = engine_.select_customer(menu);
    const Bundle& chosen = menu[sel.index];
    TraceStep step = engine_.open_step(EventKind::Customer, sel, chosen);
    const double tau = engine_.tau();
    if (sel.utility >= -tau) {
        engine_.remove_units(chosen);
        step.inventory_sold = true;
        if (sel.utility - rho_ >= -tau) {
            step.traded = true;
            step.price = rho_ + std::max(1.0, sel.bundle_price);
        }
    }
    engine_.close_step(step);
    return step;
}

TraceStep TruthfulEngine::step_supplier(std::span<const Bundle> menu) {
    Selection sel = engine_.select_supplier(menu);
    const Bundle& chosen = menu[sel.index];
    TraceStep step = engine_.open_step(EventKind::Supplier, sel, chosen);
    if (sel.utility >= -engine_.tau()) {
        engine_.add_units(chosen);
        step.traded = true;
        step.price = sel.bundle_price / (1.0 + engine_.params().eps);
    }
    engine_.close_step(step);
    return step;
}

TraceStep TruthfulEngine::step(const Event& event) {
    return event.kind == EventKind::Customer ? step_customer(event.menu) : step_supplier(event.menu);
}

Trace run_truthful(const Instance& inst, std::uint64_t seed, const RunOptions& options) {
    TruthfulParams params = truthful_params(inst.declared_v, inst.declared_d, inst.eps, seed);
    params.rho = sample_rho(rho_distribution(inst.declared_v, inst.eps), seed);
    return run_truthful(inst, params, options);
}

Trace run_truthful(const Instance& inst, const TruthfulParams& params, const RunOptions& options) {
    require_valid(inst);
    validate_params(params.base, options.tau);
    auto violations = check_large_inventory(inst, params.base);
    if (options.mode == AssumptionMode::Strict && !violations.empty())
        throw InstanceError("large-inventory assumption violated: " + violations.front().describe() +
                            " (" + std::to_string(violations.size()) + " violation(s))");

    Trace trace;
    trace.algorithm = Algorithm::Truthful;
    trace.catalog = inst.catalog;
    trace.eps = inst.eps;
    trace.declared_v = inst.declared_v;
    trace.declared_d = inst.declared_d;
    trace.tau = options.tau;
    trace.params = {params.base.mu, params.base.eta, params.delta, params.rho, params.seed};
    trace.assumption_violations = violations.size();
    trace.steps.reserve(inst.events.size());

    TruthfulEngine engine(inst.catalog, params.base, params.rho, options.tau);
    for (const Event& ev : inst.events) {
        TraceStep step = engine.step(ev);
        if (step.traded) trace.profit += ev.kind == EventKind::Customer ? step.price : -step.price;
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

double expected_buy_revenue(const TraceStep& step, const RhoDistribution& dist, double tau) {
    const double floor = std::max(1.0, step.P);
    const double margin = step.value - floor;
    double total = 0.0;
    for (const auto& [rho, prob] : dist.support) {
        if (rho <= margin + tau) total += prob * (rho + floor);
    }
    return total;
}

double expected_revenue_floor(const TraceStep& step, const RhoDistribution& dist, double v) {
    const double floor = std::max(1.0, step.P);
    return (1.0 - 2.0 * dist.delta) * floor + dist.delta / (2.0 * (1.0 + std::log(v))) * step.value;
}

}  // namespace bundletrade

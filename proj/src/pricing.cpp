#include "bundletrade/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bundletrade {

EngineParams default_params(double v, Count d, double eps) {
    if (!(v >= 1.0)) throw std::invalid_argument("default_params: v must be >= 1");
    if (d < 1) throw std::invalid_argument("default_params: d must be >= 1");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("default_params: eps outside (0, 1]");
    EngineParams p;
    p.mu = 1.0;
    p.eta = 1.0 + std::log1p(v * static_cast<double>(d));
    p.eps = eps;
    p.v = v;
    p.d = d;
    return p;
}

void validate_params(const EngineParams& p, double tau) {
    if (!(p.v >= 1.0)) throw std::invalid_argument("engine params: v must be >= 1");
    if (p.d < 1) throw std::invalid_argument("engine params: d must be >= 1");
    if (!(p.eps > 0.0 && p.eps <= 1.0)) throw std::invalid_argument("engine params: eps outside (0, 1]");
    if (!(p.mu >= 1.0)) throw std::invalid_argument("engine params: mu must be >= 1");
    double eta_min = 1.0 + std::log1p(p.v * static_cast<double>(p.d) * p.mu);
    if (!(p.eta >= eta_min - tau))
        throw std::invalid_argument("engine params: eta below 1 + ln(1 + v d mu) = " +
                                    std::to_string(eta_min));
}

double unit_price(const EngineParams& p, Count r, Count w) {
    const double scale = static_cast<double>(p.d) * p.mu;
    const double z = static_cast<double>(w - r) / static_cast<double>(w) * p.eta;
    // expm1 overflows past ~709; the -1 is below rounding there anyway
    if (z > 700.0) return std::exp(z - std::log(scale));
    return std::expm1(z) / scale;
}

EngineInvariantError::EngineInvariantError(std::size_t step, const std::string& message)
    : std::logic_error("step " + std::to_string(step) + ": " + message), step_(step) {}

std::vector<Violation> check_large_inventory(const Instance& inst, const EngineParams& params) {
    std::vector<Violation> out;
    const double factor = 8.0 * params.eta / params.eps;
    for (std::size_t t = 0; t < inst.events.size(); ++t) {
        const Menu& menu = inst.events[t].menu;
        for (std::size_t s = 0; s < menu.size(); ++s) {
            const auto& counts = menu[s].counts;
            for (std::size_t i = 0; i < counts.size() && i < inst.catalog.size(); ++i) {
                if (counts[i] == 0) continue;
                double need = factor * static_cast<double>(counts[i]);
                if (static_cast<double>(inst.catalog.caps[i]) < need) {
                    out.push_back({t, s, i,
                                   "inventory cap " + std::to_string(inst.catalog.caps[i]) +
                                       " below (8 eta / eps) a = " + std::to_string(need)});
                }
            }
        }
    }
    return out;
}

TradeEngine::TradeEngine(ItemCatalog catalog, EngineParams params, double tau)
    : catalog_(std::move(catalog)), params_(params), tau_(tau) {
    if (catalog_.size() == 0) throw std::invalid_argument("engine: empty catalog");
    for (Count w : catalog_.caps)
        if (w < 1) throw std::invalid_argument("engine: inventory caps must be >= 1");
    if (!(tau_ > 0.0)) throw std::invalid_argument("engine: tolerance must be positive");
    r_ = catalog_.caps;
    x_.resize(catalog_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) refresh_price(i);
}

void TradeEngine::refresh_price(std::size_t i) {
    x_[i] = unit_price(params_, r_[i], catalog_.caps[i]);
}

void TradeEngine::check_dimension(const Bundle& bundle) const {
    if (bundle.counts.size() != catalog_.size())
        throw std::invalid_argument("bundle dimension " + std::to_string(bundle.counts.size()) +
                                    " does not match catalog size " +
                                    std::to_string(catalog_.size()));
}

double TradeEngine::bundle_price(const Bundle& bundle) const {
    check_dimension(bundle);
    double total = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (bundle.counts[i] != 0) total += static_cast<double>(bundle.counts[i]) * x_[i];
    }
    return total;
}

Selection TradeEngine::select_customer(std::span<const Bundle> menu) const {
    if (menu.empty()) throw std::invalid_argument("empty menu");
    Selection best;
    for (std::size_t s = 0; s < menu.size(); ++s) {
        double p = bundle_price(menu[s]);
        double u = menu[s].value - std::max(1.0, p);
        if (s == 0 || u > best.utility) best = {s, p, u};
    }
    return best;
}

Selection TradeEngine::select_supplier(std::span<const Bundle> menu) const {
    if (menu.empty()) throw std::invalid_argument("empty menu");
    Selection best;
    for (std::size_t s = 0; s < menu.size(); ++s) {
        double p = bundle_price(menu[s]);
        double u = p / (1.0 + params_.eps) - menu[s].value;
        if (s == 0 || u > best.utility) best = {s, p, u};
    }
    return best;
}

void TradeEngine::remove_units(const Bundle& bundle) {
    check_dimension(bundle);
    for (std::size_t i = 0; i < r_.size(); ++i) {
        if (bundle.counts[i] > r_[i])
            throw EngineInvariantError(t_, "selling " + std::to_string(bundle.counts[i]) +
                                               " units of item " + std::to_string(i) +
                                               " with only " + std::to_string(r_[i]) +
                                               " in inventory");
    }
    for (std::size_t i = 0; i < r_.size(); ++i) {
        if (bundle.counts[i] == 0) continue;
        r_[i] -= bundle.counts[i];
        refresh_price(i);
    }
}

void TradeEngine::add_units(const Bundle& bundle) {
    check_dimension(bundle);
    for (std::size_t i = 0; i < r_.size(); ++i) {
        if (bundle.counts[i] == 0) continue;
        r_[i] = std::min(r_[i] + bundle.counts[i], catalog_.caps[i]);
        refresh_price(i);
    }
}

TraceStep TradeEngine::open_step(EventKind kind, const Selection& sel, const Bundle& chosen) const {
    TraceStep step;
    step.t = t_;
    step.kind = kind;
    step.chosen = sel.index;
    step.P = sel.bundle_price;
    step.value = chosen.value;
    step.r_before = r_;
    step.x_before = x_;
    return step;
}

void TradeEngine::close_step(TraceStep& step) {
    step.r_after = r_;
    step.x_after = x_;
    ++t_;
}

TraceStep TradeEngine::step_customer(std::span<const Bundle> menu) {
    Selection sel = select_customer(menu);
    const Bundle& chosen = menu[sel.index];
    TraceStep step = open_step(EventKind::Customer, sel, chosen);
    if (sel.utility >= -tau_) {
        remove_units(chosen);
        step.traded = true;
        step.inventory_sold = true;
        step.price = chosen.value;
    }
    close_step(step);
    return step;
}

TraceStep TradeEngine::step_supplier(std::span<const Bundle> menu) {
    Selection sel = select_supplier(menu);
    const Bundle& chosen = menu[sel.index];
    TraceStep step = open_step(EventKind::Supplier, sel, chosen);
    if (sel.utility >= -tau_) {
        add_units(chosen);
        step.traded = true;
        step.price = chosen.value;
    }
    close_step(step);
    return step;
}

TraceStep TradeEngine::step(const Event& event) {
    return event.kind == EventKind::Customer ? step_customer(event.menu) : step_supplier(event.menu);
}

Trace run(const Instance& inst, const EngineParams& params, const RunOptions& options) {
    require_valid(inst);
    validate_params(params, options.tau);
    auto violations = check_large_inventory(inst, params);
    if (options.mode == AssumptionMode::Strict && !violations.empty())
        throw InstanceError("large-inventory assumption violated: " + violations.front().describe() +
                            " (" + std::to_string(violations.size()) + " violation(s))");

    Trace trace;
    trace.algorithm = Algorithm::Trade;
    trace.catalog = inst.catalog;
    trace.eps = inst.eps;
    trace.declared_v = inst.declared_v;
    trace.declared_d = inst.declared_d;
    trace.tau = options.tau;
    trace.params = {params.mu, params.eta, 0.0, 0.0, 0};
    trace.assumption_violations = violations.size();
    trace.steps.reserve(inst.events.size());

    TradeEngine engine(inst.catalog, params, options.tau);
    for (const Event& ev : inst.events) {
        TraceStep step = engine.step(ev);
        if (step.traded) trace.profit += ev.kind == EventKind::Customer ? step.price : -step.price;
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

}  // namespace bundletrade

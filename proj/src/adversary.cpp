#include "bundletrade/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace bundletrade {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> to_doubles(const std::vector<Count>& r) {
    return std::vector<double>(r.begin(), r.end());
}

double bundle_units(const Bundle& b) { return static_cast<double>(b.size()); }

}  // namespace

EngineTrader::EngineTrader(ItemCatalog catalog, EngineParams params, double tau)
    : engine_(std::move(catalog), params, tau) {}

TradeDecision EngineTrader::on_customer(const Menu& menu) {
    TraceStep step = engine_.step_customer(menu);
    TradeDecision d;
    if (step.traded) d.bundle = step.chosen;
    d.paid = step.traded;
    d.price = step.price;
    return d;
}

TradeDecision EngineTrader::on_supplier(const Menu& menu) {
    TraceStep step = engine_.step_supplier(menu);
    TradeDecision d;
    if (step.traded) d.bundle = step.chosen;
    d.paid = step.traded;
    d.price = step.price;
    return d;
}

std::vector<double> EngineTrader::inventory() const { return to_doubles(engine_.inventory()); }

TruthfulTrader::TruthfulTrader(ItemCatalog catalog, EngineParams base, double rho, double tau)
    : engine_(std::move(catalog), base, rho, tau) {}

TradeDecision TruthfulTrader::on_customer(const Menu& menu) {
    TraceStep step = engine_.step_customer(menu);
    TradeDecision d;
    if (step.inventory_sold) d.bundle = step.chosen;
    d.paid = step.traded;
    d.price = step.price;
    return d;
}

TradeDecision TruthfulTrader::on_supplier(const Menu& menu) {
    TraceStep step = engine_.step_supplier(menu);
    TradeDecision d;
    if (step.traded) d.bundle = step.chosen;
    d.paid = step.traded;
    d.price = step.price;
    return d;
}

std::vector<double> TruthfulTrader::inventory() const { return to_doubles(engine_.engine().inventory()); }

double LifoLedger::level(std::size_t i) const {
    const auto& s = stacks_.at(i);
    return s.empty() ? 0.0 : s.back().end;
}

double LifoLedger::held_cost(std::size_t i) const {
    double total = 0.0;
    for (const LifoSegment& seg : stacks_.at(i)) total += (seg.end - seg.start) * seg.unit_cost;
    return total;
}

double LifoLedger::held_cost() const {
    double total = 0.0;
    for (std::size_t i = 0; i < stacks_.size(); ++i) total += held_cost(i);
    return total;
}

void LifoLedger::push(std::size_t i, double units, double unit_cost, std::size_t step) {
    if (!(units > 0.0)) return;
    auto& s = stacks_.at(i);
    const double start = s.empty() ? 0.0 : s.back().end;
    s.push_back({start, start + units, unit_cost, step});
}

double LifoLedger::pop(std::size_t i, double units) {
    auto& s = stacks_.at(i);
    double cost = 0.0;
    double left = units;
    while (left > 0.0) {
        if (s.empty()) {
            // rounding of fractional levels may leave a sliver here
            if (left <= 1e-9 * std::max(1.0, units)) break;
            throw std::logic_error("LIFO ledger: popping more units than held for type " + std::to_string(i));
        }
        LifoSegment& top = s.back();
        const double take = std::min(left, top.end - top.start);
        cost += take * top.unit_cost;
        top.end -= take;
        left -= take;
        if (top.end - top.start <= 1e-12) s.pop_back();
    }
    return cost;
}

namespace {

// Books one offer. Returns the margin (cash flow plus change of held cost
// basis); pushed segments are reported through on_push.
double book(LifoLedger& ledger, EventKind kind, const Bundle& bundle, const TradeDecision& decision,
            const std::vector<double>& before, const std::vector<double>& after, std::size_t step,
            const std::function<void(std::size_t, const LifoSegment&)>& on_push) {
    double cash = 0.0;
    if (decision.paid) cash = kind == EventKind::Customer ? decision.price : -decision.price;
    const double paid_per_unit =
        kind == EventKind::Supplier && decision.paid && bundle_units(bundle) > 0.0
            ? decision.price / bundle_units(bundle)
            : 0.0;
    double delta_cost = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        const double delta = after[i] - before[i];
        if (delta > 0.0) {
            ledger.push(i, delta, paid_per_unit, step);
            delta_cost += delta * paid_per_unit;
            if (on_push) on_push(i, ledger.stack(i).back());
        } else if (delta < 0.0) {
            delta_cost -= ledger.pop(i, -delta);
        }
    }
    return cash + delta_cost;
}

}  // namespace

LifoReplay lifo_accounting(const std::vector<InteractionStep>& log, LifoLedger initial) {
    LifoReplay out;
    std::size_t types = initial.types();
    for (const auto& s : log) types = std::max(types, s.before.size());
    if (initial.types() < types) {
        LifoLedger grown(types);
        for (std::size_t i = 0; i < initial.types(); ++i)
            for (const LifoSegment& seg : initial.stack(i)) grown.push(i, seg.end - seg.start, seg.unit_cost, seg.step);
        initial = std::move(grown);
    }
    out.ledger = std::move(initial);
    out.margin.reserve(log.size());
    for (std::size_t k = 0; k < log.size(); ++k) {
        const auto& s = log[k];
        out.margin.push_back(book(out.ledger, s.kind, s.bundle, s.decision, s.before, s.after, k, {}));
    }
    return out;
}

DyadicLevel dyadic_level(double x) {
    if (!(x > 0.0 && x <= 1.0)) throw std::invalid_argument("dyadic level: x outside (0, 1]");
    const double inv = 1.0 / x;
    DyadicLevel lvl;
    lvl.x = x;
    // strictly greater than 1/x; the slack keeps exact powers of 2 from being taken as equal-or-below
    while (static_cast<double>(lvl.d) <= inv * (1.0 + 1e-12)) lvl.d *= 2;
    lvl.v = x * static_cast<double>(lvl.d);
    return lvl;
}

LevelSchedule LevelSchedule::make(double eps, std::size_t count) {
    LevelSchedule s;
    const double g = (1.0 + eps) * (1.0 + eps);
    for (std::size_t l = 0; l < count; ++l) {
        DyadicLevel lvl = dyadic_level(std::pow(1.0 + eps, -2.0 * static_cast<double>(l + 1)));
        s.x.push_back(lvl.x);
        s.d.push_back(lvl.d);
        s.v.push_back(lvl.v);
        s.x_prime.push_back(g * lvl.x);
        s.v_prime.push_back(g * lvl.x * static_cast<double>(lvl.d));
    }
    return s;
}

int level_count(double value, double eps) {
    const double logs = std::log(value) / std::log1p(eps);
    return static_cast<int>(std::floor(0.5 * logs + 1e-9)) - 1;
}

double log_v_phase_profit(Count w, double eps, double v, int i_final) {
    return static_cast<double>(w) * eps * v / std::pow(1.0 + eps, 2.0 * i_final + 1.0);
}

double log_d_phase_profit(Count w, double eps, int i_final) {
    return static_cast<double>(w) * eps / std::pow(1.0 + eps, 2.0 * i_final + 1.0);
}

double small_v_phase_profit(double eps, double v, int y_final) {
    return eps * v / std::pow(1.0 + eps, 2.0 * y_final + 1.0);
}

double small_d_phase_profit(double eps, double v_level) { return eps * (1.0 + eps) * v_level; }

std::optional<std::size_t> divisibility_failure(const std::vector<Count>& levels, Count w,
                                                const LevelSchedule& schedule) {
    std::vector<Count> at(static_cast<std::size_t>(w) + 1, 0);
    for (Count l : levels) {
        if (l < 0 || l > w) return static_cast<std::size_t>(0);
        ++at[static_cast<std::size_t>(l)];
    }
    Count cumulative = 0;
    for (std::size_t i = 0; i <= static_cast<std::size_t>(w); ++i) {
        cumulative += at[i];
        if (cumulative % schedule.d.at(i) != 0) return i;
    }
    return std::nullopt;
}

namespace {

void check_eps(double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("attack: eps outside (0, 1]");
}

bool is_power_of_two(Count d) { return d > 0 && (d & (d - 1)) == 0; }

// Drives one trader through offers and keeps the books.
class Runner {
public:
    Runner(Trader& trader, const ItemCatalog& catalog, const AttackOptions& options, AttackResult& result,
           std::function<double(std::size_t, double)> floor_cost)
        : trader_(trader), catalog_(catalog), options_(options), result_(result),
          ledger_(catalog.size()), floor_cost_(std::move(floor_cost)) {
        auto inv = trader_.inventory();
        if (inv.size() != catalog_.size())
            throw std::invalid_argument("attack: trader reports " + std::to_string(inv.size()) +
                                        " item types, construction needs " + std::to_string(catalog_.size()));
    }

    LifoLedger& ledger() { return ledger_; }

    std::vector<double> inventory() const { return trader_.inventory(); }

    std::vector<Count> integral_inventory() const {
        auto inv = trader_.inventory();
        std::vector<Count> out(inv.size());
        for (std::size_t i = 0; i < inv.size(); ++i) {
            const double r = std::round(inv[i]);
            if (std::abs(inv[i] - r) > 1e-9)
                throw std::invalid_argument("attack: trader holds fractional inventory " + std::to_string(inv[i]) +
                                            " of type " + std::to_string(i) + "; this construction needs integral traders");
            out[i] = static_cast<Count>(r);
        }
        return out;
    }

    void begin_phase(std::size_t index) {
        phase_ = PhaseRecord{};
        phase_.phase = index;
    }

    PhaseRecord& phase() { return phase_; }

    TradeDecision offer(EventKind kind, const Bundle& bundle) {
        if (result_.steps >= options_.max_steps)
            throw std::runtime_error("attack: offer budget of " + std::to_string(options_.max_steps) + " exhausted");
        const std::vector<double> before = trader_.inventory();
        Menu menu{bundle};
        TradeDecision decision = kind == EventKind::Customer ? trader_.on_customer(menu) : trader_.on_supplier(menu);
        const std::vector<double> after = trader_.inventory();
        check_consistent(kind, bundle, decision, before, after);

        const std::size_t step = result_.steps;
        const double margin = book(ledger_, kind, bundle, decision, before, after, step,
                                   [this](std::size_t i, const LifoSegment& seg) { check_floor(i, seg); });
        if (decision.paid) phase_.alg_cash += kind == EventKind::Customer ? decision.price : -decision.price;
        phase_.alg_profit += margin;
        ++phase_.steps;
        ++result_.steps;
        if (options_.record_interaction) result_.interaction.push_back({kind, bundle, decision, before, after});
        return decision;
    }

    void end_phase(double tau) {
        double recomputed = 0.0;
        for (const AdversaryTrade& t : phase_.adversary_trades)
            recomputed += (t.kind == EventKind::Customer ? 1.0 : -1.0) * t.units * t.unit_price;
        phase_.adv_profit_recomputed = recomputed;
        const double slack = scaled_tolerance(tau, phase_.adv_profit, phase_.alg_profit);
        if (phase_.alg_profit <= slack)
            phase_.ratio = phase_.adv_profit > slack ? kInf : std::numeric_limits<double>::quiet_NaN();
        else
            phase_.ratio = phase_.adv_profit / phase_.alg_profit;
        result_.total_adv += phase_.adv_profit;
        result_.total_alg_cash += phase_.alg_cash;
        result_.total_alg_margin += phase_.alg_profit;
        result_.phases.push_back(std::move(phase_));
    }

    void seed_initial(const std::vector<LifoSegment>& per_type_template) {
        // template segments are clipped to each type's current level
        auto inv = trader_.inventory();
        for (std::size_t i = 0; i < inv.size(); ++i) {
            for (const LifoSegment& seg : per_type_template) {
                const double end = std::min(seg.end, inv[i]);
                if (end > seg.start) ledger_.push(i, end - seg.start, seg.unit_cost);
            }
            if (ledger_.level(i) + 1e-9 < inv[i])
                throw std::invalid_argument("attack: initial inventory exceeds the accounted range");
        }
        result_.initial_credit = ledger_.held_cost();
    }

    void finish(double tau) {
        result_.final_held_cost = ledger_.held_cost();
        const double amortized = result_.total_alg_cash - result_.initial_credit;
        const double slack = scaled_tolerance(tau, amortized, result_.total_adv);
        result_.amortized_ratio = amortized <= slack ? kInf : result_.total_adv / amortized;
        result_.raw_ratio = result_.total_alg_cash <= slack ? kInf : result_.total_adv / result_.total_alg_cash;
    }

private:
    void check_consistent(EventKind kind, const Bundle& bundle, const TradeDecision& decision,
                          const std::vector<double>& before, const std::vector<double>& after) const {
        if (after.size() != before.size()) throw std::runtime_error("attack: trader changed its number of item types");
        if (decision.bundle && *decision.bundle != 0) throw std::runtime_error("attack: trader chose a bundle outside the menu");
        if (kind == EventKind::Supplier && decision.paid != decision.bundle.has_value())
            throw std::runtime_error("attack: supplier trade without matching payment");
        if (kind == EventKind::Customer && decision.paid && !decision.bundle)
            throw std::runtime_error("attack: customer payment without a bundle");
        for (std::size_t i = 0; i < before.size(); ++i) {
            const double a = decision.bundle ? static_cast<double>(bundle.counts[i]) : 0.0;
            const double w = static_cast<double>(catalog_.caps[i]);
            const double expect = kind == EventKind::Customer ? before[i] - a : std::min(before[i] + a, w);
            if (std::abs(after[i] - expect) > 1e-9 * std::max(1.0, w))
                throw std::runtime_error("attack: trader inventory of type " + std::to_string(i) + " is " +
                                         std::to_string(after[i]) + ", trades imply " + std::to_string(expect));
            if (after[i] < -1e-9 || after[i] > w + 1e-9)
                throw std::runtime_error("attack: trader inventory outside [0, w]");
        }
    }

    void check_floor(std::size_t i, const LifoSegment& seg) {
        if (!floor_cost_) return;
        const double floor = floor_cost_(i, seg.start);
        if (seg.unit_cost < floor - scaled_tolerance(options_.tau, floor)) ++result_.floor_violations;
    }

    Trader& trader_;
    const ItemCatalog& catalog_;
    const AttackOptions& options_;
    AttackResult& result_;
    LifoLedger ledger_;
    std::function<double(std::size_t, double)> floor_cost_;
    PhaseRecord phase_;
};

void require_range(double value, double lo, double hi, const char* what) {
    if (value < lo * (1.0 - 1e-12) || value > hi * (1.0 + 1e-12))
        throw std::logic_error(std::string("attack generated a ") + what + " value " + std::to_string(value) +
                               " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

bool phases_left(const AttackResult& res, std::size_t phases, const AttackOptions& opt) {
    if (phases != 0 && res.phases.size() >= phases) return false;
    if (opt.max_total_steps != 0 && res.steps >= opt.max_total_steps) return false;
    return phases != 0 || opt.max_total_steps != 0;
}

// Level index of a fractional inventory y on [0, w] cut into c intervals.
int interval_index(double y, Count w, int c) {
    const double raw = y * c / static_cast<double>(w);
    int i = static_cast<int>(std::floor(raw + 1e-12));
    return std::clamp(i, 0, c);
}

std::vector<LifoSegment> interval_template(Count w, int c, double base, double eps) {
    std::vector<LifoSegment> out;
    for (int j = 0; j < c; ++j) {
        const double start = static_cast<double>(w) * j / c;
        const double end = static_cast<double>(w) * (j + 1) / c;
        out.push_back({start, end, base / std::pow(1.0 + eps, 2.0 * (j + 1)), SIZE_MAX});
    }
    return out;
}

std::vector<LifoSegment> unit_template(Count w, double base, double eps) {
    std::vector<LifoSegment> out;
    for (Count j = 1; j <= w; ++j)
        out.push_back({static_cast<double>(j - 1), static_cast<double>(j),
                       base / std::pow(1.0 + eps, 2.0 * static_cast<double>(j)), SIZE_MAX});
    return out;
}

}  // namespace

AttackSetup log_v_setup(Count w, double eps, double v) { return {ItemCatalog{{w}}, v, 1, eps}; }
AttackSetup log_d_setup(Count w, double eps, Count d) { return {ItemCatalog{{w}}, 2.0, d, eps}; }
AttackSetup small_v_setup(Count w, double eps, double v) { return {ItemCatalog{{w}}, v, 1, eps}; }
AttackSetup small_d_setup(Count w, double eps, Count d) {
    return {ItemCatalog{std::vector<Count>(static_cast<std::size_t>(d), w)}, 8.0, d, eps};
}

AttackResult attack_log_v(Trader& trader, Count w, double eps, double v, std::size_t phases,
                          const AttackOptions& options) {
    check_eps(eps);
    if (w < 1) throw std::invalid_argument("attack_log_v: w must be >= 1");
    if (v < std::pow(1.0 + eps, 8.0) * (1.0 - 1e-12)) throw std::invalid_argument("attack_log_v: needs v >= (1+eps)^8");
    const int c = level_count(v, eps);
    if (c < 3) throw std::invalid_argument("attack_log_v: c < 3");

    AttackResult res;
    res.construction = "logv";
    res.c = c;
    res.w = w;
    res.eps = eps;
    res.v = v;
    res.d = 1;
    const ItemCatalog catalog{{w}};
    auto floor_cost = [=](std::size_t, double start) {
        const int j = std::min(c - 1, interval_index(start, w, c));
        return v / std::pow(1.0 + eps, 2.0 * (j + 1));
    };
    Runner run(trader, catalog, options, res, floor_cost);
    run.seed_initial(interval_template(w, c, v, eps));

    const double g = 1.0 + eps;
    while (phases_left(res, phases, options)) {
        run.begin_phase(res.phases.size());
        int i_final = 0;
        double supplier_value = 0.0;
        for (;;) {
            const double y = run.inventory()[0];
            const int i = interval_index(y, w, c);
            supplier_value = v / std::pow(g, 2.0 * (i + 1));
            require_range(supplier_value, 1.0, v, "supplier");
            for (Count k = 0; k < w; ++k) run.offer(EventKind::Supplier, Bundle{{1}, supplier_value});
            ++run.phase().supplier_steps;
            const double y_next = run.inventory()[0];
            if (y_next * c <= (i + 1.0) * static_cast<double>(w) + 1e-9 * static_cast<double>(w)) {
                i_final = i;
                break;
            }
            if (run.phase().supplier_steps > static_cast<std::size_t>(c) + 2)
                throw std::logic_error("attack_log_v: phase exceeded its step budget");
        }
        const double customer_value = v / std::pow(g, 2.0 * i_final);
        require_range(customer_value, 1.0, v, "customer");
        for (Count k = 0; k < w; ++k) run.offer(EventKind::Customer, Bundle{{1}, customer_value});
        PhaseRecord& ph = run.phase();
        ph.level = i_final;
        ph.adv_profit = log_v_phase_profit(w, eps, v, i_final);
        ph.adversary_trades = {{EventKind::Supplier, static_cast<double>(w), g * supplier_value},
                               {EventKind::Customer, static_cast<double>(w), customer_value}};
        run.end_phase(options.tau);
    }
    run.finish(options.tau);
    return res;
}

AttackResult attack_log_d(Trader& trader, Count w, double eps, Count d, std::size_t phases,
                          const AttackOptions& options) {
    check_eps(eps);
    if (!is_power_of_two(d)) throw std::invalid_argument("attack_log_d: d must be a power of 2");
    if (w < 1 || w % d != 0) throw std::invalid_argument("attack_log_d: d must divide w");
    if (static_cast<double>(d) < std::pow(1.0 + eps, 8.0) * (1.0 - 1e-12))
        throw std::invalid_argument("attack_log_d: needs d >= (1+eps)^8");
    const int c = level_count(static_cast<double>(d), eps);
    if (c < 3) throw std::invalid_argument("attack_log_d: c < 3");
    const double g = 1.0 + eps;
    std::vector<DyadicLevel> levels;
    for (int l = 0; l <= c + 1; ++l) {
        levels.push_back(dyadic_level(std::pow(g, -2.0 * l)));
        if (w % levels.back().d != 0)
            throw std::invalid_argument("attack_log_d: level " + std::to_string(l) + " bundles of " +
                                        std::to_string(levels.back().d) + " items do not divide w = " +
                                        std::to_string(w));
        if (l <= c && levels.back().d > d)
            throw std::invalid_argument("attack_log_d: customer level " + std::to_string(l) + " needs bundles above d");
    }

    AttackResult res;
    res.construction = "logd";
    res.c = c;
    res.w = w;
    res.eps = eps;
    res.v = 2.0;
    res.d = d;
    const ItemCatalog catalog{{w}};
    auto floor_cost = [=](std::size_t, double start) {
        const int j = std::min(c - 1, interval_index(start, w, c));
        return 1.0 / std::pow(g, 2.0 * (j + 1));
    };
    Runner run(trader, catalog, options, res, floor_cost);
    run.seed_initial(interval_template(w, c, 1.0, eps));

    while (phases_left(res, phases, options)) {
        run.begin_phase(res.phases.size());
        int i_final = 0;
        DyadicLevel sup;
        for (;;) {
            const int i = interval_index(run.inventory()[0], w, c);
            sup = levels[static_cast<std::size_t>(i + 1)];
            require_range(sup.v, 1.0, 2.0, "supplier");
            for (Count k = 0; k < w / sup.d; ++k) run.offer(EventKind::Supplier, Bundle{{sup.d}, sup.v});
            ++run.phase().supplier_steps;
            const double y_next = run.inventory()[0];
            if (y_next * c <= (i + 1.0) * static_cast<double>(w) + 1e-9 * static_cast<double>(w)) {
                i_final = i;
                break;
            }
            if (run.phase().supplier_steps > static_cast<std::size_t>(c) + 2)
                throw std::logic_error("attack_log_d: phase exceeded its step budget");
        }
        const DyadicLevel cus = levels[static_cast<std::size_t>(i_final)];
        require_range(cus.v, 1.0, 2.0, "customer");
        for (Count k = 0; k < w / cus.d; ++k) run.offer(EventKind::Customer, Bundle{{cus.d}, cus.v});
        PhaseRecord& ph = run.phase();
        ph.level = i_final;
        ph.adv_profit = log_d_phase_profit(w, eps, i_final);
        ph.adversary_trades = {{EventKind::Supplier, static_cast<double>(w), g * sup.v / static_cast<double>(sup.d)},
                               {EventKind::Customer, static_cast<double>(w), cus.v / static_cast<double>(cus.d)}};
        run.end_phase(options.tau);
    }
    run.finish(options.tau);
    return res;
}

AttackResult attack_small_inventory_v(Trader& trader, Count w, double eps, double v, std::size_t phases,
                                      const AttackOptions& options) {
    check_eps(eps);
    const double g = 1.0 + eps;
    if (v < std::pow(g, 4.0) * (1.0 - 1e-12)) throw std::invalid_argument("attack_small_inventory_v: needs v >= (1+eps)^4");
    const double w_max = -1.0 + 0.5 * std::log(v) / std::log1p(eps);
    if (w < 1 || static_cast<double>(w) > w_max + 1e-9)
        throw std::invalid_argument("attack_small_inventory_v: w must lie in [1, -1 + 1/2 log_{1+eps} v]");

    AttackResult res;
    res.construction = "smallv";
    res.c = static_cast<int>(std::floor(w_max + 1e-9));
    res.w = w;
    res.eps = eps;
    res.v = v;
    res.d = 1;
    const ItemCatalog catalog{{w}};
    auto unit_value = [=](double units) { return v / std::pow(g, 2.0 * units); };
    auto floor_cost = [=](std::size_t, double start) { return unit_value(std::floor(start + 1e-9) + 1.0); };
    Runner run(trader, catalog, options, res, floor_cost);
    run.integral_inventory();
    run.seed_initial(unit_template(w, v, eps));

    while (phases_left(res, phases, options)) {
        run.begin_phase(res.phases.size());
        Count y_final = 0;
        double supplier_value = 0.0;
        for (;;) {
            const Count y = run.integral_inventory()[0];
            supplier_value = unit_value(static_cast<double>(y + 1));
            require_range(supplier_value, 1.0, v, "supplier");
            TradeDecision dec = run.offer(EventKind::Supplier, Bundle{{1}, supplier_value});
            ++run.phase().supplier_steps;
            run.integral_inventory();
            if (!dec.bundle) {
                y_final = y;
                break;
            }
            if (run.phase().supplier_steps > static_cast<std::size_t>(w) + 1)
                throw std::runtime_error("attack_small_inventory_v: phase exceeded w + 1 supplier steps");
        }
        const double customer_value = unit_value(static_cast<double>(y_final));
        require_range(customer_value, 1.0, v, "customer");
        run.offer(EventKind::Customer, Bundle{{1}, customer_value});
        run.integral_inventory();
        PhaseRecord& ph = run.phase();
        ph.level = static_cast<int>(y_final);
        ph.adv_profit = small_v_phase_profit(eps, v, static_cast<int>(y_final));
        ph.adversary_trades = {{EventKind::Supplier, 1.0, g * supplier_value},
                               {EventKind::Customer, 1.0, customer_value}};
        run.end_phase(options.tau);
    }
    run.finish(options.tau);
    return res;
}

AttackResult attack_small_inventory_d(Trader& trader, Count w, double eps, Count d, std::size_t phases,
                                      const AttackOptions& options) {
    check_eps(eps);
    const double g = 1.0 + eps;
    if (!is_power_of_two(d)) throw std::invalid_argument("attack_small_inventory_d: d must be a power of 2");
    if (static_cast<double>(d) < std::pow(g, 8.0) * (1.0 - 1e-12))
        throw std::invalid_argument("attack_small_inventory_d: needs d >= (1+eps)^8");
    const int c = level_count(static_cast<double>(d), eps);
    if (w < 1 || w > c) throw std::invalid_argument("attack_small_inventory_d: w must lie in [1, c]");
    const LevelSchedule schedule = LevelSchedule::make(eps, static_cast<std::size_t>(w) + 1);
    for (std::size_t l = 0; l < schedule.size(); ++l) {
        if (schedule.d[l] > d)
            throw std::invalid_argument("attack_small_inventory_d: level " + std::to_string(l) + " needs " +
                                        std::to_string(schedule.d[l]) + " distinct types but only d = " +
                                        std::to_string(d) + " exist; lower w or raise d");
    }

    AttackResult res;
    res.construction = "smalld";
    res.c = c;
    res.w = w;
    res.eps = eps;
    res.v = 8.0;
    res.d = d;
    const ItemCatalog catalog{std::vector<Count>(static_cast<std::size_t>(d), w)};
    auto unit_floor = [=](double units) { return 1.0 / std::pow(g, 2.0 * units); };
    auto floor_cost = [=](std::size_t, double start) { return unit_floor(std::floor(start + 1e-9) + 1.0); };
    Runner run(trader, catalog, options, res, floor_cost);
    run.seed_initial(unit_template(w, 1.0, eps));

    auto check_division = [&](const std::vector<Count>& levels) {
        ++res.divisibility_checks;
        if (divisibility_failure(levels, w, schedule)) ++res.divisibility_violations;
    };
    check_division(run.integral_inventory());

    const std::size_t n = static_cast<std::size_t>(d);
    while (phases_left(res, phases, options)) {
        run.begin_phase(res.phases.size());
        const std::vector<Count> levels = run.integral_inventory();
        const Count k = *std::min_element(levels.begin(), levels.end());
        const std::size_t ku = static_cast<std::size_t>(k);
        Bundle offer{std::vector<Count>(n, 0), schedule.v[ku]};
        Count picked = 0;
        for (std::size_t i = 0; i < n && picked < schedule.d[ku]; ++i) {
            if (levels[i] == k) {
                offer.counts[i] = 1;
                ++picked;
            }
        }
        if (picked < schedule.d[ku])
            throw std::logic_error("attack_small_inventory_d: only " + std::to_string(picked) +
                                   " types at the lowest level, construction needs " + std::to_string(schedule.d[ku]));
        require_range(schedule.v[ku], 1.0, 2.0, "supplier");
        TradeDecision dec = run.offer(EventKind::Supplier, offer);
        ++run.phase().supplier_steps;
        check_division(run.integral_inventory());
        PhaseRecord& ph = run.phase();
        ph.level = static_cast<int>(k);
        if (!dec.bundle) {
            Bundle ask = offer;
            ask.value = schedule.v_prime[ku];
            require_range(ask.value, 1.0, 8.0, "customer");
            run.offer(EventKind::Customer, ask);
            check_division(run.integral_inventory());
            const double units = static_cast<double>(schedule.d[ku]);
            ph.adv_profit = small_d_phase_profit(eps, schedule.v[ku]);
            ph.adversary_trades = {{EventKind::Supplier, units, g * schedule.v[ku] / units},
                                   {EventKind::Customer, units, schedule.v_prime[ku] / units}};
        }
        run.end_phase(options.tau);
    }
    run.finish(options.tau);
    return res;
}

}  // namespace bundletrade

#include "bundletrade/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bundletrade {

std::string_view to_string(EventKind kind) {
    return kind == EventKind::Customer ? "customer" : "supplier";
}

std::string_view to_string(Algorithm algorithm) {
    return algorithm == Algorithm::Trade ? "trade" : "truthful";
}

Count Bundle::size() const {
    Count total = 0;
    for (Count c : counts) total += c;
    return total;
}

std::string Violation::describe() const {
    std::ostringstream out;
    out << reason;
    if (step) out << " at step " << *step;
    if (bundle) out << ", bundle " << *bundle;
    if (item) out << ", item " << *item;
    return out.str();
}

std::vector<Violation> validate_instance(const Instance& inst) {
    std::vector<Violation> out;
    auto add = [&out](std::optional<std::size_t> t, std::optional<std::size_t> s,
                      std::optional<std::size_t> i, std::string reason) {
        out.push_back({t, s, i, std::move(reason)});
    };

    const std::size_t n = inst.catalog.size();
    if (n == 0) add({}, {}, {}, "catalog has no item types");
    for (std::size_t i = 0; i < n; ++i) {
        if (inst.catalog.caps[i] < 1) add({}, {}, i, "inventory cap < 1");
    }
    if (!(inst.eps > 0.0 && inst.eps <= 1.0)) add({}, {}, {}, "eps outside (0, 1]");
    if (!(inst.declared_v >= 1.0) || !std::isfinite(inst.declared_v))
        add({}, {}, {}, "declared v < 1");
    if (inst.declared_d < 1) add({}, {}, {}, "declared d < 1");

    for (std::size_t t = 0; t < inst.events.size(); ++t) {
        const Event& ev = inst.events[t];
        if (ev.menu.empty()) add(t, {}, {}, "empty menu");
        for (std::size_t s = 0; s < ev.menu.size(); ++s) {
            const Bundle& b = ev.menu[s];
            if (b.counts.size() != n) {
                add(t, s, {}, "bundle dimension does not match catalog");
                continue;
            }
            bool any_positive = false;
            bool negative = false;
            for (Count c : b.counts) {
                if (c < 0) negative = true;
                if (c > 0) any_positive = true;
            }
            if (negative) add(t, s, {}, "negative item count");
            if (!std::isfinite(b.value) || b.value < 0.0) {
                add(t, s, {}, "value negative or not finite");
                continue;
            }
            if (!any_positive && b.value > 0.0) add(t, s, {}, "empty bundle with positive value");
            if (ev.kind == EventKind::Customer) {
                if (b.value < 1.0) add(t, s, {}, "customer value < 1");
                if (b.value > inst.declared_v) add(t, s, {}, "customer value exceeds declared v");
                if (b.size() > inst.declared_d) add(t, s, {}, "bundle size exceeds d");
            }
        }
    }
    return out;
}

void require_valid(const Instance& inst) {
    auto violations = validate_instance(inst);
    if (!violations.empty()) {
        throw InstanceError("invalid instance: " + violations.front().describe() + " (" +
                            std::to_string(violations.size()) + " violation(s))");
    }
}

Instance normalize(const Instance& inst) {
    double vmin = std::numeric_limits<double>::infinity();
    for (const Event& ev : inst.events) {
        if (ev.kind != EventKind::Customer) continue;
        for (const Bundle& b : ev.menu) {
            if (b.value > 0.0 && b.value < vmin) vmin = b.value;
        }
    }
    Instance out = inst;
    if (!std::isfinite(vmin)) return out;
    double vmax = 1.0;
    for (Event& ev : out.events) {
        for (Bundle& b : ev.menu) {
            b.value /= vmin;
            if (ev.kind == EventKind::Customer && b.value > vmax) vmax = b.value;
        }
    }
    out.declared_v = std::max(inst.declared_v / vmin, vmax);
    if (out.declared_v < 1.0) out.declared_v = 1.0;
    return out;
}

double weighted_kl(std::span<const double> w, std::span<const double> x,
                   std::span<const double> y) {
    if (w.size() != x.size() || x.size() != y.size())
        throw std::invalid_argument("weighted_kl: dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(y[i] > 0.0)) throw std::invalid_argument("weighted_kl: nonpositive y entry");
        if (x[i] < 0.0) throw std::invalid_argument("weighted_kl: negative x entry");
        // y * f(x/y) with f(u) = u log u - u + 1, written around u = 1 so the
        // cancellation near x = y stays below rounding of the result
        double term = y[i];
        if (x[i] > 0.0) {
            double dev = (x[i] - y[i]) / y[i];
            term = y[i] * std::max(0.0, (1.0 + dev) * std::log1p(dev) - dev);
        }
        total += w[i] * term;
    }
    return total;
}

double Trace::recomputed_profit() const {
    double total = 0.0;
    for (const TraceStep& s : steps) {
        if (!s.traded) continue;
        total += s.kind == EventKind::Customer ? s.price : -s.price;
    }
    return total;
}

}  // namespace bundletrade

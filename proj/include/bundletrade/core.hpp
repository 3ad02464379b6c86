#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bundletrade {

inline constexpr double kDefaultTolerance = 1e-9;

using Count = std::int64_t;

enum class EventKind { Customer, Supplier };

std::string_view to_string(EventKind kind);

/// Per-type inventory caps. The number of item types is caps.size().
struct ItemCatalog {
    std::vector<Count> caps;

    std::size_t size() const { return caps.size(); }
    bool operator==(const ItemCatalog&) const = default;
};

/// Integer count vector plus the agent's value for it.
struct Bundle {
    std::vector<Count> counts;
    double value = 0.0;

    Count size() const;
    bool operator==(const Bundle&) const = default;
};

using Menu = std::vector<Bundle>;

struct Event {
    EventKind kind = EventKind::Customer;
    Menu menu;

    bool operator==(const Event&) const = default;
};

/// A full trading instance. Customer values are expected to be normalized so
/// that the smallest one is 1; declared_v and declared_d bound customer values
/// and customer bundle sizes.
struct Instance {
    ItemCatalog catalog;
    double eps = 1.0;
    std::vector<Event> events;
    double declared_v = 1.0;
    Count declared_d = 1;

    bool operator==(const Instance&) const = default;
};

/// One violated invariant. Step, bundle and item are present when the
/// violation can be pinned to them.
struct Violation {
    std::optional<std::size_t> step;
    std::optional<std::size_t> bundle;
    std::optional<std::size_t> item;
    std::string reason;

    std::string describe() const;
};

class InstanceError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Returns every violated instance invariant. Empty iff the instance is valid.
std::vector<Violation> validate_instance(const Instance& inst);

/// Throws InstanceError carrying the first violation, if any.
void require_valid(const Instance& inst);

/// Rescales all values (customers and suppliers) by the smallest positive
/// customer value and scales declared_v accordingly.
Instance normalize(const Instance& inst);

/// Sum_i w_i [x_i log(x_i / y_i) - x_i + y_i] with the 0 log 0 = 0 convention.
double weighted_kl(std::span<const double> w, std::span<const double> x,
                   std::span<const double> y);

/// Comparison slack: tau for O(1) magnitudes, tau * |magnitude| beyond.
inline double scaled_tolerance(double tau, double a, double b = 0.0) {
    double m = a < 0 ? -a : a;
    double mb = b < 0 ? -b : b;
    if (mb > m) m = mb;
    return m > 1.0 ? tau * m : tau;
}

enum class Algorithm { Trade, Truthful };

std::string_view to_string(Algorithm algorithm);

struct TraceStep {
    std::size_t t = 0;
    EventKind kind = EventKind::Customer;
    std::optional<std::size_t> chosen;
    bool traded = false;
    bool inventory_sold = false;  // differs from traded only in the truthful mechanism
    double P = 0.0;               // bundle price of the chosen bundle at x_before
    double price = 0.0;           // money transferred (0 when nothing traded)
    double value = 0.0;           // reported value of the chosen bundle
    std::vector<Count> r_before;
    std::vector<Count> r_after;
    std::vector<double> x_before;
    std::vector<double> x_after;

    bool operator==(const TraceStep&) const = default;
};

struct TraceParams {
    double mu = 1.0;
    double eta = 1.0;
    double delta = 0.0;
    double rho = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const TraceParams&) const = default;
};

/// Full record of one run. Carries the instance summary needed to verify the
/// run without the instance file (caps, eps, declared bounds).
struct Trace {
    Algorithm algorithm = Algorithm::Trade;
    ItemCatalog catalog;
    double eps = 1.0;
    double declared_v = 1.0;
    Count declared_d = 1;
    double tau = kDefaultTolerance;
    TraceParams params;
    std::size_t assumption_violations = 0;
    std::vector<TraceStep> steps;
    double profit = 0.0;

    /// Signed sum of step prices: charged at customer trades, paid at supplier trades.
    double recomputed_profit() const;

    bool operator==(const Trace&) const = default;
};

}  // namespace bundletrade

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "bundletrade/core.hpp"

namespace bundletrade {

/// Price-curve parameters: mu scales the curve down, eta sets its steepness.
/// v and d are the declared customer value and size bounds.
struct EngineParams {
    double mu = 1.0;
    double eta = 1.0;
    double eps = 1.0;
    double v = 1.0;
    Count d = 1;

    bool operator==(const EngineParams&) const = default;
};

/// mu = 1, eta = 1 + ln(1 + v d).
EngineParams default_params(double v, Count d, double eps);

/// Throws std::invalid_argument unless mu >= 1 and eta >= 1 + ln(1 + v d mu).
void validate_params(const EngineParams& params, double tau = kDefaultTolerance);

/// Unit price of an item type holding r out of w units:
/// (exp((1 - r/w) eta) - 1) / (d mu). Zero at full inventory.
double unit_price(const EngineParams& params, Count r, Count w);

/// Thrown when a trade would leave the inventory outside [0, w].
class EngineInvariantError : public std::logic_error {
public:
    EngineInvariantError(std::size_t step, const std::string& message);
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

enum class AssumptionMode { Strict, Warn };

struct RunOptions {
    double tau = kDefaultTolerance;
    AssumptionMode mode = AssumptionMode::Strict;
};

/// Every (t, s, i) with w_i < (8 eta / eps) a_{s,i}.
std::vector<Violation> check_large_inventory(const Instance& inst, const EngineParams& params);

/// Argmax bundle of a menu under the engine's current prices.
struct Selection {
    std::size_t index = 0;
    double bundle_price = 0.0;
    double utility = 0.0;
};

/// Online trading engine with exponential inventory-based unit prices.
/// Starts from full inventory; each step consumes one customer or supplier menu.
class TradeEngine {
public:
    TradeEngine(ItemCatalog catalog, EngineParams params, double tau = kDefaultTolerance);

    const ItemCatalog& catalog() const { return catalog_; }
    const EngineParams& params() const { return params_; }
    const std::vector<Count>& inventory() const { return r_; }
    const std::vector<double>& prices() const { return x_; }
    double price(std::size_t i) const { return x_.at(i); }
    double tau() const { return tau_; }
    std::size_t steps_taken() const { return t_; }

    double bundle_price(const Bundle& bundle) const;

    /// argmax_s v_s - max(1, p_s); lowest index wins ties.
    Selection select_customer(std::span<const Bundle> menu) const;
    /// argmax_s p_s / (1 + eps) - v_s; lowest index wins ties.
    Selection select_supplier(std::span<const Bundle> menu) const;

    /// Sells the argmax bundle at its value when its utility is >= -tau.
    TraceStep step_customer(std::span<const Bundle> menu);
    /// Buys the argmax bundle at its value when its utility is >= -tau.
    TraceStep step_supplier(std::span<const Bundle> menu);
    TraceStep step(const Event& event);

    // Inventory primitives shared with the truthful mechanism. Both advance no
    // step counter; callers record the step themselves.
    void remove_units(const Bundle& bundle);
    void add_units(const Bundle& bundle);

    /// Starts a new step record with the pre-trade state filled in.
    TraceStep open_step(EventKind kind, const Selection& sel, const Bundle& chosen) const;
    /// Fills the post-trade state and advances the step counter.
    void close_step(TraceStep& step);

private:
    void refresh_price(std::size_t i);
    void check_dimension(const Bundle& bundle) const;

    ItemCatalog catalog_;
    EngineParams params_;
    double tau_;
    std::vector<Count> r_;
    std::vector<double> x_;
    std::size_t t_ = 0;
};

/// Runs the engine over every event of the instance from full inventory.
Trace run(const Instance& inst, const EngineParams& params, const RunOptions& options = {});

}  // namespace bundletrade

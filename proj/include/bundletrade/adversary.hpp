#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bundletrade/core.hpp"
#include "bundletrade/pricing.hpp"
#include "bundletrade/truthful.hpp"

namespace bundletrade {

/// Outcome of one offer. bundle is the menu entry whose units moved (sold
/// to a customer or bought from a supplier); paid says whether money changed
/// hands. They differ only for traders that move inventory without a sale.
struct TradeDecision {
    std::optional<std::size_t> bundle;
    bool paid = false;
    double price = 0.0;
};

/// Anything that can sit on the trader's side of an attack. Inventory is
/// read white-box after every offer and may be fractional.
class Trader {
public:
    virtual ~Trader() = default;
    virtual TradeDecision on_customer(const Menu& menu) = 0;
    virtual TradeDecision on_supplier(const Menu& menu) = 0;
    virtual std::vector<double> inventory() const = 0;
    virtual std::string name() const = 0;
};

class EngineTrader : public Trader {
public:
    EngineTrader(ItemCatalog catalog, EngineParams params, double tau = kDefaultTolerance);
    TradeDecision on_customer(const Menu& menu) override;
    TradeDecision on_supplier(const Menu& menu) override;
    std::vector<double> inventory() const override;
    std::string name() const override { return "trade"; }
    const TradeEngine& engine() const { return engine_; }

private:
    TradeEngine engine_;
};

class TruthfulTrader : public Trader {
public:
    TruthfulTrader(ItemCatalog catalog, EngineParams base, double rho, double tau = kDefaultTolerance);
    TradeDecision on_customer(const Menu& menu) override;
    TradeDecision on_supplier(const Menu& menu) override;
    std::vector<double> inventory() const override;
    std::string name() const override { return "truthful"; }

private:
    TruthfulEngine engine_;
};

/// Trader living in a child process, spoken to over JSON Lines on its
/// stdin/stdout. First line sent: {"hello":{"n","w","eps","v","d"}}. Then
/// one {"kind","menu"} object per offer, answered by
/// {"choice": int|null, "paid": bool (optional), "price": float (optional),
///  "inventory": [float]}. price defaults to the chosen bundle's value.
class ExternalTrader : public Trader {
public:
    ExternalTrader(const std::string& command, const ItemCatalog& catalog, double eps, double v, Count d);
    ~ExternalTrader() override;
    ExternalTrader(const ExternalTrader&) = delete;
    ExternalTrader& operator=(const ExternalTrader&) = delete;

    TradeDecision on_customer(const Menu& menu) override;
    TradeDecision on_supplier(const Menu& menu) override;
    std::vector<double> inventory() const override { return inventory_; }
    std::string name() const override { return "custom-exe"; }

private:
    TradeDecision exchange(EventKind kind, const Menu& menu);
    void send(const std::string& line);
    std::string receive();

    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::vector<double> inventory_;
};

/// A run of inventory positions [start, end) of one item type, all at the same
/// unit cost. step is the offer index that created it (SIZE_MAX for the
/// initial inventory).
struct LifoSegment {
    double start = 0.0;
    double end = 0.0;
    double unit_cost = 0.0;
    std::size_t step = SIZE_MAX;
};

/// Per-type inventory stacks: purchases fill positions upward, sales clear
/// the top. Cost basis of a bundle is split uniformly over its units.
class LifoLedger {
public:
    explicit LifoLedger(std::size_t types = 0) : stacks_(types) {}

    std::size_t types() const { return stacks_.size(); }
    const std::vector<LifoSegment>& stack(std::size_t i) const { return stacks_.at(i); }
    double level(std::size_t i) const;
    double held_cost(std::size_t i) const;
    double held_cost() const;

    void push(std::size_t i, double units, double unit_cost, std::size_t step = SIZE_MAX);
    /// Removes units from the top; returns their cost basis. Throws
    /// std::logic_error when more units are popped than held.
    double pop(std::size_t i, double units);

private:
    std::vector<std::vector<LifoSegment>> stacks_;
};

/// One recorded offer of an interaction, with the white-box inventories
/// around it.
struct InteractionStep {
    EventKind kind = EventKind::Customer;
    Bundle bundle;
    TradeDecision decision;
    std::vector<double> before;
    std::vector<double> after;
};

/// Result of replaying an interaction through the ledger: margin is the
/// trader's cash flow plus the change in held cost basis, per offer.
struct LifoReplay {
    LifoLedger ledger;
    std::vector<double> margin;
};

/// Replays log into a fresh ledger that starts from `initial` (may be empty).
LifoReplay lifo_accounting(const std::vector<InteractionStep>& log, LifoLedger initial = LifoLedger());

/// The dyadic quantities of one price level: d = smallest power of 2
/// strictly greater than 1/x, v = x d.
struct DyadicLevel {
    double x = 0.0;
    Count d = 1;
    double v = 0.0;
};

DyadicLevel dyadic_level(double x);

/// Levels l = 0..count-1 with x_l = (1+eps)^(-2(l+1)), d_l, v_l = x_l d_l,
/// x'_l = (1+eps)^2 x_l and v'_l = x'_l d_l.
struct LevelSchedule {
    std::vector<double> x;
    std::vector<Count> d;
    std::vector<double> v;
    std::vector<double> x_prime;
    std::vector<double> v_prime;

    static LevelSchedule make(double eps, std::size_t count);
    std::size_t size() const { return x.size(); }
};

/// floor(1/2 log_{1+eps} value) - 1, robust to rounding of exact powers.
int level_count(double value, double eps);

/// Closed-form adversary profits of one phase.
double log_v_phase_profit(Count w, double eps, double v, int i_final);
double log_d_phase_profit(Count w, double eps, int i_final);
double small_v_phase_profit(double eps, double v, int y_final);
double small_d_phase_profit(double eps, double v_level);

/// Adversary-side trade, kept so profits can be recomputed independently.
struct AdversaryTrade {
    EventKind kind = EventKind::Customer;  // Supplier: adversary buys; Customer: adversary sells
    double units = 0.0;
    double unit_price = 0.0;
};

struct PhaseRecord {
    std::size_t phase = 0;
    std::size_t supplier_steps = 0;       // offers to suppliers in the phase; F is this minus one
    int level = 0;                        // i_F, Y_F or k(t)
    double adv_profit = 0.0;              // closed form
    double adv_profit_recomputed = 0.0;   // from the adversary's own trade list
    double alg_profit = 0.0;              // LIFO margin over the phase
    double alg_cash = 0.0;                // raw cash flow over the phase
    double ratio = 0.0;                   // adv / alg; inf when alg <= tau < adv, nan when both <= tau
    std::size_t steps = 0;
    std::vector<AdversaryTrade> adversary_trades;
};

struct AttackOptions {
    double tau = kDefaultTolerance;
    std::size_t max_steps = 10'000'000;    // total offer budget
    std::size_t max_total_steps = 0;       // stop at a phase boundary once reached (0: none)
    bool record_interaction = false;
};

struct AttackResult {
    std::string construction;
    int c = 0;
    Count w = 0;
    double eps = 0.0;
    double v = 0.0;
    Count d = 1;
    std::vector<PhaseRecord> phases;
    double initial_credit = 0.0;    // cost basis charged to the initial inventory
    double total_adv = 0.0;
    double total_alg_cash = 0.0;
    double total_alg_margin = 0.0;
    double final_held_cost = 0.0;
    double amortized_ratio = 0.0;   // total_adv / (total_alg_cash - initial_credit)
    double raw_ratio = 0.0;         // total_adv / total_alg_cash
    std::size_t steps = 0;
    std::size_t floor_violations = 0;        // LIFO unit-cost invariant
    std::size_t divisibility_violations = 0; // level-set divisibility
    std::size_t divisibility_checks = 0;
    std::vector<InteractionStep> interaction;
};

/// Instance header shared by an attack and the engine it is pointed at.
struct AttackSetup {
    ItemCatalog catalog;
    double v = 1.0;
    Count d = 1;
    double eps = 1.0;
};

AttackSetup log_v_setup(Count w, double eps, double v);
AttackSetup log_d_setup(Count w, double eps, Count d);
AttackSetup small_v_setup(Count w, double eps, double v);
AttackSetup small_d_setup(Count w, double eps, Count d);

AttackResult attack_log_v(Trader& trader, Count w, double eps, double v, std::size_t phases,
                          const AttackOptions& options = {});
AttackResult attack_log_d(Trader& trader, Count w, double eps, Count d, std::size_t phases,
                          const AttackOptions& options = {});
AttackResult attack_small_inventory_v(Trader& trader, Count w, double eps, double v, std::size_t phases,
                                      const AttackOptions& options = {});
AttackResult attack_small_inventory_d(Trader& trader, Count w, double eps, Count d, std::size_t phases,
                                      const AttackOptions& options = {});

/// d_i divides the number of types holding at most i units, for every i in [0, w].
/// Returns the first failing i, if any.
std::optional<std::size_t> divisibility_failure(const std::vector<Count>& levels, Count w,
                                                const LevelSchedule& schedule);

}  // namespace bundletrade

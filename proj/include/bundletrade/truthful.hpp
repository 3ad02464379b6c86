#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bundletrade/core.hpp"
#include "bundletrade/pricing.hpp"

namespace bundletrade {

/// Parameters of the posted-price mechanism. base.mu and base.eta follow the
/// mechanism's formulas; rho is the single draw used for the whole run.
struct TruthfulParams {
    EngineParams base;
    double delta = 0.0;
    double rho = 0.0;
    std::uint64_t seed = 0;
};

/// mu = (32 / eps)(1 + ln v), eta = 32 (1 + ln(1 + d v mu)), delta = eps / 8.
/// rho is left at 0; seed is stored as given.
TruthfulParams truthful_params(double v, Count d, double eps, std::uint64_t seed = 0);

/// Largest J with 2^J <= v, computed exactly.
int floor_log2(double v);

/// Finite distribution of the price shift. support[0] is (0, 1 - delta); the
/// remaining atoms are (2^j, delta / (1 + J)) for j = 0..J.
struct RhoDistribution {
    double delta = 0.0;
    int J = 0;
    std::vector<std::pair<double, double>> support;  // (value, probability)

    double total_probability() const;
};

/// delta = eps / 8, J = floor(log2 v).
RhoDistribution rho_distribution(double v, double eps);
/// Same support with an explicit delta in [0, 1]; delta = 0 puts all mass on 0.
RhoDistribution rho_distribution_with_delta(double v, double delta);

/// One draw from dist with a fresh generator seeded by seed.
double sample_rho(const RhoDistribution& dist, std::uint64_t seed);

/// Mechanism state: the trading engine's inventory and prices, plus the fixed
/// shift rho added to every customer quote.
class TruthfulEngine {
public:
    TruthfulEngine(ItemCatalog catalog, EngineParams base, double rho,
                   double tau = kDefaultTolerance);

    const TradeEngine& engine() const { return engine_; }
    double rho() const { return rho_; }

    /// Customer quote for a bundle at current prices: rho + max(1, p_s).
    double customer_quote(const Bundle& bundle) const;
    /// Supplier quote for a bundle at current prices: p_s / (1 + eps).
    double supplier_quote(const Bundle& bundle) const;

    /// Inventory moves when v_s* - max(1, P) >= -tau; the sale happens only
    /// when additionally v_s* - rho - max(1, P) >= -tau, at the quote.
    TraceStep step_customer(std::span<const Bundle> menu);
    /// Same selection and inventory move as the trading engine; pays P / (1 + eps).
    TraceStep step_supplier(std::span<const Bundle> menu);
    TraceStep step(const Event& event);

private:
    TradeEngine engine_;
    double rho_;
};

/// Runs the mechanism with rho drawn from rho_distribution(v, eps) under seed.
Trace run_truthful(const Instance& inst, std::uint64_t seed, const RunOptions& options = {});
/// Runs the mechanism with explicit parameters, rho included.
Trace run_truthful(const Instance& inst, const TruthfulParams& params,
                   const RunOptions& options = {});

/// Exact expectation over dist of the revenue collected at a customer step
/// whose inventory moved: sum of p(rho) (rho + max(1, P)) over rho <= v - max(1, P).
double expected_buy_revenue(const TraceStep& step, const RhoDistribution& dist,
                            double tau = kDefaultTolerance);

/// (1 - 2 delta) max(1, P) + delta / (2 (1 + ln v)) v_s*.
double expected_revenue_floor(const TraceStep& step, const RhoDistribution& dist, double v);

}  // namespace bundletrade

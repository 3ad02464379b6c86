#pragma once

#include <vector>

#include "bundletrade/core.hpp"
#include "bundletrade/report.hpp"

namespace bundletrade {

/// Dual variables fitted from a run. x[t] are the prices after step t - 1
/// (x[0] the initial prices), so x has T + 1 rows; ell, alpha and beta have
/// one entry per step.
struct DualSolution {
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> ell;
    std::vector<double> alpha;
    std::vector<double> beta;
    double objective = 0.0;
};

/// ell = max(0, x[t+1] - x[t]); alpha = v_s* where a customer's inventory
/// moved; beta = P - (1 + eps) v_s* where a supplier sold.
DualSolution fit_dual(const Trace& trace);

/// Sum_t Sum_i w_i ell + Sum alpha + Sum beta.
double dual_objective(const DualSolution& dual, const ItemCatalog& catalog);

/// Feasibility of dual against every bundle in every menu of inst:
///   customer_cover   a x[t+1] + alpha >= v
///   supplier_cover   a x[t+1] - beta <= (1 + eps) v
///   price_increase   ell >= x[t+1] - x[t]
///   nonnegativity    all variables >= 0
///   no_trade_prices  x unchanged at customer steps without an inventory move
///   objective        stored objective matches the variables
/// Comparisons use scaled_tolerance(tau, lhs, rhs).
Report verify_dual(const Instance& inst, const Trace& trace, const DualSolution& dual,
                   double tau = kDefaultTolerance);

/// Per-step facts of a run:
///   nonnegative_price, inventory_bounds, log_price_identity, monotone_prices,
///   sell_criterion, buy_criterion, sell_kl_bound, buy_kl_bound,
///   aggregate_balance, profit_sum.
/// The KL bounds and the aggregate balance rely on the large-inventory
/// assumption; traces run without it may fail them.
Report verify_step_inequalities(const Trace& trace, double tau = kDefaultTolerance);

struct DualGap {
    double ratio = 0.0;         // objective / max(profit, tau)
    double eta_over_eps = 0.0;  // eta / eps
    bool degenerate = false;    // profit <= tau
};

DualGap dual_gap(const Trace& trace, const DualSolution& dual, double tau = kDefaultTolerance);

}  // namespace bundletrade

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bundletrade/core.hpp"

namespace bundletrade {

enum class Sense { LessEqual, GreaterEqual, Equal };

/// Dense LP: maximize objective . x subject to rows[k] . x (sense[k]) rhs[k]
/// and lower <= x <= upper. upper may be +infinity; lower must be finite.
struct LPProblem {
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<Sense> senses;
    std::vector<double> rhs;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t num_vars() const { return objective.size(); }
    std::size_t num_rows() const { return rows.size(); }
    std::size_t add_var(double cost, double lo = 0.0,
                        double hi = std::numeric_limits<double>::infinity());
    std::size_t add_row(std::vector<double> coeffs, Sense sense, double b);
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPSolution {
    LPStatus status = LPStatus::Optimal;
    double value = 0.0;
    std::vector<double> x;
    std::size_t iterations = 0;
    double max_residual = 0.0;
    bool perturbed = false;
};

struct SimplexOptions {
    double pivot_tol = 1e-9;
    double feas_tol = 1e-9;
    double residual_tol = 1e-7;
    std::size_t max_iterations = 1000000;
};

/// Raised when the solution fails its residual check even after one retry
/// with a perturbed right-hand side.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two-phase dense tableau simplex with Bland's rule throughout.
LPSolution solve_simplex(const LPProblem& lp, const SimplexOptions& options = {});

/// Which side of the market the benchmark is handicapped on.
enum class Augmentation { Suppliers, Customers };

/// The offline benchmark LP of an instance with index maps back to the
/// instance. Columns: one y per customer bundle, one z per supplier bundle,
/// then inventory columns rbar[t][i] for t = 0..T (rbar[0] fixed to w).
/// Rows: n T inventory updates, T one-bundle limits, n T caps on rbar[0..T-1].
struct PrimalLP {
    LPProblem lp;
    std::vector<std::vector<std::size_t>> bundle_col;  // [t][s]
    std::vector<std::vector<std::size_t>> rbar_col;    // [t][i], t = 0..T
    Augmentation augmentation = Augmentation::Suppliers;
};

inline constexpr std::size_t kDefaultMaxLpVars = 2000;

/// Throws std::length_error when the LP would exceed max_vars columns.
PrimalLP build_lp(const Instance& inst, Augmentation augmentation = Augmentation::Suppliers,
                  std::size_t max_vars = kDefaultMaxLpVars);

enum class OfflineMethod { Simplex, BruteForce };

std::string_view to_string(OfflineMethod method);

struct OfflineResult {
    double value = 0.0;
    std::optional<std::vector<double>> allocation;  // bundle fractions, one per [t][s] in order
    OfflineMethod method = OfflineMethod::Simplex;
};

OfflineResult solve_lp(const PrimalLP& primal, const SimplexOptions& options = {});
/// build_lp + solve_lp.
OfflineResult offline_opt(const Instance& inst, Augmentation augmentation = Augmentation::Suppliers,
                          std::size_t max_vars = kDefaultMaxLpVars);

struct BruteForceCaps {
    std::size_t max_events = 12;
    std::size_t max_bundles = 16;
    double max_inventory_states = 1e7;
};

/// Exact optimum over integral per-event choices (skip or one bundle) with the
/// min-clamp on purchases and whole-bundle sales. Throws std::length_error
/// when any cap is exceeded.
OfflineResult brute_force_opt(const Instance& inst, Augmentation augmentation = Augmentation::Suppliers,
                              const BruteForceCaps& caps = {});

}  // namespace bundletrade

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bundletrade/core.hpp"
#include "bundletrade/pricing.hpp"

namespace bundletrade {

/// Seeded random instances. Bundle sizes are uniform on
/// [min_bundle_size, d], spread over distinct draws of types with at most
/// max_count_per_type units each. Values are log-uniform on [1, v] for both
/// sides. w is the starting cap for every type.
struct RandomFamilySpec {
    std::size_t n = 3;
    Count w = 16;
    std::size_t T = 50;
    std::size_t menu_size = 3;
    double v = 16.0;
    Count d = 2;
    double eps = 0.5;
    double customer_prob = 0.5;
    Count max_count_per_type = 1;
    Count min_bundle_size = 1;
    std::uint64_t seed = 1;
    bool ensure_assumption = false;
    Algorithm assumption_for = Algorithm::Trade;  // which eta ensure_assumption targets
};

/// Throws std::invalid_argument for infeasible specs (e.g. d above the
/// number of units a bundle can hold).
Instance generate_instance(const RandomFamilySpec& spec);

/// Engine parameters for an instance: the defaults for Trade, the
/// mechanism's mu / eta for Truthful.
EngineParams params_for(Algorithm algorithm, double v, Count d, double eps);

struct BenchSpec {
    std::vector<double> v_grid{2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
    std::vector<Count> d_grid{1};
    std::vector<double> eps_grid{0.5};
    std::size_t replicates = 4;
    RandomFamilySpec family;   // v, d, eps and seed are overridden per cell
    std::uint64_t master_seed = 1;
    Algorithm algorithm = Algorithm::Trade;
    bool solve_lp = false;     // solved only where the LP fits the size cap
    std::size_t threads = 0;   // 0: hardware concurrency
    std::string trace_dir;     // empty: keep no files
    double tau = kDefaultTolerance;
};

struct BenchRow {
    std::size_t cell = 0;
    double v = 0.0;
    Count d = 1;
    double eps = 0.0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    double profit = 0.0;
    double dual_objective = 0.0;
    std::optional<double> lp_opt;
    double ratio = 0.0;
    double eta_over_eps = 0.0;
    double ratio_normalized = 0.0;
    bool degenerate = false;
    std::size_t violations = 0;
};

/// One row per (v, d, eps, replicate) cell; order is deterministic.
std::vector<BenchRow> run_bench(const BenchSpec& spec);

/// Recomputes a row's derived columns from a stored trace; these are
/// bit-identical to the row produced when the trace was recorded.
BenchRow bench_row_from_trace(const Trace& trace, std::optional<double> lp_opt = std::nullopt,
                              double tau = kDefaultTolerance);

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);

/// "%.17g", with inf and nan spelled out.
std::string format_double(double x);

}  // namespace bundletrade

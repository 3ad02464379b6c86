#include "bundletrade/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "bundletrade/dual.hpp"
#include "bundletrade/offline.hpp"
#include "bundletrade/rng.hpp"
#include "bundletrade/serialization.hpp"
#include "bundletrade/truthful.hpp"

namespace bundletrade {

EngineParams params_for(Algorithm algorithm, double v, Count d, double eps) {
    return algorithm == Algorithm::Trade ? default_params(v, d, eps) : truthful_params(v, d, eps).base;
}

namespace {

Bundle random_bundle(Rng& rng, const RandomFamilySpec& spec) {
    Bundle b;
    b.counts.assign(spec.n, 0);
    Count size = rng.uniform_int(spec.min_bundle_size, spec.d);
    for (Count k = 0; k < size; ++k) {
        // rejection over types with room left; feasibility was checked up front
        for (;;) {
            auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(spec.n) - 1));
            if (b.counts[i] < spec.max_count_per_type) {
                ++b.counts[i];
                break;
            }
        }
    }
    b.value = std::pow(spec.v, rng.uniform01());
    return b;
}

}  // namespace

Instance generate_instance(const RandomFamilySpec& spec) {
    if (spec.n == 0) throw std::invalid_argument("random family: n must be >= 1");
    if (spec.w < 1) throw std::invalid_argument("random family: w must be >= 1");
    if (spec.menu_size == 0) throw std::invalid_argument("random family: menu size must be >= 1");
    if (!(spec.v >= 1.0)) throw std::invalid_argument("random family: v must be >= 1");
    if (spec.d < 1) throw std::invalid_argument("random family: d must be >= 1");
    if (!(spec.eps > 0.0 && spec.eps <= 1.0)) throw std::invalid_argument("random family: eps outside (0, 1]");
    if (!(spec.customer_prob >= 0.0 && spec.customer_prob <= 1.0))
        throw std::invalid_argument("random family: customer probability outside [0, 1]");
    if (spec.max_count_per_type < 1) throw std::invalid_argument("random family: max count per type must be >= 1");
    if (spec.min_bundle_size < 1 || spec.min_bundle_size > spec.d)
        throw std::invalid_argument("random family: min bundle size must lie in [1, d]");
    if (spec.d > static_cast<Count>(spec.n) * spec.max_count_per_type)
        throw std::invalid_argument("random family: d = " + std::to_string(spec.d) + " exceeds the " +
                                    std::to_string(static_cast<Count>(spec.n) * spec.max_count_per_type) +
                                    " units a bundle can hold");

    Rng rng(spec.seed);
    Instance inst;
    inst.catalog.caps.assign(spec.n, spec.w);
    inst.eps = spec.eps;
    inst.declared_v = spec.v;
    inst.declared_d = spec.d;
    inst.events.reserve(spec.T);
    for (std::size_t t = 0; t < spec.T; ++t) {
        Event ev;
        ev.kind = rng.bernoulli(spec.customer_prob) ? EventKind::Customer : EventKind::Supplier;
        for (std::size_t s = 0; s < spec.menu_size; ++s) ev.menu.push_back(random_bundle(rng, spec));
        inst.events.push_back(std::move(ev));
    }
    if (spec.ensure_assumption) {
        const EngineParams p = params_for(spec.assumption_for, spec.v, spec.d, spec.eps);
        const double factor = 8.0 * p.eta / p.eps;
        for (const Event& ev : inst.events)
            for (const Bundle& b : ev.menu)
                for (std::size_t i = 0; i < spec.n; ++i) {
                    if (b.counts[i] == 0) continue;
                    auto need = static_cast<Count>(std::ceil(factor * static_cast<double>(b.counts[i])));
                    inst.catalog.caps[i] = std::max(inst.catalog.caps[i], need);
                }
    }
    return inst;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

BenchRow bench_row_from_trace(const Trace& trace, std::optional<double> lp_opt, double tau) {
    BenchRow row;
    row.v = trace.declared_v;
    row.d = trace.declared_d;
    row.eps = trace.eps;
    row.seed = trace.params.seed;
    row.profit = trace.profit;
    DualSolution dual = fit_dual(trace);
    DualGap gap = dual_gap(trace, dual, tau);
    row.dual_objective = dual.objective;
    row.lp_opt = lp_opt;
    row.ratio = gap.ratio;
    row.eta_over_eps = gap.eta_over_eps;
    row.ratio_normalized = gap.ratio / gap.eta_over_eps;
    row.degenerate = gap.degenerate;
    row.violations = verify_step_inequalities(trace, tau).violations.size();
    return row;
}

std::string bench_csv_header() {
    return "cell,v,d,eps,replicate,seed,profit,dual_objective,lp_opt,ratio,eta_over_eps,ratio_normalized,"
           "degenerate,violations";
}

std::string bench_csv_row(const BenchRow& r) {
    std::string out;
    out += std::to_string(r.cell) + ',' + format_double(r.v) + ',' + std::to_string(r.d) + ',' +
           format_double(r.eps) + ',' + std::to_string(r.replicate) + ',' + std::to_string(r.seed) + ',' +
           format_double(r.profit) + ',' + format_double(r.dual_objective) + ',' +
           (r.lp_opt ? format_double(*r.lp_opt) : std::string()) + ',' + format_double(r.ratio) + ',' +
           format_double(r.eta_over_eps) + ',' + format_double(r.ratio_normalized) + ',' +
           (r.degenerate ? "1" : "0") + ',' + std::to_string(r.violations);
    return out;
}

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
    struct Cell {
        double v;
        Count d;
        double eps;
        std::size_t replicate;
    };
    std::vector<Cell> cells;
    for (double v : spec.v_grid)
        for (Count d : spec.d_grid)
            for (double eps : spec.eps_grid)
                for (std::size_t r = 0; r < spec.replicates; ++r) cells.push_back({v, d, eps, r});

    if (!spec.trace_dir.empty()) std::filesystem::create_directories(spec.trace_dir);

    std::vector<BenchRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= cells.size()) return;
            try {
                const Cell& cell = cells[k];
                RandomFamilySpec fam = spec.family;
                fam.v = cell.v;
                fam.d = cell.d;
                fam.eps = cell.eps;
                fam.seed = derive_seed(spec.master_seed, k);
                fam.assumption_for = spec.algorithm;
                Instance inst = generate_instance(fam);
                RunOptions opts{spec.tau, AssumptionMode::Warn};
                Trace trace = spec.algorithm == Algorithm::Trade
                                  ? run(inst, params_for(Algorithm::Trade, cell.v, cell.d, cell.eps), opts)
                                  : run_truthful(inst, fam.seed, opts);
                trace.params.seed = fam.seed;
                std::optional<double> lp;
                if (spec.solve_lp) {
                    try {
                        lp = offline_opt(inst).value;
                    } catch (const std::length_error&) {
                        lp.reset();
                    }
                }
                BenchRow row = bench_row_from_trace(trace, lp, spec.tau);
                row.cell = k;
                row.replicate = cell.replicate;
                rows[k] = row;
                if (!spec.trace_dir.empty()) {
                    const std::string stem = spec.trace_dir + "/cell_" + std::to_string(k);
                    save_instance(stem + ".instance.jsonl", inst);
                    save_trace(stem + ".trace.jsonl", trace);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cells.size());
                return;
            }
        }
    };
    std::size_t threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(1, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

}  // namespace bundletrade

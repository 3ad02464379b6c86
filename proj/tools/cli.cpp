#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bundletrade/adversary.hpp"
#include "bundletrade/dual.hpp"
#include "bundletrade/harness.hpp"
#include "bundletrade/offline.hpp"
#include "bundletrade/pricing.hpp"
#include "bundletrade/serialization.hpp"
#include "bundletrade/truthful.hpp"

namespace bundletrade::cli {

namespace {

using nlohmann::json;

/// Usage-level failure with a message meant for the user.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Applies a flat key-value JSON file to the options of sub that the command
/// line left unset. Keys are long option names without dashes; arrays become
/// multi-valued inputs.
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file " + path + ": expected a flat JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "config") throw UsageError("config file " + path + ": \"config\" cannot be nested");
        CLI::Option* opt = sub->get_option_no_throw("--" + it.key());
        if (!opt) throw UsageError("config file " + path + ": unknown option \"" + it.key() + "\" for " + sub->get_name());
        if (opt->count() > 0) continue;  // the command line wins
        auto add = [&](const json& v) {
            if (v.is_string()) opt->add_result(v.get<std::string>());
            else if (v.is_boolean()) opt->add_result(v.get<bool>() ? "true" : "false");
            else if (v.is_number()) opt->add_result(v.dump());
            else throw UsageError("config key \"" + it.key() + "\": nested values are not supported");
        };
        if (it->is_array()) {
            for (const json& v : *it) add(v);
        } else {
            add(*it);
        }
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError("config key \"" + it.key() + "\": " + e.what());
        }
    }
}

std::optional<std::uint64_t> env_seed() {
    const char* text = std::getenv("TRADING_BENCH_SEED");
    if (!text || !*text) return std::nullopt;
    char* end = nullptr;
    unsigned long long seed = std::strtoull(text, &end, 10);
    if (*end != '\0') throw UsageError(std::string("TRADING_BENCH_SEED is not an unsigned integer: ") + text);
    return seed;
}

/// Flag or config first, then the environment, then fallback (none: required).
std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t value, std::optional<std::uint64_t> fallback,
                           const char* what) {
    if (opt->count() > 0) return value;
    if (auto env = env_seed()) return *env;
    if (fallback) return *fallback;
    throw UsageError(std::string(what) + " needs a seed: pass --seed or set TRADING_BENCH_SEED");
}

// Config values bypass CLI11's validators, so enumerated choices are checked again.
void require_member(const std::string& value, const std::vector<std::string>& allowed, const char* option) {
    if (std::find(allowed.begin(), allowed.end(), value) != allowed.end()) return;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw UsageError(std::string(option) + " must be one of " + list + ", got \"" + value + "\"");
}

Algorithm parse_algorithm(const std::string& name) {
    return name == "truthful" ? Algorithm::Truthful : Algorithm::Trade;
}

Augmentation parse_augmentation(const std::string& name) {
    return name == "customers" ? Augmentation::Customers : Augmentation::Suppliers;
}

/// Writes to path, or to out when path is "-".
template <typename F>
void emit(const std::string& path, std::ostream& out, F&& write) {
    if (path == "-") {
        write(out);
        return;
    }
    std::ofstream file(path);
    if (!file) throw UsageError("cannot open " + path + " for writing");
    write(file);
}

void add_config(CLI::App* sub, std::string& path) {
    sub->add_option("--config", path, "Flat JSON file of option values; command-line flags take precedence");
}

struct Overrides {
    std::optional<double> eps;
    std::optional<double> v;
    std::optional<Count> d;

    void add(CLI::App* sub) {
        sub->add_option("--eps", eps, "Override the instance's eps");
        sub->add_option("--v", v, "Override the declared customer value bound");
        sub->add_option("--d", d, "Override the declared bundle size bound");
    }
    void apply(Instance& inst) const {
        if (eps) inst.eps = *eps;
        if (v) inst.declared_v = *v;
        if (d) inst.declared_d = *d;
    }
};

std::unique_ptr<Trader> make_trader(const std::string& kind, const AttackSetup& setup, const std::string& exe,
                                    std::uint64_t seed, double tau) {
    if (kind == "trade")
        return std::make_unique<EngineTrader>(setup.catalog, default_params(setup.v, setup.d, setup.eps), tau);
    if (kind == "truthful") {
        TruthfulParams p = truthful_params(setup.v, setup.d, setup.eps, seed);
        double rho = sample_rho(rho_distribution(setup.v, setup.eps), seed);
        return std::make_unique<TruthfulTrader>(setup.catalog, p.base, rho, tau);
    }
    if (exe.empty()) throw UsageError("--trader custom-exe needs --exe COMMAND");
    return std::make_unique<ExternalTrader>(exe, setup.catalog, setup.eps, setup.v, setup.d);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

/// Recomputes every row of dir/bench.csv from dir/cell_<k>.trace.jsonl.
int replay_bench(const std::string& dir, double tau, std::ostream& out, std::ostream& err) {
    std::ifstream csv(dir + "/bench.csv");
    if (!csv) throw UsageError("cannot open " + dir + "/bench.csv");
    std::string line;
    std::getline(csv, line);
    if (line != bench_csv_header()) throw UsageError(dir + "/bench.csv: unexpected header");
    std::size_t rows = 0;
    std::size_t mismatches = 0;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 9) throw UsageError(dir + "/bench.csv: short row");
        std::size_t cell = std::stoull(fields[0]);
        std::optional<double> lp;
        if (!fields[8].empty()) lp = std::strtod(fields[8].c_str(), nullptr);
        Trace trace = load_trace(dir + "/cell_" + std::to_string(cell) + ".trace.jsonl");
        BenchRow row = bench_row_from_trace(trace, lp, tau);
        row.cell = cell;
        row.replicate = std::stoull(fields[4]);
        std::string again = bench_csv_row(row);
        ++rows;
        if (again != line) {
            ++mismatches;
            err << "cell " << cell << ": stored  " << line << "\n        replayed " << again << '\n';
        }
    }
    out << json{{"rows", rows}, {"mismatches", mismatches}}.dump() << '\n';
    return mismatches == 0 ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Online bundle trading: generation, runs, offline optimum, verification, attacks, sweeps",
                 "trading-bench"};
    app.require_subcommand(1);

    std::string config_path;
    const std::vector<std::string> algorithms{"trade", "truthful"};
    const std::vector<std::string> augmentations{"suppliers", "customers"};

    // gen
    RandomFamilySpec fam;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "-";
    std::string gen_assumption = "trade";
    auto* gen = app.add_subcommand("gen", "Write a seeded random instance");
    add_config(gen, config_path);
    gen->add_option("--n", fam.n, "Item types")->check(CLI::PositiveNumber);
    gen->add_option("--w", fam.w, "Inventory cap per type (raised by --ensure-assumption)");
    gen->add_option("--T", fam.T, "Events");
    gen->add_option("--menu-size", fam.menu_size, "Bundles per menu");
    gen->add_option("--v", fam.v, "Value upper bound; values are log-uniform on [1, v]");
    gen->add_option("--d", fam.d, "Bundle size upper bound");
    gen->add_option("--eps", fam.eps, "Augmentation parameter in (0, 1]");
    gen->add_option("--customer-prob", fam.customer_prob, "Probability that an event is a customer");
    gen->add_option("--max-count", fam.max_count_per_type, "Units of one type per bundle");
    gen->add_option("--min-bundle-size", fam.min_bundle_size, "Bundle size lower bound");
    auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Seed (fallback: TRADING_BENCH_SEED, then 1)");
    gen->add_flag("--ensure-assumption", fam.ensure_assumption, "Raise caps to the large-inventory threshold");
    gen->add_option("--assumption-for", gen_assumption, "Whose eta the threshold uses")
        ->check(CLI::IsMember(algorithms));
    gen->add_option("--out,-o", gen_out, "Instance file ('-' for stdout)");

    // run
    std::string run_instance, run_out = "-", run_algorithm = "trade", run_mode = "strict";
    std::uint64_t run_seed = 0;
    double run_tau = kDefaultTolerance;
    Overrides run_over;
    auto* run_cmd = app.add_subcommand("run", "Run the trading engine or the truthful mechanism");
    add_config(run_cmd, config_path);
    run_cmd->add_option("--instance,-i", run_instance, "Instance file")->required();
    run_cmd->add_option("--algorithm,-a", run_algorithm, "trade or truthful")->check(CLI::IsMember(algorithms));
    auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Seed for the mechanism's rho draw");
    run_cmd->add_option("--tau", run_tau, "Tolerance")->check(CLI::PositiveNumber);
    run_cmd->add_option("--mode", run_mode, "strict rejects instances below the inventory threshold")
        ->check(CLI::IsMember({"strict", "warn"}));
    run_cmd->add_option("--out,-o", run_out, "Trace file ('-' for stdout)");
    run_over.add(run_cmd);

    // opt
    std::string opt_instance, opt_method = "auto", opt_augment = "suppliers";
    std::size_t opt_max_vars = kDefaultMaxLpVars;
    Overrides opt_over;
    auto* opt_cmd = app.add_subcommand("opt", "Offline benchmark optimum");
    add_config(opt_cmd, config_path);
    opt_cmd->add_option("--instance,-i", opt_instance, "Instance file")->required();
    opt_cmd->add_option("--method", opt_method, "simplex, brute_force, or auto (simplex)")
        ->check(CLI::IsMember({"auto", "simplex", "brute_force"}));
    opt_cmd->add_option("--augment", opt_augment, "Side whose values are inflated by (1 + eps)")
        ->check(CLI::IsMember(augmentations));
    opt_cmd->add_option("--max-vars", opt_max_vars, "LP column cap");
    opt_over.add(opt_cmd);

    // verify
    std::string ver_instance, ver_trace;
    double ver_tau = kDefaultTolerance;
    bool ver_with_opt = false;
    Overrides ver_over;
    auto* ver = app.add_subcommand("verify", "Check dual feasibility and the per-step inequalities of a run");
    add_config(ver, config_path);
    ver->add_option("--instance,-i", ver_instance, "Instance file")->required();
    ver->add_option("--trace,-t", ver_trace, "Trace file (default: run the trading engine in warn mode)");
    ver->add_option("--tau", ver_tau, "Tolerance")->check(CLI::PositiveNumber);
    ver->add_flag("--with-opt", ver_with_opt, "Also check LP optimum <= dual objective");
    ver_over.add(ver);

    // attack
    std::string atk_construction = "logv", atk_trader = "trade", atk_exe, atk_out = "-";
    std::size_t atk_phases = 10, atk_max_total = 0;
    Count atk_w = 64;
    double atk_eps = 1.0, atk_v = 256.0, atk_tau = kDefaultTolerance;
    Count atk_d = 1024;
    std::uint64_t atk_seed = 1;
    auto* atk = app.add_subcommand("attack", "Run an adaptive lower-bound adversary against a trader");
    add_config(atk, config_path);
    atk->add_option("--construction", atk_construction, "logv, logd, smallv or smalld")
        ->check(CLI::IsMember({"logv", "logd", "smallv", "smalld"}));
    atk->add_option("--phases", atk_phases, "Phases (0 with --max-total-steps: until the budget)");
    atk->add_option("--max-total-steps", atk_max_total, "Stop at the first phase boundary past this many offers");
    atk->add_option("--trader", atk_trader, "trade, truthful or custom-exe")
        ->check(CLI::IsMember({"trade", "truthful", "custom-exe"}));
    atk->add_option("--exe", atk_exe, "Shell command of the custom-exe trader");
    atk->add_option("--w", atk_w, "Inventory cap");
    atk->add_option("--eps", atk_eps, "Augmentation parameter");
    atk->add_option("--v", atk_v, "Value bound (logv, smallv)");
    atk->add_option("--d", atk_d, "Bundle size bound (logd, smalld)");
    auto* atk_seed_opt = atk->add_option("--seed", atk_seed, "Seed for the truthful trader's rho draw");
    atk->add_option("--tau", atk_tau, "Tolerance")->check(CLI::PositiveNumber);
    atk->add_option("--out,-o", atk_out, "PhaseRecord CSV ('-' for stdout)");

    // bench
    BenchSpec bench;
    std::string bench_out = "-", bench_algorithm = "trade", bench_trace_dir = "bench_traces", bench_replay;
    bool bench_no_traces = false;
    std::uint64_t bench_seed = 1;
    auto* bch = app.add_subcommand("bench", "Sweep the random family over a (v, d, eps) grid");
    add_config(bch, config_path);
    bch->add_option("--v-grid", bench.v_grid, "Value bounds")->delimiter(',');
    bch->add_option("--d-grid", bench.d_grid, "Bundle size bounds")->delimiter(',');
    bch->add_option("--eps-grid", bench.eps_grid, "Augmentation parameters")->delimiter(',');
    bch->add_option("--replicates", bench.replicates, "Instances per grid point");
    bch->add_option("--n", bench.family.n, "Item types");
    bch->add_option("--w", bench.family.w, "Starting inventory cap");
    bch->add_option("--T", bench.family.T, "Events per instance");
    bch->add_option("--menu-size", bench.family.menu_size, "Bundles per menu");
    bch->add_option("--customer-prob", bench.family.customer_prob, "Customer probability");
    bch->add_option("--max-count", bench.family.max_count_per_type, "Units of one type per bundle");
    bch->add_option("--min-bundle-size", bench.family.min_bundle_size, "Bundle size lower bound");
    bch->add_flag("--ensure-assumption", bench.family.ensure_assumption, "Raise caps to the inventory threshold");
    bch->add_option("--algorithm,-a", bench_algorithm, "trade or truthful")->check(CLI::IsMember(algorithms));
    bch->add_flag("--lp", bench.solve_lp, "Solve the offline LP where it fits the size cap");
    bch->add_option("--threads", bench.threads, "Worker threads (0: all cores)");
    bch->add_option("--tau", bench.tau, "Tolerance")->check(CLI::PositiveNumber);
    auto* bench_seed_opt = bch->add_option("--seed", bench_seed, "Master seed (fallback: TRADING_BENCH_SEED, then 1)");
    bch->add_option("--trace-dir", bench_trace_dir, "Directory for per-cell instances, traces and bench.csv");
    bch->add_flag("--no-traces", bench_no_traces, "Keep no per-cell files");
    bch->add_option("--replay", bench_replay, "Recompute DIR/bench.csv from its stored traces");
    bch->add_option("--out,-o", bench_out, "CSV output ('-' for stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        for (CLI::App* sub : app.get_subcommands())
            if (!config_path.empty()) apply_config(sub, config_path);

        require_member(gen_assumption, algorithms, "--assumption-for");
        require_member(run_algorithm, algorithms, "--algorithm");
        require_member(bench_algorithm, algorithms, "--algorithm");
        require_member(run_mode, {"strict", "warn"}, "--mode");
        require_member(opt_method, {"auto", "simplex", "brute_force"}, "--method");
        require_member(opt_augment, augmentations, "--augment");
        require_member(atk_construction, {"logv", "logd", "smallv", "smalld"}, "--construction");
        require_member(atk_trader, {"trade", "truthful", "custom-exe"}, "--trader");
        if (!(run_tau > 0.0 && ver_tau > 0.0 && atk_tau > 0.0 && bench.tau > 0.0))
            throw UsageError("--tau must be positive");

        if (*gen) {
            fam.seed = resolve_seed(gen_seed_opt, gen_seed, 1, "gen");
            fam.assumption_for = parse_algorithm(gen_assumption);
            Instance inst = generate_instance(fam);
            auto bad = validate_instance(inst);
            if (!bad.empty()) throw UsageError("generated instance is invalid: " + bad.front().describe());
            emit(gen_out, out, [&](std::ostream& o) { write_instance(o, inst); });
            return 0;
        }

        if (*run_cmd) {
            Instance inst = load_instance(run_instance);
            run_over.apply(inst);
            RunOptions opts{run_tau, run_mode == "warn" ? AssumptionMode::Warn : AssumptionMode::Strict};
            Trace trace;
            if (parse_algorithm(run_algorithm) == Algorithm::Truthful) {
                std::uint64_t seed = resolve_seed(run_seed_opt, run_seed, std::nullopt, "run --algorithm truthful");
                trace = run_truthful(inst, seed, opts);
            } else {
                trace = run(inst, default_params(inst.declared_v, inst.declared_d, inst.eps), opts);
            }
            emit(run_out, out, [&](std::ostream& o) { write_trace(o, trace); });
            json summary{{"profit", trace.profit},
                         {"steps", trace.steps.size()},
                         {"assumption_violations", trace.assumption_violations}};
            (run_out == "-" ? err : out) << summary.dump() << '\n';
            return 0;
        }

        if (*opt_cmd) {
            Instance inst = load_instance(opt_instance);
            opt_over.apply(inst);
            require_valid(inst);
            Augmentation aug = parse_augmentation(opt_augment);
            OfflineResult res = opt_method == "brute_force" ? brute_force_opt(inst, aug)
                                                            : offline_opt(inst, aug, opt_max_vars);
            out << json{{"value", res.value}, {"method", std::string(to_string(res.method))}}.dump() << '\n';
            return 0;
        }

        if (*ver) {
            Instance inst = load_instance(ver_instance);
            ver_over.apply(inst);
            Trace trace = ver_trace.empty()
                              ? run(inst, default_params(inst.declared_v, inst.declared_d, inst.eps),
                                    {ver_tau, AssumptionMode::Warn})
                              : load_trace(ver_trace);
            DualSolution dual = fit_dual(trace);
            Report dual_report = verify_dual(inst, trace, dual, ver_tau);
            Report step_report = verify_step_inequalities(trace, ver_tau);
            json result;
            result["dual"] = json::parse(report_to_json(dual_report));
            result["steps"] = json::parse(report_to_json(step_report));
            result["dual_objective"] = dual.objective;
            result["profit"] = trace.profit;
            bool ok = dual_report.ok() && step_report.ok();
            if (ver_with_opt) {
                double lp = offline_opt(inst).value;
                bool sandwich = lp <= dual.objective + scaled_tolerance(1e-6, dual.objective);
                result["lp_opt"] = lp;
                result["weak_duality"] = sandwich;
                ok = ok && sandwich;
            }
            out << result.dump() << '\n';
            return ok ? 0 : 1;
        }

        if (*atk) {
            AttackOptions opts;
            opts.tau = atk_tau;
            opts.max_total_steps = atk_max_total;
            std::uint64_t seed = atk_trader == "truthful" ? resolve_seed(atk_seed_opt, atk_seed, 1, "attack") : atk_seed;
            AttackResult res;
            if (atk_construction == "logv") {
                auto trader = make_trader(atk_trader, log_v_setup(atk_w, atk_eps, atk_v), atk_exe, seed, atk_tau);
                res = attack_log_v(*trader, atk_w, atk_eps, atk_v, atk_phases, opts);
            } else if (atk_construction == "logd") {
                auto trader = make_trader(atk_trader, log_d_setup(atk_w, atk_eps, atk_d), atk_exe, seed, atk_tau);
                res = attack_log_d(*trader, atk_w, atk_eps, atk_d, atk_phases, opts);
            } else if (atk_construction == "smallv") {
                auto trader = make_trader(atk_trader, small_v_setup(atk_w, atk_eps, atk_v), atk_exe, seed, atk_tau);
                res = attack_small_inventory_v(*trader, atk_w, atk_eps, atk_v, atk_phases, opts);
            } else {
                auto trader = make_trader(atk_trader, small_d_setup(atk_w, atk_eps, atk_d), atk_exe, seed, atk_tau);
                res = attack_small_inventory_d(*trader, atk_w, atk_eps, atk_d, atk_phases, opts);
            }
            emit(atk_out, out, [&](std::ostream& o) {
                o << "phase,i_F,adv_profit,alg_profit,ratio,alg_cash,adv_profit_recomputed,steps\n";
                for (const PhaseRecord& p : res.phases)
                    o << p.phase << ',' << p.level << ',' << format_double(p.adv_profit) << ','
                      << format_double(p.alg_profit) << ',' << format_double(p.ratio) << ','
                      << format_double(p.alg_cash) << ',' << format_double(p.adv_profit_recomputed) << ','
                      << p.steps << '\n';
            });
            json summary{{"construction", res.construction},
                         {"c", res.c},
                         {"phases", res.phases.size()},
                         {"steps", res.steps},
                         {"total_adv", res.total_adv},
                         {"total_alg_cash", res.total_alg_cash},
                         {"initial_credit", res.initial_credit},
                         {"amortized_ratio", format_double(res.amortized_ratio)},
                         {"raw_ratio", format_double(res.raw_ratio)},
                         {"floor_violations", res.floor_violations},
                         {"divisibility_violations", res.divisibility_violations},
                         {"divisibility_checks", res.divisibility_checks}};
            (atk_out == "-" ? err : out) << summary.dump() << '\n';
            return 0;
        }

        if (*bch) {
            if (!bench_replay.empty()) return replay_bench(bench_replay, bench.tau, out, err);
            bench.master_seed = resolve_seed(bench_seed_opt, bench_seed, 1, "bench");
            bench.algorithm = parse_algorithm(bench_algorithm);
            bench.trace_dir = bench_no_traces ? std::string() : bench_trace_dir;
            std::vector<BenchRow> rows = run_bench(bench);
            auto write_rows = [&](std::ostream& o) {
                o << bench_csv_header() << '\n';
                for (const BenchRow& r : rows) o << bench_csv_row(r) << '\n';
            };
            emit(bench_out, out, write_rows);
            if (!bench.trace_dir.empty()) {
                std::ofstream csv(bench.trace_dir + "/bench.csv");
                if (!csv) throw UsageError("cannot write " + bench.trace_dir + "/bench.csv");
                write_rows(csv);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        err << "trading-bench: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace bundletrade::cli

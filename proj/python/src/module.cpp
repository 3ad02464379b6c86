#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bundletrade/adversary.hpp"
#include "bundletrade/dual.hpp"
#include "bundletrade/harness.hpp"
#include "bundletrade/offline.hpp"
#include "bundletrade/pricing.hpp"
#include "bundletrade/serialization.hpp"
#include "bundletrade/truthful.hpp"

#ifndef VERSION_INFO
#define VERSION_INFO "dev"
#endif

namespace py = pybind11;
using namespace bundletrade;

namespace {

py::dict report_dict(const Report& r) {
    py::list violations;
    for (const ReportEntry& e : r.violations) {
        py::dict v;
        v["constraint"] = e.constraint;
        v["t"] = e.t ? py::cast(*e.t) : py::none();
        v["s"] = e.s ? py::cast(*e.s) : py::none();
        v["item"] = e.item ? py::cast(*e.item) : py::none();
        v["slack"] = e.slack;
        violations.append(v);
    }
    py::dict out;
    out["checked"] = r.checked;
    out["violations"] = violations;
    return out;
}

std::unique_ptr<Trader> engine_trader(const AttackSetup& s, double tau) {
    return std::make_unique<EngineTrader>(s.catalog, default_params(s.v, s.d, s.eps), tau);
}

}  // namespace

PYBIND11_MODULE(_bundletrade, m) {
    m.doc() = "Online trading of item bundles with inventory-based exponential prices";
    m.attr("__version__") = VERSION_INFO;

    py::enum_<EventKind>(m, "EventKind").value("Customer", EventKind::Customer).value("Supplier", EventKind::Supplier);
    py::enum_<Algorithm>(m, "Algorithm").value("Trade", Algorithm::Trade).value("Truthful", Algorithm::Truthful);
    py::enum_<AssumptionMode>(m, "AssumptionMode")
        .value("Strict", AssumptionMode::Strict)
        .value("Warn", AssumptionMode::Warn);
    py::enum_<Augmentation>(m, "Augmentation")
        .value("Suppliers", Augmentation::Suppliers)
        .value("Customers", Augmentation::Customers);

    py::register_exception<InstanceError>(m, "InstanceError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<EngineInvariantError>(m, "EngineInvariantError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<Bundle>(m, "Bundle")
        .def(py::init<>())
        .def(py::init([](std::vector<Count> counts, double value) { return Bundle{std::move(counts), value}; }),
             py::arg("counts"), py::arg("value"))
        .def_readwrite("counts", &Bundle::counts)
        .def_readwrite("value", &Bundle::value)
        .def("size", &Bundle::size)
        .def("__eq__", [](const Bundle& a, const Bundle& b) { return a == b; });

    py::class_<Event>(m, "Event")
        .def(py::init([](EventKind kind, Menu menu) { return Event{kind, std::move(menu)}; }), py::arg("kind"),
             py::arg("menu"))
        .def_readwrite("kind", &Event::kind)
        .def_readwrite("menu", &Event::menu);

    py::class_<Instance>(m, "Instance")
        .def(py::init([](std::vector<Count> caps, double eps, std::vector<Event> events, double v, Count d) {
                 Instance inst;
                 inst.catalog.caps = std::move(caps);
                 inst.eps = eps;
                 inst.events = std::move(events);
                 inst.declared_v = v;
                 inst.declared_d = d;
                 return inst;
             }),
             py::arg("caps"), py::arg("eps"), py::arg("events"), py::arg("v"), py::arg("d"))
        .def_property(
            "caps", [](const Instance& i) { return i.catalog.caps; },
            [](Instance& i, std::vector<Count> caps) { i.catalog.caps = std::move(caps); })
        .def_readwrite("eps", &Instance::eps)
        .def_readwrite("events", &Instance::events)
        .def_readwrite("v", &Instance::declared_v)
        .def_readwrite("d", &Instance::declared_d)
        .def("to_jsonl", &instance_to_string)
        .def_static("from_jsonl", &instance_from_string)
        .def("__eq__", [](const Instance& a, const Instance& b) { return a == b; });

    m.def("validate_instance", [](const Instance& inst) {
        std::vector<std::string> out;
        for (const Violation& v : validate_instance(inst)) out.push_back(v.describe());
        return out;
    });
    m.def("weighted_kl", [](std::vector<double> w, std::vector<double> x, std::vector<double> y) {
        return weighted_kl(w, x, y);
    });

    py::class_<EngineParams>(m, "EngineParams")
        .def(py::init<>())
        .def_readwrite("mu", &EngineParams::mu)
        .def_readwrite("eta", &EngineParams::eta)
        .def_readwrite("eps", &EngineParams::eps)
        .def_readwrite("v", &EngineParams::v)
        .def_readwrite("d", &EngineParams::d);
    m.def("default_params", &default_params, py::arg("v"), py::arg("d"), py::arg("eps"));
    m.def("unit_price", &unit_price, py::arg("params"), py::arg("r"), py::arg("w"));

    py::class_<TraceStep>(m, "TraceStep")
        .def_readonly("t", &TraceStep::t)
        .def_readonly("kind", &TraceStep::kind)
        .def_readonly("chosen", &TraceStep::chosen)
        .def_readonly("traded", &TraceStep::traded)
        .def_readonly("inventory_sold", &TraceStep::inventory_sold)
        .def_readonly("P", &TraceStep::P)
        .def_readonly("price", &TraceStep::price)
        .def_readonly("value", &TraceStep::value)
        .def_readonly("r_before", &TraceStep::r_before)
        .def_readonly("r_after", &TraceStep::r_after)
        .def_readonly("x_before", &TraceStep::x_before)
        .def_readonly("x_after", &TraceStep::x_after);

    py::class_<Trace>(m, "Trace")
        .def_readonly("steps", &Trace::steps)
        .def_readonly("profit", &Trace::profit)
        .def_readonly("assumption_violations", &Trace::assumption_violations)
        .def_property_readonly("eta", [](const Trace& t) { return t.params.eta; })
        .def_property_readonly("mu", [](const Trace& t) { return t.params.mu; })
        .def_property_readonly("rho", [](const Trace& t) { return t.params.rho; })
        .def("to_jsonl", &trace_to_string)
        .def_static("from_jsonl", &trace_from_string);

    m.def(
        "run",
        [](const Instance& inst, std::optional<EngineParams> params, double tau, AssumptionMode mode) {
            EngineParams p = params ? *params : default_params(inst.declared_v, inst.declared_d, inst.eps);
            return run(inst, p, {tau, mode});
        },
        py::arg("instance"), py::arg("params") = py::none(), py::arg("tau") = kDefaultTolerance,
        py::arg("mode") = AssumptionMode::Strict);
    m.def(
        "run_truthful",
        [](const Instance& inst, std::uint64_t seed, double tau, AssumptionMode mode) {
            return run_truthful(inst, seed, {tau, mode});
        },
        py::arg("instance"), py::arg("seed"), py::arg("tau") = kDefaultTolerance,
        py::arg("mode") = AssumptionMode::Strict);
    m.def("truthful_params", [](double v, Count d, double eps) { return truthful_params(v, d, eps).base; },
          py::arg("v"), py::arg("d"), py::arg("eps"));
    m.def(
        "rho_distribution", [](double v, double eps) { return rho_distribution(v, eps).support; }, py::arg("v"),
        py::arg("eps"));

    py::class_<DualSolution>(m, "DualSolution")
        .def_readonly("x", &DualSolution::x)
        .def_readonly("ell", &DualSolution::ell)
        .def_readonly("alpha", &DualSolution::alpha)
        .def_readonly("beta", &DualSolution::beta)
        .def_readonly("objective", &DualSolution::objective);
    m.def("fit_dual", &fit_dual, py::arg("trace"));
    m.def(
        "verify_dual",
        [](const Instance& inst, const Trace& trace, const DualSolution& dual, double tau) {
            return report_dict(verify_dual(inst, trace, dual, tau));
        },
        py::arg("instance"), py::arg("trace"), py::arg("dual"), py::arg("tau") = kDefaultTolerance);
    m.def(
        "verify_step_inequalities",
        [](const Trace& trace, double tau) { return report_dict(verify_step_inequalities(trace, tau)); },
        py::arg("trace"), py::arg("tau") = kDefaultTolerance);

    m.def(
        "offline_opt",
        [](const Instance& inst, Augmentation aug) { return offline_opt(inst, aug).value; }, py::arg("instance"),
        py::arg("augmentation") = Augmentation::Suppliers);
    m.def(
        "brute_force_opt",
        [](const Instance& inst, Augmentation aug) { return brute_force_opt(inst, aug).value; },
        py::arg("instance"), py::arg("augmentation") = Augmentation::Suppliers);

    py::class_<RandomFamilySpec>(m, "RandomFamilySpec")
        .def(py::init<>())
        .def_readwrite("n", &RandomFamilySpec::n)
        .def_readwrite("w", &RandomFamilySpec::w)
        .def_readwrite("T", &RandomFamilySpec::T)
        .def_readwrite("menu_size", &RandomFamilySpec::menu_size)
        .def_readwrite("v", &RandomFamilySpec::v)
        .def_readwrite("d", &RandomFamilySpec::d)
        .def_readwrite("eps", &RandomFamilySpec::eps)
        .def_readwrite("customer_prob", &RandomFamilySpec::customer_prob)
        .def_readwrite("max_count_per_type", &RandomFamilySpec::max_count_per_type)
        .def_readwrite("min_bundle_size", &RandomFamilySpec::min_bundle_size)
        .def_readwrite("seed", &RandomFamilySpec::seed)
        .def_readwrite("ensure_assumption", &RandomFamilySpec::ensure_assumption)
        .def_readwrite("assumption_for", &RandomFamilySpec::assumption_for);
    m.def("generate_instance", &generate_instance, py::arg("spec"));

    py::class_<PhaseRecord>(m, "PhaseRecord")
        .def_readonly("phase", &PhaseRecord::phase)
        .def_readonly("level", &PhaseRecord::level)
        .def_readonly("adv_profit", &PhaseRecord::adv_profit)
        .def_readonly("adv_profit_recomputed", &PhaseRecord::adv_profit_recomputed)
        .def_readonly("alg_profit", &PhaseRecord::alg_profit)
        .def_readonly("alg_cash", &PhaseRecord::alg_cash)
        .def_readonly("ratio", &PhaseRecord::ratio)
        .def_readonly("steps", &PhaseRecord::steps);
    py::class_<AttackResult>(m, "AttackResult")
        .def_readonly("construction", &AttackResult::construction)
        .def_readonly("c", &AttackResult::c)
        .def_readonly("phases", &AttackResult::phases)
        .def_readonly("initial_credit", &AttackResult::initial_credit)
        .def_readonly("total_adv", &AttackResult::total_adv)
        .def_readonly("total_alg_cash", &AttackResult::total_alg_cash)
        .def_readonly("amortized_ratio", &AttackResult::amortized_ratio)
        .def_readonly("raw_ratio", &AttackResult::raw_ratio)
        .def_readonly("steps", &AttackResult::steps)
        .def_readonly("floor_violations", &AttackResult::floor_violations)
        .def_readonly("divisibility_violations", &AttackResult::divisibility_violations);

    // Attacks against the reference engine with its default parameters.
    m.def(
        "attack_log_v",
        [](Count w, double eps, double v, std::size_t phases, double tau) {
            auto trader = engine_trader(log_v_setup(w, eps, v), tau);
            return attack_log_v(*trader, w, eps, v, phases, {tau});
        },
        py::arg("w"), py::arg("eps"), py::arg("v"), py::arg("phases"), py::arg("tau") = kDefaultTolerance);
    m.def(
        "attack_log_d",
        [](Count w, double eps, Count d, std::size_t phases, double tau) {
            auto trader = engine_trader(log_d_setup(w, eps, d), tau);
            return attack_log_d(*trader, w, eps, d, phases, {tau});
        },
        py::arg("w"), py::arg("eps"), py::arg("d"), py::arg("phases"), py::arg("tau") = kDefaultTolerance);
    m.def(
        "attack_small_inventory_v",
        [](Count w, double eps, double v, std::size_t phases, double tau) {
            auto trader = engine_trader(small_v_setup(w, eps, v), tau);
            return attack_small_inventory_v(*trader, w, eps, v, phases, {tau});
        },
        py::arg("w"), py::arg("eps"), py::arg("v"), py::arg("phases"), py::arg("tau") = kDefaultTolerance);
    m.def(
        "attack_small_inventory_d",
        [](Count w, double eps, Count d, std::size_t phases, std::size_t max_total_steps, double tau) {
            auto trader = engine_trader(small_d_setup(w, eps, d), tau);
            AttackOptions opts;
            opts.tau = tau;
            opts.max_total_steps = max_total_steps;
            return attack_small_inventory_d(*trader, w, eps, d, phases, opts);
        },
        py::arg("w"), py::arg("eps"), py::arg("d"), py::arg("phases"), py::arg("max_total_steps") = 0,
        py::arg("tau") = kDefaultTolerance);
}

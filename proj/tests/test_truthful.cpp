#include <cmath>
#include <map>

#include "doctest.h"

#include "bundletrade/harness.hpp"
#include "bundletrade/rng.hpp"
#include "bundletrade/truthful.hpp"

using namespace bundletrade;

namespace {

Bundle unit(double value, Count count = 1) { return Bundle{{count}, value}; }

// d = mu = 1, w = 2 and one unit sold: the unit price is e^{eta / 2} - 1.
EngineParams params_with_half_price(double price) {
    EngineParams p;
    p.eps = 0.5;
    p.v = 8;
    p.eta = 2.0 * std::log1p(price);
    return p;
}

TraceStep sold_step(double P, double value) {
    TraceStep s;
    s.kind = EventKind::Customer;
    s.inventory_sold = true;
    s.P = P;
    s.value = value;
    return s;
}

}  // namespace

TEST_SUITE("truthful") {

TEST_CASE("truthful_params formulas") {
    TruthfulParams p = truthful_params(8, 2, 0.5, 7);
    const double mu = 32.0 / 0.5 * (1.0 + std::log(8.0));
    CHECK(p.base.mu == doctest::Approx(mu).epsilon(1e-15));
    CHECK(p.base.eta == doctest::Approx(32.0 * (1.0 + std::log(1.0 + 2 * 8 * mu))).epsilon(1e-15));
    CHECK(p.delta == 0.0625);
    CHECK(p.seed == 7);
    CHECK_NOTHROW(validate_params(p.base));
}

TEST_CASE("floor_log2 is exact at powers of two") {
    CHECK(floor_log2(1) == 0);
    CHECK(floor_log2(1.999) == 0);
    CHECK(floor_log2(2) == 1);
    CHECK(floor_log2(8) == 3);
    CHECK(floor_log2(1023.9) == 9);
    CHECK(floor_log2(1024) == 10);
    CHECK(floor_log2(std::ldexp(1.0, 60)) == 60);
    CHECK_THROWS_AS(floor_log2(0.5), std::invalid_argument);
}

TEST_CASE("rho distribution for v = 8, eps = 0.8") {
    RhoDistribution dist = rho_distribution(8, 0.8);
    CHECK(dist.delta == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(dist.J == 3);
    REQUIRE(dist.support.size() == 5);
    const double values[] = {0, 1, 2, 4, 8};
    const double probs[] = {0.9, 0.025, 0.025, 0.025, 0.025};
    for (int k = 0; k < 5; ++k) {
        CHECK(dist.support[k].first == values[k]);
        CHECK(dist.support[k].second == doctest::Approx(probs[k]).epsilon(1e-14));
    }
}

TEST_CASE("rho probabilities sum to one") {
    for (double v : {1.0, 3.0, 8.0, 100.0, 1e6})
        for (double eps : {0.01, 0.5, 1.0})
            CHECK(rho_distribution(v, eps).total_probability() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("v = 1 has a single threshold") {
    RhoDistribution dist = rho_distribution(1, 0.4);
    CHECK(dist.J == 0);
    REQUIRE(dist.support.size() == 2);
    CHECK(dist.support[0] == std::pair<double, double>{0.0, 1.0 - 0.05});
    CHECK(dist.support[1] == std::pair<double, double>{1.0, 0.05});
}

TEST_CASE("delta = 0 always draws 0") {
    RhoDistribution dist = rho_distribution_with_delta(64, 0.0);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) CHECK(sample_rho(dist, seed) == 0.0);
}

TEST_CASE("sample_rho is reproducible and only returns atoms") {
    RhoDistribution dist = rho_distribution(64, 1.0);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        double a = sample_rho(dist, seed);
        CHECK(a == sample_rho(dist, seed));
        bool atom = false;
        for (const auto& s : dist.support) atom |= s.first == a;
        CHECK(atom);
    }
}

TEST_CASE("frequency of rho = 0 matches 1 - delta") {
    RhoDistribution dist = rho_distribution_with_delta(8, 0.1);
    std::map<double, int> counts;
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) ++counts[sample_rho(dist, derive_seed(12345, k))];
    CHECK(counts[0.0] / double(draws) == doctest::Approx(0.9).epsilon(0.01 / 0.9));
    for (double atom : {1.0, 2.0, 4.0, 8.0}) CHECK(counts[atom] / double(draws) == doctest::Approx(0.025).epsilon(0.2));
}

TEST_CASE("customer with rho = 2 moves inventory without a sale") {
    TruthfulEngine eng(ItemCatalog{{2}}, params_with_half_price(1.5), 2.0);
    // bring r to 1 through a first customer paying rho + max(1, 0) = 3
    TraceStep first = eng.step_customer(Menu{unit(3.0)});
    CHECK(first.traded);
    CHECK(first.price == 3.0);
    CHECK(eng.engine().price(0) == doctest::Approx(1.5).epsilon(1e-14));
    TraceStep s = eng.step_customer(Menu{unit(3.0)});
    CHECK(s.inventory_sold);
    CHECK_FALSE(s.traded);
    CHECK(s.price == 0.0);
    CHECK(s.r_after[0] == 0);
}

TEST_CASE("customer with rho = 1 buys at rho + max(1, P)") {
    TruthfulEngine eng(ItemCatalog{{2}}, params_with_half_price(1.5), 1.0);
    eng.step_customer(Menu{unit(3.0)});
    TraceStep s = eng.step_customer(Menu{unit(3.0)});
    CHECK(s.inventory_sold);
    CHECK(s.traded);
    CHECK(s.price == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(eng.customer_quote(unit(1.0)) == doctest::Approx(1.0 + (std::exp(std::log1p(1.5) * 2.0) - 1.0)).epsilon(1e-12));
}

TEST_CASE("rho = 0 collapses to the known-valuation engine") {
    TruthfulEngine eng(ItemCatalog{{2}}, params_with_half_price(1.5), 0.0);
    eng.step_customer(Menu{unit(2.0)});
    TraceStep s = eng.step_customer(Menu{unit(2.0)});
    CHECK(s.traded == s.inventory_sold);
    CHECK(s.price == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("supplier is paid P / (1 + eps)") {
    // unit price 3 at r = 1, bundle of 2 units: P = 6, pays 4
    TruthfulEngine eng(ItemCatalog{{2}}, params_with_half_price(3.0), 0.0);
    eng.step_customer(Menu{unit(8.0)});
    TraceStep s = eng.step_supplier(Menu{unit(3.0, 2)});
    CHECK(s.traded);
    CHECK(s.price == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(eng.supplier_quote(unit(0, 2)) == 0.0);  // back to full inventory
}

TEST_CASE("supplier at the break-even value is paid exactly the quote") {
    TruthfulEngine eng(ItemCatalog{{2}}, params_with_half_price(3.0), 0.0);
    eng.step_customer(Menu{unit(8.0)});
    double quote = eng.supplier_quote(unit(0, 2));
    TraceStep s = eng.step_supplier(Menu{unit(quote, 2)});
    CHECK(s.traded);
    CHECK(s.price == quote);
}

TEST_CASE("supplier at full inventory never trades") {
    TruthfulEngine eng(ItemCatalog{{2}}, params_with_half_price(3.0), 0.0);
    CHECK_FALSE(eng.step_supplier(Menu{unit(0.01)}).traded);
}

TEST_CASE("empty instance earns nothing") {
    Instance inst;
    inst.catalog.caps = {5};
    CHECK(run_truthful(inst, 3).profit == 0.0);
}

TEST_CASE("coupling with the engine under the mechanism's parameters") {
    for (std::uint64_t k = 0; k < 10; ++k) {
        RandomFamilySpec fam;
        fam.n = 3;
        fam.T = 60;
        fam.v = 16;
        fam.d = 2;
        fam.seed = 1000 + k;
        Instance inst = generate_instance(fam);
        Trace ref = run(inst, truthful_params(16, 2, 0.5).base, {kDefaultTolerance, AssumptionMode::Warn});
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            Trace tr = run_truthful(inst, seed, {kDefaultTolerance, AssumptionMode::Warn});
            REQUIRE(tr.steps.size() == ref.steps.size());
            for (std::size_t t = 0; t < tr.steps.size(); ++t) {
                CHECK(tr.steps[t].r_after == ref.steps[t].r_after);
                CHECK(tr.steps[t].x_after == ref.steps[t].x_after);
                CHECK(tr.steps[t].chosen == ref.steps[t].chosen);
                CHECK(tr.steps[t].inventory_sold == ref.steps[t].inventory_sold);
            }
        }
    }
}

TEST_CASE("expected revenue at a break-even value") {
    RhoDistribution dist = rho_distribution(8, 0.8);
    TraceStep s = sold_step(1.5, 1.5);
    CHECK(expected_buy_revenue(s, dist) == doctest::Approx(0.9 * 1.5).epsilon(1e-15));
    CHECK(expected_buy_revenue(s, dist) >= expected_revenue_floor(s, dist, 8));
}

TEST_CASE("expected revenue one above the floor") {
    RhoDistribution dist = rho_distribution(8, 0.8);
    TraceStep s = sold_step(1.5, 2.5);
    const double expected = 0.9 * 1.5 + 0.025 * 2.5;
    CHECK(expected_buy_revenue(s, dist) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(expected_buy_revenue(s, dist) >= expected_revenue_floor(s, dist, 8));
}

TEST_CASE("expected revenue with delta = 0") {
    RhoDistribution dist = rho_distribution_with_delta(8, 0.0);
    TraceStep s = sold_step(0.3, 7.0);
    CHECK(expected_buy_revenue(s, dist) == 1.0);
    CHECK(expected_revenue_floor(s, dist, 8) == 1.0);
}

TEST_CASE("expected revenue matches a direct sum over a value grid") {
    for (double v : {1.0, 5.0, 64.0, 1000.0}) {
        RhoDistribution dist = rho_distribution(v, 0.5);
        for (double P : {0.0, 0.7, 1.0, 3.0})
            for (double value = 1.0; value <= v; value *= 1.37) {
                if (value < std::max(1.0, P)) continue;
                TraceStep s = sold_step(P, value);
                long double ref = 0.0L;
                for (const auto& [rho, prob] : dist.support)
                    if (std::max(1.0, P) + rho <= value + 1e-9) ref += static_cast<long double>(prob) * (rho + std::max(1.0, P));
                CHECK(expected_buy_revenue(s, dist) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-14));
                CHECK(expected_buy_revenue(s, dist) >= expected_revenue_floor(s, dist, v) - 1e-9);
            }
    }
}

}  // TEST_SUITE truthful

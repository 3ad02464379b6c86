#include <cmath>

#include "doctest.h"

#include "bundletrade/adversary.hpp"

using namespace bundletrade;

namespace {

EngineTrader engine_for(const AttackSetup& s) {
    return EngineTrader(s.catalog, default_params(s.v, s.d, s.eps));
}

}  // namespace

TEST_SUITE("adversary") {

TEST_CASE("level count for eps = 1, v = 256") {
    CHECK(level_count(256, 1) == 3);
    CHECK(level_count(1024, 1) == 4);
    CHECK(level_count(std::pow(1.5, 8), 0.5) == 3);  // exact power despite rounding
}

TEST_CASE("closed-form phase profits") {
    CHECK(log_v_phase_profit(4, 1, 256, 0) == 512.0);
    CHECK(log_d_phase_profit(256, 1, 0) == 128.0);
    CHECK(small_v_phase_profit(1, 16, 0) == 8.0);
    CHECK(small_d_phase_profit(0.5, 1.2) == doctest::Approx(0.9));
    CHECK(log_v_phase_profit(64, 1, 256, 2) == doctest::Approx(64.0 * 256 / 32));
}

TEST_CASE("dyadic levels") {
    LevelSchedule s = LevelSchedule::make(1.0, 3);
    CHECK(s.x[0] == 0.25);
    CHECK(s.d[0] == 8);
    CHECK(s.v[0] == 2.0);
    CHECK(s.x_prime[0] == 1.0);
    CHECK(s.d[1] == 32);
    CHECK(dyadic_level(0.3).d == 4);
    CHECK(dyadic_level(1.0).d == 2);
    for (std::size_t l = 0; l < s.size(); ++l) {
        CHECK(s.v[l] > 1.0);
        CHECK(s.v[l] <= 2.0);
    }
    CHECK_THROWS_AS(dyadic_level(0.0), std::invalid_argument);
}

TEST_CASE("LIFO ledger: the sold unit is the last one bought") {
    LifoLedger ledger(1);
    ledger.push(0, 1, 5.0, 0);
    ledger.push(0, 1, 6.0, 1);
    ledger.push(0, 1, 7.0, 2);
    CHECK(ledger.level(0) == 3.0);
    CHECK(ledger.pop(0, 1) == 7.0);
    CHECK(ledger.held_cost() == 11.0);
    CHECK(ledger.stack(0).back().step == 1);
    CHECK(ledger.pop(0, 1.5) == doctest::Approx(6.0 + 2.5));
    CHECK_THROWS_AS(ledger.pop(0, 1.0), std::logic_error);
}

TEST_CASE("LIFO replay of an empty interaction is empty") {
    LifoReplay replay = lifo_accounting({});
    CHECK(replay.ledger.types() == 0);
    CHECK(replay.margin.empty());
}

TEST_CASE("LIFO replay splits bundle cost evenly and books margins") {
    std::vector<InteractionStep> log;
    InteractionStep buy;
    buy.kind = EventKind::Supplier;
    buy.bundle = Bundle{{2}, 3.0};
    buy.decision = {0, true, 3.0};
    buy.before = {0};
    buy.after = {2};
    log.push_back(buy);
    InteractionStep sell;
    sell.kind = EventKind::Customer;
    sell.bundle = Bundle{{1}, 4.0};
    sell.decision = {0, true, 4.0};
    sell.before = {2};
    sell.after = {1};
    log.push_back(sell);
    LifoReplay r = lifo_accounting(log, LifoLedger(1));
    REQUIRE(r.margin.size() == 2);
    CHECK(r.margin[0] == 0.0);          // cash out equals cost basis in
    CHECK(r.margin[1] == 4.0 - 1.5);
    CHECK(r.ledger.held_cost() == 1.5);
}

TEST_CASE("logv attack against the engine") {
    AttackSetup s = log_v_setup(64, 1, 256);
    EngineTrader trader = engine_for(s);
    AttackResult res = attack_log_v(trader, 64, 1, 256, 12);
    CHECK(res.c == 3);
    CHECK(res.phases.size() == 12);
    CHECK(res.floor_violations == 0);
    for (const PhaseRecord& p : res.phases) {
        CHECK(p.adv_profit == doctest::Approx(log_v_phase_profit(64, 1, 256, p.level)));
        CHECK(p.adv_profit_recomputed == doctest::Approx(p.adv_profit).epsilon(1e-12));
        CHECK(p.alg_profit <= 2.0 / res.c * p.adv_profit + 1e-9);
        CHECK(p.level >= 0);
        CHECK(p.level <= res.c);
    }
    CHECK(res.amortized_ratio >= res.c / 2.0);
}

TEST_CASE("logv interaction replays to the phase margins") {
    AttackSetup s = log_v_setup(16, 1, 256);
    EngineTrader trader = engine_for(s);
    AttackOptions opts;
    opts.record_interaction = true;
    AttackResult res = attack_log_v(trader, 16, 1, 256, 4, opts);
    REQUIRE(res.interaction.size() == res.steps);
    double cash = 0.0;
    for (const auto& st : res.interaction)
        if (st.decision.paid) cash += st.kind == EventKind::Customer ? st.decision.price : -st.decision.price;
    CHECK(cash == doctest::Approx(res.total_alg_cash).epsilon(1e-12));
}

TEST_CASE("logd attack against the engine") {
    AttackSetup s = log_d_setup(512, 1, 256);
    EngineTrader trader = engine_for(s);
    AttackResult res = attack_log_d(trader, 512, 1, 256, 10);
    CHECK(res.c == 3);
    CHECK(res.floor_violations == 0);
    for (const PhaseRecord& p : res.phases) {
        CHECK(p.adv_profit == doctest::Approx(log_d_phase_profit(512, 1, p.level)));
        CHECK(p.adv_profit_recomputed == doctest::Approx(p.adv_profit).epsilon(1e-12));
        CHECK(p.alg_profit <= 2.0 / res.c * p.adv_profit + 1e-9);
    }
}

TEST_CASE("logd rejects caps that level bundles do not divide") {
    AttackSetup s = log_d_setup(100, 1, 256);
    EngineTrader trader = engine_for(s);
    CHECK_THROWS_AS(attack_log_d(trader, 100, 1, 256, 1), std::invalid_argument);
}

TEST_CASE("small-inventory value attack: the engine never profits") {
    AttackSetup s = small_v_setup(4, 1, 1024);
    EngineTrader trader = engine_for(s);
    AttackResult res = attack_small_inventory_v(trader, 4, 1, 1024, 30);
    for (const PhaseRecord& p : res.phases) {
        CHECK(p.adv_profit > 0.0);
        CHECK(p.alg_profit <= 1e-9);
        CHECK(p.supplier_steps <= 4 + 1);
        CHECK(p.adv_profit == doctest::Approx(small_v_phase_profit(1, 1024, p.level)));
        CHECK(std::isinf(p.ratio));
    }
}

TEST_CASE("small-inventory value attack needs w below the level bound") {
    AttackSetup s = small_v_setup(5, 1, 1024);
    EngineTrader trader = engine_for(s);
    CHECK_THROWS_AS(attack_small_inventory_v(trader, 5, 1, 1024, 1), std::invalid_argument);
}

TEST_CASE("divisibility holds at full inventory and after a level purchase") {
    LevelSchedule s = LevelSchedule::make(0.5, 4);
    const Count w = 3;
    const std::size_t n = 1024;
    std::vector<Count> levels(n, w);
    CHECK_FALSE(divisibility_failure(levels, w, s));
    // selling to the lowest level removes d_0 types from level 3 to level 2
    std::vector<Count> after = levels;
    for (Count k = 0; k < s.d[2]; ++k) after[static_cast<std::size_t>(k)] = 2;
    CHECK_FALSE(divisibility_failure(after, w, s));
    after[static_cast<std::size_t>(s.d[2])] = 2;
    CHECK(divisibility_failure(after, w, s).has_value());
}

TEST_CASE("small-inventory size attack keeps divisibility and strands the engine") {
    AttackSetup s = small_d_setup(3, 0.5, 1024);
    EngineTrader trader = engine_for(s);
    AttackOptions opts;
    opts.max_total_steps = 2000;
    AttackResult res = attack_small_inventory_d(trader, 3, 0.5, 1024, 0, opts);
    CHECK(res.steps >= 2000);
    CHECK(res.divisibility_checks == res.steps + 1);
    CHECK(res.divisibility_violations == 0);
    LevelSchedule sched = LevelSchedule::make(0.5, static_cast<std::size_t>(res.c) + 1);
    for (const PhaseRecord& p : res.phases) {
        CHECK(p.alg_profit <= 1e-9);
        CHECK(p.adv_profit_recomputed == doctest::Approx(p.adv_profit).epsilon(1e-12));
        if (p.steps == 2)
            CHECK(p.adv_profit == doctest::Approx(small_d_phase_profit(0.5, sched.v[p.level])).epsilon(1e-12));
    }
}

TEST_CASE("truthful trader under the logv attack") {
    AttackSetup s = log_v_setup(64, 1, 256);
    TruthfulParams p = truthful_params(s.v, s.d, s.eps);
    TruthfulTrader trader(s.catalog, p.base, 0.0);
    AttackResult res = attack_log_v(trader, 64, 1, 256, 3);
    CHECK(res.phases.size() == 3);
    for (const PhaseRecord& r : res.phases) CHECK(r.adv_profit_recomputed == doctest::Approx(r.adv_profit));
}

TEST_CASE("external trader over pipes") {
    // refuses every offer and reports full inventory
    const std::string script =
        "while read line; do case \"$line\" in *hello*) ;; *) echo '{\"choice\":null,\"inventory\":[64]}';; esac; done";
    AttackSetup s = log_v_setup(64, 1, 256);
    ExternalTrader trader(script, s.catalog, s.eps, s.v, s.d);
    AttackResult res = attack_log_v(trader, 64, 1, 256, 2);
    CHECK(res.phases.size() == 2);
    CHECK(res.total_alg_cash == 0.0);
    for (const PhaseRecord& p : res.phases) CHECK(p.alg_profit == 0.0);
}

TEST_CASE("a trader misreporting its inventory is rejected") {
    const std::string script =
        "while read line; do case \"$line\" in *hello*) ;; *) echo '{\"choice\":null,\"inventory\":[63]}';; esac; done";
    AttackSetup s = log_v_setup(64, 1, 256);
    ExternalTrader trader(script, s.catalog, s.eps, s.v, s.d);
    CHECK_THROWS(attack_log_v(trader, 64, 1, 256, 1));
}

TEST_CASE("an external trader that exits is reported") {
    AttackSetup s = log_v_setup(64, 1, 256);
    ExternalTrader trader("exit 0", s.catalog, s.eps, s.v, s.d);
    CHECK_THROWS_AS(attack_log_v(trader, 64, 1, 256, 1), std::runtime_error);
}

}  // TEST_SUITE adversary

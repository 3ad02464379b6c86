#include <array>
#include <cmath>

#include "doctest.h"

#include "bundletrade/harness.hpp"
#include "bundletrade/offline.hpp"
#include "bundletrade/rng.hpp"

using namespace bundletrade;

namespace {

Instance three_event_example() {
    Instance inst;
    inst.catalog.caps = {1};
    inst.eps = 0.5;
    inst.declared_v = 3;
    inst.events.push_back({EventKind::Customer, {Bundle{{1}, 3.0}}});
    inst.events.push_back({EventKind::Supplier, {Bundle{{1}, 1.0}}});
    inst.events.push_back({EventKind::Customer, {Bundle{{1}, 3.0}}});
    return inst;
}

// Maximum of c.x over the vertices of a 2-variable polygon given by rows <= b
// and x >= 0: every pair of tight constraints is tried.
double vertex_oracle(const std::vector<std::array<double, 2>>& rows, const std::vector<double>& b,
                     const std::array<double, 2>& c) {
    std::vector<std::array<double, 3>> lines;
    for (std::size_t k = 0; k < rows.size(); ++k) lines.push_back({rows[k][0], rows[k][1], b[k]});
    lines.push_back({-1, 0, 0});
    lines.push_back({0, -1, 0});
    double best = -INFINITY;
    for (std::size_t p = 0; p < lines.size(); ++p)
        for (std::size_t q = p + 1; q < lines.size(); ++q) {
            double det = lines[p][0] * lines[q][1] - lines[p][1] * lines[q][0];
            if (std::fabs(det) < 1e-14) continue;
            double x = (lines[p][2] * lines[q][1] - lines[p][1] * lines[q][2]) / det;
            double y = (lines[p][0] * lines[q][2] - lines[p][2] * lines[q][0]) / det;
            bool ok = x >= -1e-9 && y >= -1e-9;
            for (const auto& l : lines) ok = ok && l[0] * x + l[1] * y <= l[2] + 1e-9;
            if (ok) best = std::max(best, c[0] * x + c[1] * y);
        }
    return best;
}

bool integral(const std::vector<double>& xs) {
    for (double x : xs)
        if (std::fabs(x - std::round(x)) > 1e-7) return false;
    return true;
}

}  // namespace

TEST_SUITE("offline") {

TEST_CASE("simplex smoke: maximize 3y with y <= 1") {
    LPProblem lp;
    lp.add_var(3.0);
    lp.add_row({1.0}, Sense::LessEqual, 1.0);
    LPSolution sol = solve_simplex(lp);
    CHECK(sol.status == LPStatus::Optimal);
    CHECK(sol.value == doctest::Approx(3.0));
    CHECK(sol.x[0] == doctest::Approx(1.0));
}

TEST_CASE("simplex terminates on a classic cycling example") {
    LPProblem lp;
    for (double c : {0.75, -20.0, 0.5, -6.0}) lp.add_var(c);
    lp.add_row({0.25, -8.0, -1.0, 9.0}, Sense::LessEqual, 0.0);
    lp.add_row({0.5, -12.0, -0.5, 3.0}, Sense::LessEqual, 0.0);
    lp.add_row({0.0, 0.0, 1.0, 0.0}, Sense::LessEqual, 1.0);
    LPSolution sol = solve_simplex(lp);
    CHECK(sol.status == LPStatus::Optimal);
    CHECK(sol.value == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("simplex reports infeasible and unbounded problems") {
    LPProblem infeasible;
    infeasible.add_var(1.0);
    infeasible.add_row({1.0}, Sense::GreaterEqual, 2.0);
    infeasible.add_row({1.0}, Sense::LessEqual, 1.0);
    CHECK(solve_simplex(infeasible).status == LPStatus::Infeasible);

    LPProblem unbounded;
    unbounded.add_var(1.0);
    unbounded.add_var(0.0);
    unbounded.add_row({1.0, -1.0}, Sense::LessEqual, 1.0);
    CHECK(solve_simplex(unbounded).status == LPStatus::Unbounded);
}

TEST_CASE("simplex honours bounds, equalities and fixed variables") {
    LPProblem lp;
    lp.add_var(1.0, 2.0, 5.0);    // x in [2, 5]
    lp.add_var(-1.0, -3.0, 4.0);  // y in [-3, 4]
    lp.add_var(10.0, 1.5, 1.5);   // fixed
    lp.add_row({1.0, 1.0, 0.0}, Sense::Equal, 1.0);
    LPSolution sol = solve_simplex(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(4.0));
    CHECK(sol.x[1] == doctest::Approx(-3.0));
    CHECK(sol.x[2] == 1.5);
    CHECK(sol.value == doctest::Approx(4.0 + 3.0 + 15.0));
}

TEST_CASE("simplex agrees with vertex enumeration on random polygons") {
    Rng rng(99);
    for (int k = 0; k < 200; ++k) {
        std::vector<std::array<double, 2>> rows;
        std::vector<double> b;
        LPProblem lp;
        std::array<double, 2> c{rng.uniform(-1, 2), rng.uniform(-1, 2)};
        lp.add_var(c[0]);
        lp.add_var(c[1]);
        for (int r = 0; r < 4; ++r) {
            rows.push_back({rng.uniform(-1, 2), rng.uniform(-1, 2)});
            b.push_back(rng.uniform(0.1, 3));
            lp.add_row({rows.back()[0], rows.back()[1]}, Sense::LessEqual, b.back());
        }
        rows.push_back({1, 1});
        b.push_back(10);
        lp.add_row({1, 1}, Sense::LessEqual, 10);
        LPSolution sol = solve_simplex(lp);
        REQUIRE(sol.status == LPStatus::Optimal);
        CHECK(sol.value == doctest::Approx(vertex_oracle(rows, b, c)).epsilon(1e-9));
        CHECK(sol.max_residual <= 1e-7);
    }
}

TEST_CASE("empty instance: only the initial inventory columns, optimum 0") {
    Instance inst;
    inst.catalog.caps = {3, 2};
    PrimalLP primal = build_lp(inst);
    CHECK(primal.lp.num_vars() == 2);
    CHECK(primal.lp.num_rows() == 0);
    CHECK(offline_opt(inst).value == 0.0);
    CHECK(brute_force_opt(inst).value == 0.0);
}

TEST_CASE("single customer against a single unit") {
    Instance inst;
    inst.catalog.caps = {1};
    inst.eps = 0.5;
    inst.declared_v = 3;
    inst.events.push_back({EventKind::Customer, {Bundle{{1}, 3.0}}});
    CHECK(offline_opt(inst).value == doctest::Approx(3.0));
    OfflineResult bf = brute_force_opt(inst);
    CHECK(bf.value == 3.0);
    CHECK(bf.method == OfflineMethod::BruteForce);
}

TEST_CASE("three-event example optimum is 4.5") {
    Instance inst = three_event_example();
    OfflineResult lp = offline_opt(inst);
    CHECK(lp.value == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(lp.method == OfflineMethod::Simplex);
    REQUIRE(lp.allocation);
    CHECK(lp.allocation->size() == 3);
    CHECK(brute_force_opt(inst).value == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(to_string(OfflineMethod::Simplex) == "simplex");
    CHECK(to_string(OfflineMethod::BruteForce) == "brute_force");
}

TEST_CASE("customer-side augmentation discounts sales instead") {
    Instance inst = three_event_example();
    CHECK(offline_opt(inst, Augmentation::Customers).value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(brute_force_opt(inst, Augmentation::Customers).value == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("free disposal: surplus purchases never hurt feasibility") {
    Instance inst;
    inst.catalog.caps = {2};
    inst.eps = 1.0;
    inst.declared_v = 5;
    inst.declared_d = 2;
    inst.events.push_back({EventKind::Customer, {Bundle{{1}, 5.0}}});
    inst.events.push_back({EventKind::Supplier, {Bundle{{3}, 1.0}}});
    inst.events.push_back({EventKind::Customer, {Bundle{{2}, 5.0}}});
    // sell 1, buy 3 (one disposed) at 2, sell 2: 5 - 2 + 5
    CHECK(brute_force_opt(inst).value == doctest::Approx(8.0));
    CHECK(offline_opt(inst).value >= 8.0 - 1e-9);
}

TEST_CASE("brute force never beats the relaxation and matches it when the LP is integral") {
    std::size_t integral_cases = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        RandomFamilySpec fam;
        fam.n = 1 + rng.uniform_int(0, 1);
        fam.w = 1 + rng.uniform_int(0, 2);
        fam.T = static_cast<std::size_t>(1 + rng.uniform_int(0, 7));
        fam.menu_size = static_cast<std::size_t>(1 + rng.uniform_int(0, 1));
        fam.v = 8;
        fam.d = fam.n;
        fam.seed = seed;
        Instance inst = generate_instance(fam);
        OfflineResult lp = offline_opt(inst);
        OfflineResult bf = brute_force_opt(inst);
        CHECK(bf.value <= lp.value + 1e-7);
        if (integral(*lp.allocation)) {
            ++integral_cases;
            CHECK(bf.value == doctest::Approx(lp.value).epsilon(1e-7));
        }
    }
    CHECK(integral_cases > 50);
}

TEST_CASE("size caps are enforced") {
    RandomFamilySpec fam;
    fam.n = 5;
    fam.T = 300;
    fam.menu_size = 4;
    fam.d = 2;
    Instance inst = generate_instance(fam);
    CHECK_THROWS_AS(build_lp(inst), std::length_error);
    CHECK_NOTHROW(build_lp(inst, Augmentation::Suppliers, 100000));
    CHECK_THROWS_AS(brute_force_opt(inst), std::length_error);
}

}  // TEST_SUITE offline

#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rshedge/lp_core.hpp"

using namespace rshedge;
using namespace rshedge::lp;

namespace {

LinearProgram one_step_toy() {
    // max q.(0,1)  s.t.  q >= 0, sum q = 1, q.(1,-1) = 0
    LinearProgram lp;
    lp.sense = Sense::Max;
    lp.add_var("q0");
    lp.add_var("q1");
    lp.set_objective(1, Rat(1));
    auto& mass = lp.add_row(Rel::EQ, Rat(1), "mass");
    mass.terms = {{0, Rat(1)}, {1, Rat(1)}};
    auto& mart = lp.add_row(Rel::EQ, Rat(0), "mart");
    mart.terms = {{0, Rat(1)}, {1, Rat(-1)}};
    return lp;
}

}  // namespace

TEST_CASE("one-step martingale toy LP") {
    auto lp = one_step_toy();
    auto out = solve_rational(lp);
    REQUIRE(out.status == Status::Optimal);
    CHECK(out.value == XR(Rat(1, 2)));
    CHECK(out.primal[0] == Rat(1, 2));
    CHECK(out.primal[1] == Rat(1, 2));
    std::string why;
    CHECK(check_certificate(lp, out, &why));
}

TEST_CASE("infeasible system yields a verifiable Farkas certificate") {
    LinearProgram lp;
    lp.add_free_var("x");
    lp.add_row(Rel::GE, Rat(1)).terms = {{0, Rat(1)}};
    lp.add_row(Rel::LE, Rat(0)).terms = {{0, Rat(1)}};
    auto out = solve_rational(lp);
    REQUIRE(out.status == Status::Infeasible);
    std::string why;
    CHECK(check_certificate(lp, out, &why));
}

TEST_CASE("unbounded problem yields a verifiable ray") {
    LinearProgram lp;
    lp.sense = Sense::Min;
    lp.add_free_var("x");
    lp.set_objective(0, Rat(1));
    lp.add_row(Rel::LE, Rat(5)).terms = {{0, Rat(1)}};
    auto out = solve_rational(lp);
    REQUIRE(out.status == Status::Unbounded);
    CHECK(out.value == XR::neg_inf());
    std::string why;
    CHECK(check_certificate(lp, out, &why));
}

TEST_CASE("boxed variables and equality mix") {
    // max x + y  s.t.  x + 2y <= 4, x in [0,3], y in [0,1]
    LinearProgram lp;
    lp.sense = Sense::Max;
    lp.add_var("x", Rat(0), Rat(3));
    lp.add_var("y", Rat(0), Rat(1));
    lp.set_objective(0, Rat(1));
    lp.set_objective(1, Rat(1));
    lp.add_row(Rel::LE, Rat(4)).terms = {{0, Rat(1)}, {1, Rat(2)}};
    auto out = solve_rational(lp);
    REQUIRE(out.status == Status::Optimal);
    CHECK(out.value == XR(Rat(7, 2)));  // x=3, y=1/2
    std::string why;
    CHECK_MESSAGE(check_certificate(lp, out, &why), why);
}

TEST_CASE("empty-bound-box infeasibility") {
    LinearProgram lp;
    lp.add_var("x", Rat(2), Rat(1));
    auto out = solve_rational(lp);
    REQUIRE(out.status == Status::Infeasible);
    std::string why;
    CHECK_MESSAGE(check_certificate(lp, out, &why), why);
}

TEST_CASE("perturbed witness fails verification") {
    auto lp = one_step_toy();
    auto out = solve_rational(lp);
    auto bad = out;
    bad.primal[0] += Rat(1, 100);
    CHECK_FALSE(check_certificate(lp, bad));
    bad = out;
    bad.value = XR(Rat(2, 3));
    CHECK_FALSE(check_certificate(lp, bad));
    bad = out;
    bad.row_duals[0] += Rat(1, 7);
    CHECK_FALSE(check_certificate(lp, bad));
}

TEST_CASE("deterministic outcomes") {
    auto lp = one_step_toy();
    auto a = solve_rational(lp), b = solve_rational(lp);
    CHECK(a.pivots == b.pivots);
    CHECK(a.primal == b.primal);
    CHECK(a.row_duals == b.row_duals);
    CHECK(a.value == b.value);
}

TEST_CASE("random small LPs match vertex-enumeration brute force") {
    std::mt19937_64 rng(12345);
    auto coin = [&](int a, int b) {
        return std::uniform_int_distribution<int>(a, b)(rng);
    };
    int optimal_seen = 0, infeasible_seen = 0;
    for (int iter = 0; iter < 120; ++iter) {
        const int n = coin(1, 3), m = coin(1, 3);
        LinearProgram lp;
        lp.sense = coin(0, 1) ? Sense::Max : Sense::Min;
        for (int j = 0; j < n; ++j) lp.add_var("x" + std::to_string(j), Rat(0), Rat(coin(1, 4)));
        for (int j = 0; j < n; ++j) lp.set_objective(j, Rat(coin(-4, 4), coin(1, 3)));
        for (int r = 0; r < m; ++r) {
            Rel rel = coin(0, 2) == 0 ? Rel::LE : (coin(0, 1) ? Rel::GE : Rel::EQ);
            auto& row = lp.add_row(rel, Rat(coin(-3, 5)));
            for (int j = 0; j < n; ++j)
                if (coin(0, 2)) row.terms.push_back({j, Rat(coin(-3, 3))});
        }
        auto out = solve_rational(lp);
        std::string why;
        REQUIRE_MESSAGE(check_certificate(lp, out, &why), why);
        auto oracle = oracles::brute_force_optimum(lp);
        if (out.status == Status::Optimal) {
            ++optimal_seen;
            REQUIRE(oracle.has_value());
            CHECK(out.value == XR(*oracle));
        } else {
            // boxed vars: unboundedness impossible, infeasible means no vertex
            REQUIRE(out.status == Status::Infeasible);
            ++infeasible_seen;
            CHECK_FALSE(oracle.has_value());
        }
    }
    CHECK(optimal_seen > 20);
    CHECK(infeasible_seen > 5);
}

TEST_CASE("dualize: strong duality and witness recovery") {
    std::mt19937_64 rng(777);
    auto coin = [&](int a, int b) {
        return std::uniform_int_distribution<int>(a, b)(rng);
    };
    int checked = 0;
    for (int iter = 0; iter < 120; ++iter) {
        const int n = coin(1, 4), m = coin(1, 4);
        LinearProgram lp;
        lp.sense = coin(0, 1) ? Sense::Max : Sense::Min;
        for (int j = 0; j < n; ++j) {
            if (coin(0, 3) == 0)
                lp.add_free_var("x" + std::to_string(j));
            else
                lp.add_var("x" + std::to_string(j));
        }
        for (int j = 0; j < n; ++j) lp.set_objective(j, Rat(coin(-3, 3)));
        for (int r = 0; r < m; ++r) {
            Rel rel = coin(0, 2) == 0 ? Rel::LE : (coin(0, 1) ? Rel::GE : Rel::EQ);
            auto& row = lp.add_row(rel, Rat(coin(-2, 4)));
            for (int j = 0; j < n; ++j)
                if (coin(0, 1)) row.terms.push_back({j, Rat(coin(-3, 3))});
        }
        auto primal_out = solve_rational(lp);
        if (primal_out.status != Status::Optimal) continue;
        auto dz = dualize(lp);
        auto dual_out = solve_rational(dz.dual);
        REQUIRE(dual_out.status == Status::Optimal);
        CHECK(primal_out.value == dual_out.value);
        // dual row multipliers recover a primal optimizer
        LpOutcome rec;
        rec.status = Status::Optimal;
        rec.value = dual_out.value;
        rec.primal.resize(n);
        for (int j = 0; j < n; ++j)
            rec.primal[j] = dual_out.row_duals[dz.dual_row_of_var[j]];
        rec.row_duals.resize(lp.rows.size());
        for (std::size_t r = 0; r < lp.rows.size(); ++r)
            rec.row_duals[r] = dual_out.primal[dz.dual_var_of_row[r]];
        std::string why;
        CHECK_MESSAGE(check_certificate(lp, rec, &why), why);
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("float mode agrees with rational mode") {
    auto lp = one_step_toy();
    auto rat = solve_rational(lp);
    auto flt = solve_float(lp, 1e-9);
    REQUIRE(flt.status == Status::Optimal);
    CHECK(std::abs(flt.value - rat.value.to_double()) < 1e-9);

    // rational outcome re-checked in float mode
    FloatOutcome conv;
    conv.status = rat.status;
    conv.value = rat.value.to_double();
    for (const auto& v : rat.primal) conv.primal.push_back(v.get_d());
    for (const auto& v : rat.row_duals) conv.row_duals.push_back(v.get_d());
    std::string why;
    CHECK_MESSAGE(check_certificate_float(lp, conv, 1e-9, &why), why);
}

TEST_CASE("lp text dump mentions every section") {
    auto lp = one_step_toy();
    auto txt = to_lp_format(lp);
    CHECK(txt.find("Maximize") != std::string::npos);
    CHECK(txt.find("Subject To") != std::string::npos);
    CHECK(txt.find("Bounds") != std::string::npos);
    CHECK(txt.find("End") != std::string::npos);
}

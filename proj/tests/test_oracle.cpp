#include "invpress/errors.hpp"
#include "invpress/oracle.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace invpress;
using invpress::testing::columns;
using invpress::testing::vec;

namespace {

LinearSystem example() {
    Matrix a(2, 2);
    a << 2, 0, 0, 0.5;
    return LinearSystem(a, columns({{1, 1}}), ConvexPolytope::box(vec({-1}), vec({1})));
}

OracleConfig desk(int tau, int control_grid, int state_grid) {
    OracleConfig cfg(ConvexPolytope::box(vec({-1, -2}), vec({1, 2})), ConvexPolytope::box(vec({-0.5, -1}), vec({0.5, 1})));
    cfg.tau = tau;
    cfg.control_grid = control_grid;
    cfg.state_grid = state_grid;
    return cfg;
}

Potential pot(const char* src) { return parse_potential(src, 2, 1); }

AdmissibleControls synthetic(std::size_t points, const std::vector<std::vector<std::size_t>>& covers) {
    AdmissibleControls adm;
    adm.tau = 1;
    adm.control_grid.push_back(vec({0}));
    for (std::size_t i = 0; i < points; ++i) adm.k_grid.push_back(vec({static_cast<double>(i)}));
    for (const auto& c : covers) {
        CoverCandidate cand{{0}, PointSet(points)};
        for (std::size_t i : c) cand.covered.set(i);
        adm.candidates.push_back(cand);
    }
    return adm;
}

}  // namespace

TEST_CASE("admissible controls: origin is held by the zero control") {
    const auto sys = example();
    OracleConfig cfg(ConvexPolytope::box(vec({-1, -2}), vec({1, 2})), ConvexPolytope::singleton(vec({0, 0})));
    cfg.tau = 1;
    cfg.control_grid = 3;
    cfg.state_grid = 1;
    const auto adm = admissible_controls(sys, cfg);
    REQUIRE(adm.k_grid.size() == 1);
    REQUIRE(adm.control_grid.size() == 3);
    bool zero_covers = false;
    for (const auto& c : adm.candidates) zero_covers = zero_covers || (adm.controls(c)[0](0) == 0.0 && c.covered.test(0));
    CHECK(zero_covers);
}

TEST_CASE("admissible controls: a tiny Q leaves only the cancelling sequence") {
    const auto sys = example();
    OracleConfig cfg(ConvexPolytope::box(vec({-0.3, -0.3}), vec({0.3, 0.3})), ConvexPolytope::singleton(vec({0, 0})));
    cfg.tau = 7;
    cfg.control_grid = 5;
    cfg.state_grid = 1;
    const auto adm = admissible_controls(sys, cfg);
    REQUIRE(adm.candidates.size() == 1);
    for (const auto& u : adm.controls(adm.candidates[0])) CHECK(u(0) == 0.0);
}

TEST_CASE("admissible controls agree with direct simulation") {
    const auto sys = example();
    const auto cfg = desk(3, 3, 5);
    const auto adm = admissible_controls(sys, cfg);
    std::size_t expected = 0;
    const std::vector<double> grid = {-1.0, 0.0, 1.0};
    std::size_t found = 0;
    for (double a : grid)
        for (double b : grid)
            for (double c : grid) {
                std::vector<std::size_t> covered;
                for (std::size_t i = 0; i < adm.k_grid.size(); ++i) {
                    Vector x = adm.k_grid[i];
                    bool ok = true;
                    for (double u : {a, b, c}) {
                        x = sys.A() * x + sys.B() * vec({u});
                        ok = ok && std::abs(x(0)) <= 1.0 + 1e-9 && std::abs(x(1)) <= 2.0 + 1e-9;
                    }
                    if (ok) covered.push_back(i);
                }
                if (covered.empty()) continue;
                ++expected;
                for (const auto& cand : adm.candidates) {
                    const auto u = adm.controls(cand);
                    if (u[0](0) != a || u[1](0) != b || u[2](0) != c) continue;
                    ++found;
                    CHECK(cand.covered.count() == covered.size());
                    for (std::size_t i : covered) CHECK(cand.covered.test(i));
                }
            }
    CHECK(adm.candidates.size() == expected);
    CHECK(found == expected);
}

TEST_CASE("admissible controls preconditions") {
    const auto sys = example();
    OracleConfig outside(ConvexPolytope::box(vec({-1, -2}), vec({1, 2})), ConvexPolytope::singleton(vec({1.5, 0})));
    outside.state_grid = 1;
    CHECK_THROWS_AS(admissible_controls(sys, outside), PreconditionViolated);
    CHECK_THROWS_AS(admissible_controls(sys, desk(12, 5, 9)), BudgetExceeded);
    auto tight = desk(6, 5, 9);
    tight.budget = 1e6;
    CHECK_THROWS_AS(admissible_controls(sys, tight), BudgetExceeded);
}

TEST_CASE("min weight cover small cases") {
    const auto one = min_weight_cover(synthetic(4, {{0, 1, 2, 3}}), {0.0});
    CHECK(one.a_tau == 1.0);
    CHECK(one.rate == 0.0);
    CHECK(one.spanning_cardinality == 1);
    CHECK(one.exact);

    const auto halves = min_weight_cover(synthetic(4, {{0, 1}, {2, 3}, {0, 1, 2, 3}, {1}}), {1.0, 2.0, 5.0, 0.0});
    CHECK(halves.a_tau == doctest::Approx(std::exp(1.0) + std::exp(2.0)).epsilon(1e-14));
    CHECK(halves.spanning_cardinality == 2);

    CHECK_THROWS_AS(min_weight_cover(synthetic(3, {{0}, {1}}), {0.0, 0.0}), UnspannableGrid);
}

TEST_CASE("exact cover matches exhaustive subset search") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> weight(-2.0, 2.0);
    std::bernoulli_distribution member(0.3);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 7, count = 12;
        std::vector<std::vector<std::size_t>> covers;
        std::vector<unsigned> masks;
        std::vector<double> lw;
        for (std::size_t j = 0; j < count; ++j) {
            std::vector<std::size_t> c;
            unsigned mask = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (member(rng) || i == j % n) {
                    c.push_back(i);
                    mask |= 1U << i;
                }
            }
            covers.push_back(c);
            masks.push_back(mask);
            lw.push_back(weight(rng));
        }
        double best = INFINITY;
        for (unsigned s = 1; s < (1U << count); ++s) {
            unsigned cov = 0;
            double total = 0.0;
            for (std::size_t j = 0; j < count; ++j) {
                if (s >> j & 1U) {
                    cov |= masks[j];
                    total += std::exp(lw[j]);
                }
            }
            if (cov == (1U << n) - 1) best = std::min(best, total);
        }
        const auto est = min_weight_cover(synthetic(n, covers), lw);
        REQUIRE(est.exact);
        CHECK(est.a_tau == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("greedy cover beyond the exact limit") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    const std::size_t n = 12;
    std::vector<std::vector<std::size_t>> covers;
    std::vector<double> lw;
    // Distinct pairs, so no candidate contains another.
    for (std::size_t k = 1; k <= 3; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            covers.push_back({i, (i + k) % n});
            lw.push_back(weight(rng));
        }
    }
    const auto adm = synthetic(n, covers);
    const auto est = min_weight_cover(adm, lw);
    CHECK_FALSE(est.exact);
    CHECK(est.candidates > kExactCoverLimit);
    CHECK(est.cover_gap == doctest::Approx(std::log(12.0) + 1.0));
    double total = 0.0;
    for (std::size_t i = 0; i < est.chosen_set.log_weights.size(); ++i) total += std::exp(est.chosen_set.log_weights[i]);
    CHECK(total == doctest::Approx(est.a_tau).epsilon(1e-12));
    // Lower bound for the optimum: each point needs some candidate, at most two points per candidate.
    double cheapest = INFINITY;
    for (double w : lw) cheapest = std::min(cheapest, std::exp(w));
    CHECK(est.a_tau >= cheapest * static_cast<double>(n) / 2.0);
}

TEST_CASE("frozen regression values at the desk configuration") {
    const auto sys = example();
    const auto cfg = desk(6, 5, 9);
    const auto zero = estimate_pressure(sys, cfg, pot("0"));
    CHECK(zero.exact);
    CHECK(zero.spanning_cardinality == 9);
    CHECK(zero.violations == 0);
    CHECK(zero.rate == doctest::Approx(0.36620409622270328).epsilon(1e-14));
    CHECK(zero.rate == doctest::Approx(std::log(9.0) / 6.0).epsilon(1e-14));
    CHECK(std::abs(zero.rate - std::log(2.0)) <= 0.35);

    const auto shifted = estimate_pressure(sys, cfg, pot("u0+2"));
    CHECK(shifted.exact);
    CHECK(shifted.violations == 0);
    CHECK(shifted.rate == doctest::Approx(1.8311042304784804).epsilon(1e-14));
}

TEST_CASE("constant shift is exact on the exact cover path") {
    const auto sys = example();
    const auto cfg = desk(6, 5, 9);
    for (const char* f : {"0", "u0+2", "u0^2 - u0"}) {
        const auto base = estimate_pressure(sys, cfg, pot(f));
        REQUIRE(base.exact);
        for (const char* c : {"-1", "0.5", "3"}) {
            const std::string g = std::string("(") + f + ") + " + c;
            const auto shifted = estimate_pressure(sys, cfg, pot(g.c_str()));
            REQUIRE(shifted.exact);
            CHECK(std::abs(shifted.rate - base.rate - std::stod(c)) <= 1e-13);
        }
    }
}

TEST_CASE("finer control grids and smaller K never raise a_tau") {
    const auto sys = example();
    for (const char* f : {"0", "u0+2", "abs(u0)"}) {
        const auto coarse = estimate_pressure(sys, desk(4, 3, 9), pot(f));
        const auto fine = estimate_pressure(sys, desk(4, 5, 9), pot(f));
        REQUIRE(coarse.exact);
        REQUIRE(fine.exact);
        CHECK(fine.log_a_tau <= coarse.log_a_tau + 1e-12);

        const auto small_k = estimate_pressure(sys, desk(4, 5, 5), pot(f));
        REQUIRE(small_k.exact);
        CHECK(small_k.log_a_tau <= fine.log_a_tau + 1e-12);
        CHECK(small_k.a_tau > 0.0);
        CHECK(std::isfinite(small_k.rate));
    }
}

TEST_CASE("total mode") {
    const auto sys = example();
    auto cfg = desk(4, 3, 5);
    const auto plain = estimate_pressure(sys, cfg, pot("u0^2 + 1"));
    cfg.total_mode = true;
    const auto total = estimate_pressure(sys, cfg, pot("u0^2 + 1"));
    CHECK(total.total_mode);
    CHECK(total.rate == plain.rate);
    CHECK(total.chosen_set.controls == plain.chosen_set.controls);

    // State potential: each chosen control carries the smallest Birkhoff sum over the points it keeps.
    const auto p = pot("abs(x0) + u0^2");
    const auto est = estimate_pressure(sys, cfg, p);
    CHECK(est.violations == 0);
    const auto adm = admissible_controls(sys, cfg);
    for (std::size_t i = 0; i < est.chosen_set.controls.size(); ++i) {
        const auto& u = est.chosen_set.controls[i];
        double best = INFINITY;
        for (const auto& x0 : adm.k_grid) {
            Vector x = x0;
            bool ok = true;
            double sum = 0.0;
            for (const auto& c : u) {
                sum += std::abs(x(0)) + c(0) * c(0);
                x = sys.A() * x + sys.B() * c;
                ok = ok && std::abs(x(0)) <= 1.0 + 1e-9 && std::abs(x(1)) <= 2.0 + 1e-9;
            }
            if (ok) best = std::min(best, sum);
        }
        CHECK(est.chosen_set.log_weights[i] == doctest::Approx(best).epsilon(1e-12));
    }

    cfg.total_mode = false;
    CHECK_THROWS_AS(estimate_pressure(sys, cfg, p), PreconditionViolated);
}

TEST_CASE("discretization sweep") {
    const LinearSystem stable(0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                              ConvexPolytope::box(vec({-1, -1}), vec({1, 1})));
    const auto cfg = default_oracle_config(stable, spectral_split(stable.A()), 1, 3, 5);
    const auto sweep = discretization_sweep(stable, cfg, parse_potential("0", 2, 2), {1, 2, 3, 4});
    CHECK(sweep.nonincreasing);
    CHECK(sweep.estimates.back().rate <= 1e-12);
    for (const auto& e : sweep.estimates) CHECK(e.violations == 0);

    const auto sys = example();
    const auto ex = discretization_sweep(sys, desk(2, 3, 9), pot("0"), {2, 4, 6, 8});
    CHECK(ex.estimates.size() == 4);
    // Truncating a longer spanning set gives a shorter one, so minimal cardinalities never drop.
    for (std::size_t i = 1; i < ex.estimates.size(); ++i) {
        CHECK(ex.estimates[i].spanning_cardinality >= ex.estimates[i - 1].spanning_cardinality);
    }
    CHECK(ex.min_rate > 0.0);
    CHECK(ex.max_rate < std::log(2.0));
    CHECK_FALSE(ex.nonincreasing);

    const auto single = discretization_sweep(sys, desk(1, 3, 5), pot("u0+2"), {4});
    const auto direct = estimate_pressure(sys, desk(4, 3, 5), pot("u0+2"));
    CHECK(single.estimates.size() == 1);
    CHECK(single.estimates[0].rate == direct.rate);
    CHECK(single.estimates[0].chosen_set.controls == direct.chosen_set.controls);
}

TEST_CASE("default oracle configuration") {
    const auto sys = example();
    const auto cfg = default_oracle_config(sys, spectral_split(sys.A()), 4, 3, 5);
    CHECK(interior_margin(cfg.q, vec({0, 0})) > 0.9);
    CHECK(cfg.k.upper_bounds()(0) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(cfg.k.upper_bounds()(1) == doctest::Approx(1.0).epsilon(1e-3));
    const auto est = estimate_pressure(sys, cfg, pot("0"));
    CHECK(est.violations == 0);
    CHECK(std::isfinite(est.rate));
}

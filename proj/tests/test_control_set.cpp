#include "invpress/control_set.hpp"
#include "invpress/errors.hpp"
#include "invpress/reachability.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>

using namespace invpress;
using invpress::testing::columns;
using invpress::testing::vec;

namespace {

LinearSystem example() {
    Matrix a(2, 2);
    a << 2, 0, 0, 0.5;
    return LinearSystem(a, columns({{1, 1}}), ConvexPolytope::box(vec({-1}), vec({1})));
}

Matrix rotation(double angle) {
    Matrix r(2, 2);
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
}

const ConvexPolytope& example_d() {
    static const ConvexPolytope d = [] {
        const auto sys = example();
        return approximate_control_set(sys, spectral_split(sys.A()), 25, 1e-3).inner;
    }();
    return d;
}

}  // namespace

TEST_CASE("control set of the example is the box [-1,1] x [-2,2]") {
    const auto sys = example();
    const auto start = std::chrono::steady_clock::now();
    const auto approx = approximate_control_set(sys, spectral_split(sys.A()), 25, 1e-3);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(approx.bounded_prediction);
    CHECK(approx.converged);
    CHECK(approx.last_delta < 1e-3);
    CHECK(hausdorff_distance(approx.inner, ConvexPolytope::box(vec({-1, -2}), vec({1, 2}))) <= 0.05);
    CHECK(interior_margin(approx.inner, vec({0, 0})) > 0.5);
    CHECK(seconds < 5.0);
}

TEST_CASE("control set of a contraction with full control") {
    const LinearSystem sys(0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                           ConvexPolytope::box(vec({-1, -1}), vec({1, 1})));
    const auto approx = approximate_control_set(sys, spectral_split(sys.A()), 40, 1e-6);
    CHECK(approx.converged);
    CHECK(hausdorff_distance(approx.inner, ConvexPolytope::box(vec({-2, -2}), vec({2, 2}))) <= 1e-5);

    // Grid oracle: keep a point iff it is reachable and null-controllable at k = 20.
    const auto rev = time_reversed(sys);
    int disagreements = 0;
    for (int i = 0; i <= 24; ++i) {
        for (int j = 0; j <= 24; ++j) {
            const Vector x = vec({-3.0 + 0.25 * i, -3.0 + 0.25 * j});
            if (std::abs(std::abs(x(0)) - 2.0) < 1e-3 || std::abs(std::abs(x(1)) - 2.0) < 1e-3) continue;
            const bool oracle = reach_membership(sys, x, 20) && reach_membership(rev, x, 20);
            if (oracle != contains_point(approx.inner, x, 1e-6)) ++disagreements;
        }
    }
    CHECK(disagreements == 0);
}

TEST_CASE("non-hyperbolic rotation does not converge") {
    const LinearSystem sys(rotation(1.0), Matrix::Identity(2, 2), ConvexPolytope::box(vec({-1, -1}), vec({1, 1})));
    const auto approx = approximate_control_set(sys, spectral_split(sys.A()), 20, 1e-3);
    CHECK_FALSE(approx.bounded_prediction);
    CHECK_FALSE(approx.converged);
    CHECK(approx.last_delta > 1e-3);
    CHECK(approx.unbounded_growth);
}

TEST_CASE("approximate_control_set requires controllability") {
    Matrix a(2, 2);
    a << 2, 0, 0, 0.5;
    const LinearSystem sys(a, columns({{1, 0}}), ConvexPolytope::box(vec({-1}), vec({1})));
    CHECK_THROWS_AS(approximate_control_set(sys, spectral_split(a), 10, 1e-3), NotControllable);
}

TEST_CASE("equilibrium examples") {
    const auto sys = example();
    CHECK((equilibrium(sys, vec({-1})) - vec({1, -2})).norm() <= 1e-15);
    CHECK(equilibrium(sys, vec({0})).norm() == 0.0);
    for (double alpha : {-0.8, -0.3, 0.25, 0.9}) {
        CHECK((equilibrium(sys, vec({alpha})) - vec({-alpha, 2 * alpha})).norm() <= 1e-15);
    }
    const LinearSystem shifted(Matrix::Identity(2, 2), columns({{1, 1}}), ConvexPolytope::box(vec({-1}), vec({1})));
    CHECK_THROWS_AS(equilibrium(shifted, vec({0.5})), SingularShift);
    CHECK_THROWS_AS(equilibrium(sys, vec({2})), ControlOutOfRange);
}

TEST_CASE("interior_trajectory_check examples") {
    const auto sys = example();
    const auto& d = example_d();
    const auto still = interior_trajectory_check(sys, d, vec({0, 0}), ControlSequence(4, vec({0})));
    CHECK(still.interior);
    CHECK(still.min_margin > 0.9);

    // Alternating +-0.5 pushes x to 0.5, 0.5, 1.5 and leaves D at the third step.
    const ControlSequence flip{vec({0.5}), vec({-0.5}), vec({0.5}), vec({-0.5})};
    CHECK_THROWS_AS(interior_trajectory_check(sys, d, vec({0, 0}), flip), PreconditionViolated);
    const ControlSequence alt{vec({0.5}), vec({-0.5}), vec({-0.5}), vec({-0.5})};
    const auto swing = interior_trajectory_check(sys, d, vec({0, 0}), alt);
    CHECK(swing.interior);
    // Oracle: simulate and measure the margin against the open box directly.
    const auto t = trajectory(sys, vec({0, 0}), alt);
    double margin = 1e300;
    for (std::size_t k = 1; k < t.states.size(); ++k) {
        margin = std::min({margin, 1.0 - std::abs(t.states[k](0)), 2.0 - std::abs(t.states[k](1))});
    }
    CHECK(margin > 0.0);
    CHECK(swing.min_margin == doctest::Approx(margin).epsilon(0.05));

    // From (0.9, 0) the constant control -0.9 holds x fixed and drives y toward -1.8.
    const ControlSequence hold(6, vec({-0.9}));
    const auto held = interior_trajectory_check(sys, d, vec({0.9, 0}), hold);
    CHECK(held.interior);
    CHECK(held.min_margin > 0.0);

    CHECK_THROWS_AS(interior_trajectory_check(sys, d, vec({0.9, 0}), ControlSequence(3, vec({0.9}))),
                    PreconditionViolated);
    CHECK_THROWS_AS(interior_trajectory_check(sys, d, vec({5, 0}), ControlSequence(1, vec({0}))), PreconditionViolated);
}

TEST_CASE("boundedness_classifier") {
    Matrix a(2, 2);
    a << 2, 0, 0, 0.5;
    CHECK(boundedness_classifier(spectral_split(a)));
    CHECK_FALSE(boundedness_classifier(spectral_split(rotation(1.0))));
    Matrix c = Matrix::Zero(2, 2);
    c.diagonal() << 1, 2;
    CHECK_FALSE(boundedness_classifier(spectral_split(c)));
}

TEST_CASE("D_k contains 0 strictly and grows with k") {
    const auto sys = example();
    ReachSequence reach(sys);
    ReachSequence control(time_reversed(sys));
    ConvexPolytope prev = intersect(reach.at(2), control.at(2));
    CHECK(interior_margin(prev, vec({0, 0})) > 0.0);
    for (int k = 3; k <= 20; ++k) {
        const ConvexPolytope next = intersect(reach.at(k), control.at(k));
        CHECK(interior_margin(next, vec({0, 0})) > 0.0);
        for (Eigen::Index i = 0; i < prev.num_vertices(); ++i) CHECK(contains_point(next, prev.vertex(i), 1e-9));
        prev = next;
    }
}

TEST_CASE("control set scales with the control range") {
    const auto sys = example();
    const auto split = spectral_split(sys.A());
    const auto base = approximate_control_set(sys, split, 30, 1e-9);
    for (double alpha : {0.5, 2.0}) {
        const auto scaled = approximate_control_set(sys.with_scaled_controls(alpha), split, 30, 1e-9);
        const auto expected = linear_image(base.inner, alpha * Matrix::Identity(2, 2));
        CHECK(hausdorff_distance(scaled.inner, expected) <= 1e-6);
    }
}

TEST_CASE("constant-control equilibria lie in the control set") {
    const auto sys = example();
    const auto& d = example_d();
    for (int i = -9; i <= 9; ++i) {
        const double alpha = 0.1 * i;
        CHECK(contains_point(d, equilibrium(sys, vec({alpha})), 1e-3));
    }
}

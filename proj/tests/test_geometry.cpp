#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cutfem/geometry.hpp"

using namespace cutfem;

namespace {

// Central-difference gradient of a scalar field.
Vec2 fd_gradient(const std::function<double(Vec2)>& f, Vec2 p, double step = 1e-6) {
    return {(f({p.x + step, p.y}) - f({p.x - step, p.y})) / (2.0 * step),
            (f({p.x, p.y + step}) - f({p.x, p.y - step})) / (2.0 * step)};
}

// Five-point Laplacian stencil.
double fd_laplacian(const std::function<double(Vec2)>& f, Vec2 p, double step = 1e-4) {
    return (f({p.x + step, p.y}) + f({p.x - step, p.y}) + f({p.x, p.y + step}) +
            f({p.x, p.y - step}) - 4.0 * f(p)) /
           (step * step);
}

void check_gradient_consistency(const LevelSet& ls, Vec2 p) {
    Vec2 g = ls.gradient(p);
    Vec2 fd = fd_gradient([&](Vec2 q) { return ls.value(q); }, p);
    CHECK(g.x == doctest::Approx(fd.x).epsilon(1e-6));
    CHECK(g.y == doctest::Approx(fd.y).epsilon(1e-6));
}

}  // namespace

TEST_CASE("ring level set values and gradient") {
    LevelSet ls = make_ring(0.25, 0.75);
    CHECK(ls.value({0.0, 0.0}) == doctest::Approx(3.0 / 16.0).epsilon(1e-15));
    CHECK(ls.value({0.5, 0.5}) == doctest::Approx(0.6875 - std::sqrt(0.5)).epsilon(1e-14));
    CHECK(ls.value({0.25, 0.0}) == doctest::Approx(0.0));
    CHECK(ls.value({0.0, 0.75}) == doctest::Approx(0.0));
    // dphi/dR = 2R - 1 vanishes on the mid circle.
    Vec2 g = ls.gradient({0.5, 0.0});
    CHECK(std::abs(g.x) < 1e-14);
    CHECK(std::abs(g.y) < 1e-14);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-0.9, 0.9);
    for (int t = 0; t < 30; ++t) {
        Vec2 p{uni(rng), uni(rng)};
        if (norm(p) < 0.05) continue;  // R = 0 kink
        check_gradient_consistency(ls, p);
    }
}

TEST_CASE("ring manufactured solution satisfies the Poisson equation") {
    LevelSet ls = make_ring(0.25, 0.75);
    REQUIRE(ls.has_solution());
    // u = 20 (3/4 - R)(R - 1/4) vanishes on both boundary circles.
    CHECK(ls.solution({0.5, 0.0}) == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(std::abs(ls.solution({0.25, 0.0})) < 1e-14);
    CHECK(std::abs(ls.solution({0.0, 0.75})) < 1e-14);
    CHECK(std::abs(ls.boundary_value({0.75, 0.0})) < 1e-14);
    // f = -lap u = 80 - 20/R.
    CHECK(ls.source({0.5, 0.0}) == doctest::Approx(40.0).epsilon(1e-13));

    std::mt19937 rng(13);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> rad(0.3, 0.7);
    for (int t = 0; t < 100; ++t) {
        double R = rad(rng), th = ang(rng);
        Vec2 p{R * std::cos(th), R * std::sin(th)};
        Vec2 g = ls.solution_gradient(p);
        Vec2 fd = fd_gradient([&](Vec2 q) { return ls.solution(q); }, p);
        CHECK(g.x == doctest::Approx(fd.x).epsilon(1e-6));
        CHECK(g.y == doctest::Approx(fd.y).epsilon(1e-6));
        double lap = fd_laplacian([&](Vec2 q) { return ls.solution(q); }, p);
        CHECK(ls.source(p) == doctest::Approx(-lap).epsilon(1e-5));
    }
}

TEST_CASE("ellipse level set and manufactured solution") {
    LevelSet ls = make_ellipse(0.75, 0.5);
    REQUIRE(ls.has_solution());
    CHECK(std::abs(ls.value({0.75, 0.0})) < 1e-14);
    CHECK(std::abs(ls.value({0.0, 0.5})) < 1e-14);
    Vec2 g = ls.gradient({0.75, 0.0});
    CHECK(g.x == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(g.y) < 1e-14);

    CHECK(ls.solution({0.0, 0.0}) == doctest::Approx(1.0));
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> uni(-0.6, 0.6);
    for (int t = 0; t < 100; ++t) {
        Vec2 p{uni(rng), uni(rng)};
        check_gradient_consistency(ls, p);
        Vec2 gs = ls.solution_gradient(p);
        Vec2 fd = fd_gradient([&](Vec2 q) { return ls.solution(q); }, p);
        CHECK(gs.x == doctest::Approx(fd.x).epsilon(1e-6));
        CHECK(gs.y == doctest::Approx(fd.y).epsilon(1e-6));
        double lap = fd_laplacian([&](Vec2 q) { return ls.solution(q); }, p);
        CHECK(ls.source(p) == doctest::Approx(-lap).epsilon(1e-5));
        // f = (pi^2/2) u for this separable solution.
        CHECK(ls.source(p) ==
              doctest::Approx(0.5 * M_PI * M_PI * ls.solution(p)).epsilon(1e-13));
    }
}

TEST_CASE("circle and affine level sets") {
    LevelSet circle = make_circle({0.3, -0.2}, 0.5);
    CHECK(circle.value({0.8, -0.2}) == doctest::Approx(0.0));
    CHECK(circle.value({0.3, -0.2}) == doctest::Approx(-0.25));
    CHECK_FALSE(circle.has_solution());

    LevelSet affine = make_affine({0.0, 1.0}, 0.25);
    CHECK(affine.value({5.0, 0.25}) == doctest::Approx(0.0));
    CHECK(affine.value({0.0, 0.0}) == doctest::Approx(-0.25));
    Vec2 g = affine.gradient({1.0, 1.0});
    CHECK(g.x == doctest::Approx(0.0));
    CHECK(g.y == doctest::Approx(1.0));
    CHECK_FALSE(affine.has_solution());
}

TEST_CASE("shift translates the whole problem") {
    LevelSet ls = make_ring(0.25, 0.75);
    ls.shift = {0.3, -0.1};
    CHECK(ls.value({0.3, -0.1}) == doctest::Approx(3.0 / 16.0).epsilon(1e-15));
    CHECK(ls.value({0.8, -0.1}) == doctest::Approx(-1.0 / 16.0).epsilon(1e-14));
    CHECK(ls.solution({0.8, -0.1}) == doctest::Approx(1.25).epsilon(1e-13));
}

TEST_CASE("exact normal is the normalized gradient") {
    LevelSet circle = make_circle({0.0, 0.0}, 1.0);
    Vec2 n = exact_normal(circle, {2.0, 0.0});
    CHECK(n.x == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(n.y) < 1e-14);
    Vec2 n2 = exact_normal(circle, {0.3, 0.4});
    CHECK(norm(n2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(n2.x == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(n2.y == doctest::Approx(0.8).epsilon(1e-14));

    // The ring gradient vanishes on the mid circle.
    LevelSet ring = make_ring(0.25, 0.75);
    CHECK_THROWS_AS(exact_normal(ring, {0.5, 0.0}), DegenerateGradient);
}

TEST_CASE("boundary projection finds the nearest root along the search line") {
    LevelSet circle = make_circle({0.0, 0.0}, 1.0);
    BoundaryProjection pr = project_to_boundary(circle, {2.0, 0.0}, {-1.0, 0.0}, 4.0);
    CHECK(pr.converged);
    CHECK(pr.varsigma == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pr.point.x == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(pr.point.y) < 1e-12);
    CHECK(pr.iterations <= 30);
    CHECK(std::abs(circle.value(pr.point)) < 1e-10);

    // Equidistant roots on both sides resolve to the positive one.
    LevelSet ring = make_ring(0.25, 0.75);
    BoundaryProjection tie = project_to_boundary(ring, {0.5, 0.0}, {1.0, 0.0}, 2.0);
    CHECK(tie.converged);
    CHECK(tie.varsigma == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(tie.point.x == doctest::Approx(0.75).epsilon(1e-10));

    // Off-axis query, oblique direction: the returned point is on the zero set
    // and consistent with the reported distance.
    Vec2 x{0.6, 0.1};
    Vec2 nu{0.8, 0.6};
    BoundaryProjection pr2 = project_to_boundary(ring, x, nu, 2.0);
    CHECK(pr2.converged);
    Vec2 want = x + pr2.varsigma * nu;
    CHECK(pr2.point.x == doctest::Approx(want.x).epsilon(1e-12));
    CHECK(pr2.point.y == doctest::Approx(want.y).epsilon(1e-12));
    CHECK(std::abs(ring.value(pr2.point)) < 1e-10);
}

TEST_CASE("boundary projection reports a missing root") {
    LevelSet affine = make_affine({0.0, 1.0}, 10.0);
    CHECK_THROWS_AS(project_to_boundary(affine, {0.0, 0.0}, {1.0, 0.0}, 1.0), NoRoot);
}

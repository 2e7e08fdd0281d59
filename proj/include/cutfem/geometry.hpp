#pragma once

#include <functional>
#include <string>

#include "cutfem/common.hpp"

namespace cutfem {

// Implicit domain description: the domain is {x : phi(x) < 0} and its
// boundary the zero level set of phi. A manufactured solution (u, grad u,
// source f = -lap u, boundary data g = u on the zero set) can be attached so
// convergence studies have exact reference data. All closed forms are given
// in a base frame; `shift` translates the whole problem, which is how the
// cut-position sweeps perturb the geometry relative to the mesh.
struct LevelSet {
    std::string name;
    Vec2 shift{0.0, 0.0};

    std::function<double(Vec2)> value_fn;
    std::function<Vec2(Vec2)> gradient_fn;

    // Optional manufactured data (empty when no exact solution is attached).
    std::function<double(Vec2)> solution_fn;
    std::function<Vec2(Vec2)> solution_gradient_fn;
    std::function<double(Vec2)> source_fn;
    std::function<double(Vec2)> boundary_fn;

    bool has_solution() const { return static_cast<bool>(solution_fn); }

    double value(Vec2 p) const { return value_fn(p - shift); }
    Vec2 gradient(Vec2 p) const { return gradient_fn(p - shift); }
    double solution(Vec2 p) const { return solution_fn(p - shift); }
    Vec2 solution_gradient(Vec2 p) const { return solution_gradient_fn(p - shift); }
    double source(Vec2 p) const { return source_fn(p - shift); }
    double boundary_value(Vec2 p) const { return boundary_fn(p - shift); }
};

// phi = |x-c|^2 - r^2. No manufactured solution attached.
LevelSet make_circle(Vec2 center, double radius);

// phi = (R - r_inner)(R - r_outer) with R = |x|, centered at the origin.
// Attached solution u = 20 (r_outer - R)(R - r_inner) (vanishing on both
// boundary circles) with f = -lap u extended by zero outside the domain.
LevelSet make_ring(double r_inner, double r_outer);

// phi = x^2/a^2 + y^2/b^2 - 1. Attached solution
// u = cos(pi x / 2) cos(pi y / 2), f = -lap u = (pi^2/2) u everywhere.
LevelSet make_ellipse(double a, double b);

// phi = n.x - offset (half plane on the negative side). No solution.
LevelSet make_affine(Vec2 normal, double offset);

// Unit outward normal grad phi / |grad phi|. Throws DegenerateGradient when
// |grad phi| <= eps.
Vec2 exact_normal(const LevelSet& ls, Vec2 p, double eps = 1e-10);

struct BoundaryProjection {
    double varsigma = 0.0;  // signed distance along the search direction
    Vec2 point{0.0, 0.0};   // x + varsigma * nu, on the zero level set
    int iterations = 0;
    bool converged = false;
};

struct ProjectionOptions {
    double tol = 1e-12;      // |phi| at the accepted root
    int max_newton = 30;
    int scan_samples = 32;   // bisection fallback scans at radius/scan_samples steps
};

// Find the zero of s -> phi(x + s*nu) with smallest |s| within
// [-search_radius, search_radius]. Newton from s=0; on stall or exit from
// the interval, fall back to a sign-change scan plus bisection. Ties between
// +s and -s resolve to the positive root. Throws NoRoot when the interval
// contains no detectable zero.
BoundaryProjection project_to_boundary(const LevelSet& ls, Vec2 x, Vec2 nu,
                                       double search_radius,
                                       const ProjectionOptions& opts = {});

}  // namespace cutfem

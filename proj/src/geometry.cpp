#include "cutfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cutfem {

LevelSet make_circle(Vec2 center, double radius) {
    LevelSet ls;
    ls.name = "circle";
    ls.value_fn = [=](Vec2 p) {
        Vec2 d = p - center;
        return dot(d, d) - radius * radius;
    };
    ls.gradient_fn = [=](Vec2 p) { return 2.0 * (p - center); };
    return ls;
}

LevelSet make_ring(double r_inner, double r_outer) {
    LevelSet ls;
    ls.name = "ring";
    const double rs = r_inner + r_outer;  // sum of radii
    ls.value_fn = [=](Vec2 p) {
        double R = norm(p);
        return (R - r_inner) * (R - r_outer);
    };
    // phi(R) = R^2 - rs R + rp, so grad phi = (2 - rs/R) x. The factor
    // vanishes exactly mid-band (R = rs/2) and R = 0 is a kink of R; both are
    // far from the zero set, return a zero vector there.
    ls.gradient_fn = [=](Vec2 p) {
        double R = norm(p);
        if (R == 0.0) return Vec2{0.0, 0.0};
        return (2.0 - rs / R) * p;
    };
    // u vanishes on both boundary circles; -lap u = 80 - 20 rs / R in polar
    // form, extended by zero outside the ring (quadrature points of the
    // discrete domain may fall slightly outside the exact one).
    ls.solution_fn = [=](Vec2 p) {
        double R = norm(p);
        return 20.0 * (r_outer - R) * (R - r_inner);
    };
    ls.solution_gradient_fn = [=](Vec2 p) {
        double R = norm(p);
        if (R == 0.0) return Vec2{0.0, 0.0};
        return (20.0 * (rs - 2.0 * R) / R) * p;
    };
    ls.source_fn = [=](Vec2 p) {
        double R = norm(p);
        if ((R - r_inner) * (R - r_outer) >= 0.0) return 0.0;
        return 80.0 - 20.0 * rs / R;
    };
    ls.boundary_fn = ls.solution_fn;
    return ls;
}

LevelSet make_ellipse(double a, double b) {
    LevelSet ls;
    ls.name = "ellipse";
    const double ia2 = 1.0 / (a * a);
    const double ib2 = 1.0 / (b * b);
    ls.value_fn = [=](Vec2 p) { return p.x * p.x * ia2 + p.y * p.y * ib2 - 1.0; };
    ls.gradient_fn = [=](Vec2 p) { return Vec2{2.0 * p.x * ia2, 2.0 * p.y * ib2}; };
    const double k = M_PI / 2.0;
    ls.solution_fn = [=](Vec2 p) { return std::cos(k * p.x) * std::cos(k * p.y); };
    ls.solution_gradient_fn = [=](Vec2 p) {
        return Vec2{-k * std::sin(k * p.x) * std::cos(k * p.y),
                    -k * std::cos(k * p.x) * std::sin(k * p.y)};
    };
    ls.source_fn = [=](Vec2 p) {
        return 2.0 * k * k * std::cos(k * p.x) * std::cos(k * p.y);
    };
    ls.boundary_fn = ls.solution_fn;
    return ls;
}

LevelSet make_affine(Vec2 normal, double offset) {
    LevelSet ls;
    ls.name = "affine";
    ls.value_fn = [=](Vec2 p) { return dot(normal, p) - offset; };
    ls.gradient_fn = [=](Vec2) { return normal; };
    return ls;
}

Vec2 exact_normal(const LevelSet& ls, Vec2 p, double eps) {
    Vec2 g = ls.gradient(p);
    double n = norm(g);
    if (n <= eps)
        throw DegenerateGradient("level set gradient ~0 at (" + std::to_string(p.x) +
                                 ", " + std::to_string(p.y) + ")");
    return g / n;
}

namespace {

// Bisect a sign-change bracket [lo, hi] of f until |f| <= tol at the
// midpoint (or the bracket collapses). Returns the midpoint.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double flo, double tol, int& steps) {
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        ++steps;
        if (std::abs(fm) <= tol || hi - lo < 1e-16) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

BoundaryProjection project_to_boundary(const LevelSet& ls, Vec2 x, Vec2 nu,
                                       double search_radius,
                                       const ProjectionOptions& opts) {
    auto f = [&](double s) { return ls.value(x + s * nu); };
    auto fprime = [&](double s) { return dot(ls.gradient(x + s * nu), nu); };

    // Newton from s = 0. The boundary quadrature points this serves sit
    // within O(h^2) of the zero set, so this nearly always converges in a
    // couple of steps.
    double s = 0.0;
    bool newton_failed = false;
    int it = 0;
    for (;; ++it) {
        double v = f(s);
        if (std::abs(v) <= opts.tol) {
            BoundaryProjection out;
            out.varsigma = s;
            out.point = x + s * nu;
            out.iterations = it;
            out.converged = true;
            return out;
        }
        if (it >= opts.max_newton) {
            newton_failed = true;
            break;
        }
        double d = fprime(s);
        if (std::abs(d) < 1e-14) {  // stationary point, Newton is stuck
            newton_failed = true;
            break;
        }
        double snext = s - v / d;
        if (std::abs(snext) > search_radius) {
            newton_failed = true;
            break;
        }
        s = snext;
    }
    (void)newton_failed;

    // Fallback: scan the interval for sign changes and bisect each bracket,
    // then keep the root of smallest magnitude (ties go to the positive
    // side). Catches the stationary starts Newton cannot handle, e.g. the
    // mid-band of a ring where phi' vanishes in the search direction.
    const double step = search_radius / opts.scan_samples;
    const int nsamp = 2 * opts.scan_samples;
    std::vector<double> roots;
    int steps = it;
    double sprev = -search_radius;
    double fprev = f(sprev);
    if (std::abs(fprev) <= opts.tol) roots.push_back(sprev);
    for (int k = 1; k <= nsamp; ++k) {
        double sk = -search_radius + k * step;
        double fk = f(sk);
        ++steps;
        if (std::abs(fk) <= opts.tol) {
            roots.push_back(sk);
        } else if (fprev * fk < 0.0) {
            roots.push_back(bisect(f, sprev, sk, fprev, opts.tol, steps));
        }
        sprev = sk;
        fprev = fk;
    }
    if (roots.empty())
        throw NoRoot("no boundary point within radius " + std::to_string(search_radius) +
                     " of (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ")");

    double best = roots.front();
    for (double r : roots) {
        if (std::abs(r) < std::abs(best) - 1e-12 * search_radius) {
            best = r;
        } else if (std::abs(std::abs(r) - std::abs(best)) <= 1e-12 * search_radius &&
                   r > best) {
            best = r;  // tie between +s and -s: take the positive root
        }
    }
    BoundaryProjection out;
    out.varsigma = best;
    out.point = x + best * nu;
    out.iterations = steps;
    out.converged = true;
    return out;
}

}  // namespace cutfem

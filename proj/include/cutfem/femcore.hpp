#pragma once

#include <array>
#include <vector>

#include "cutfem/common.hpp"

namespace cutfem {

// ---------------------------------------------------------------------------
// Quadrature

// Rule on the unit segment [0,1]; weights sum to 1.
struct SegmentRule {
    std::vector<double> points;
    std::vector<double> weights;
};

// Gauss-Legendre with n points, exact for polynomials of degree 2n-1.
SegmentRule segment_rule(int npoints);

// Rule on the reference triangle (0,0)-(1,0)-(0,1); weights sum to 1/2.
struct TriangleRule {
    std::vector<Vec2> points;
    std::vector<double> weights;
    int degree = 0;  // declared polynomial exactness
};

// Conical-product Gauss rule, exact to the requested total degree, all
// weights positive. Point count grows like (d/2+1)^2 which is more than the
// optimal symmetric rules use, but positivity and arbitrary degree matter
// more here than a handful of evaluations.
TriangleRule triangle_rule(int degree);

// ---------------------------------------------------------------------------
// Bivariate polynomials in monomial form (total degree <= 3)

inline constexpr int kMaxDegree = 3;
inline constexpr int kNumMonomials = 10;  // (3+1)(3+2)/2

// Monomial exponents ordered by total degree:
// 1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3.
extern const std::array<std::array<int, 2>, kNumMonomials> kMonomials;

inline int monomial_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

// Dense coefficient vector over kMonomials. Small enough to copy freely.
struct Poly2 {
    std::array<double, kNumMonomials> c{};

    double eval(Vec2 p) const;
    Poly2 dx() const;
    Poly2 dy() const;
    // Directional derivative along an arbitrary (unnormalized) direction.
    Poly2 ddir(Vec2 mu) const;
};

// ---------------------------------------------------------------------------
// Lagrange reference elements P1..P3

// Nodal basis on the reference triangle with the equispaced lattice
// {(i/p, j/p) : i + j <= p}, vertices first, then edge nodes walked along
// each edge (v0->v1, v1->v2, v2->v0), then the interior node (P3 only).
// Bases are stored as monomial coefficients so derivatives of any order are
// exact coefficient manipulations rather than finite differences.
class ReferenceElement {
public:
    explicit ReferenceElement(int order);

    int order() const { return order_; }
    int num_basis() const { return nbasis_; }
    const std::vector<Vec2>& nodes() const { return nodes_; }
    const Poly2& basis_poly(int i) const { return basis_[i]; }

    // Values of all basis functions at a reference point.
    void values(Vec2 ref, double* out) const;
    // Reference partial d^(ax+ay) / dxi^ax deta^ay of all basis functions.
    // Orders beyond the polynomial degree yield zeros.
    void partial(int ax, int ay, Vec2 ref, double* out) const;
    // j-th directional derivative along mu (reference frame), assembled from
    // the partials by the binomial expansion of (mu . grad)^j.
    void directional(int j, Vec2 mu, Vec2 ref, double* out) const;

    // Shared immutable instances.
    static const ReferenceElement& get(int order);

private:
    int order_;
    int nbasis_;
    std::vector<Vec2> nodes_;
    std::vector<Poly2> basis_;
    // partials_[ax][ay][i]: precomputed (d/dxi)^ax (d/deta)^ay basis_[i]
    std::vector<Poly2> partials_[kMaxDegree + 1][kMaxDegree + 1];
};

// ---------------------------------------------------------------------------
// Affine map from the reference triangle to a physical one

struct ElementMap {
    Vec2 v0;
    // Column-major 2x2: B = [b00 b01; b10 b11], columns are edge vectors.
    double b00, b01, b10, b11;
    double det;
    double g00, g01, g10, g11;  // G = B^{-1}

    Vec2 map(Vec2 ref) const {
        return {v0.x + b00 * ref.x + b01 * ref.y, v0.y + b10 * ref.x + b11 * ref.y};
    }
    Vec2 inverse_map(Vec2 phys) const {
        Vec2 d = phys - v0;
        return {g00 * d.x + g01 * d.y, g10 * d.x + g11 * d.y};
    }
    // Reference direction mu with (nu . grad_x)^j v = (mu . grad_ref)^j vhat.
    Vec2 pull_direction(Vec2 nu) const {
        return {g00 * nu.x + g01 * nu.y, g10 * nu.x + g11 * nu.y};
    }
    // Physical gradient from a reference gradient: grad_x = B^{-T} grad_ref.
    Vec2 push_gradient(Vec2 gref) const {
        return {g00 * gref.x + g10 * gref.y, g01 * gref.x + g11 * gref.y};
    }
};

// Throws DegenerateElement when |det B| <= 1e-14.
ElementMap make_element_map(Vec2 a, Vec2 b, Vec2 c);

// Physical partial derivative d^(ax+ay)/dx^ax dy^ay of all basis functions
// at a reference point, via the affine chain rule. Used by tests and the
// occasional non-hot path; assembly prefers directional derivatives.
void physical_partial(const ElementMap& em, const ReferenceElement& re, int ax, int ay,
                      Vec2 ref, double* out);

}  // namespace cutfem

#include "cutfem/femcore.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>

namespace cutfem {

// ---------------------------------------------------------------------------
// Gauss-Legendre on [0,1]

SegmentRule segment_rule(int npoints) {
    if (npoints < 1) throw Error("segment rule needs at least one point");
    SegmentRule rule;
    rule.points.resize(npoints);
    rule.weights.resize(npoints);
    const int n = npoints;
    // Nodes on [-1,1] by Newton on P_n, standard cosine initial guesses.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // Evaluate P_n and P_n' by the three-term recurrence.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // Recompute derivative at the converged node for the weight.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map to [0,1]; nodes come out in decreasing x, store ascending.
        rule.points[i] = 0.5 * (1.0 - x);
        rule.weights[i] = 0.5 * w;
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

TriangleRule triangle_rule(int degree) {
    if (degree < 1) degree = 1;
    // Collapsed square: x = xi (1 - eta), y = eta, Jacobian (1 - eta).
    // A total-degree-d integrand is degree <= d in xi and <= d+1 in eta after
    // the Jacobian, which fixes the two Gauss point counts.
    const int nxi = (degree + 2) / 2;       // ceil((d+1)/2)
    const int neta = (degree + 3) / 2;      // ceil((d+2)/2)
    SegmentRule gxi = segment_rule(nxi);
    SegmentRule geta = segment_rule(neta);
    TriangleRule rule;
    rule.degree = degree;
    rule.points.reserve(nxi * neta);
    rule.weights.reserve(nxi * neta);
    for (int j = 0; j < neta; ++j) {
        double eta = geta.points[j];
        for (int i = 0; i < nxi; ++i) {
            double xi = gxi.points[i];
            rule.points.push_back({xi * (1.0 - eta), eta});
            rule.weights.push_back(gxi.weights[i] * geta.weights[j] * (1.0 - eta));
        }
    }
    return rule;
}

// ---------------------------------------------------------------------------
// Monomials and Poly2

const std::array<std::array<int, 2>, kNumMonomials> kMonomials = {{
    {0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3},
}};

namespace {

int monomial_index(int a, int b) {
    int d = a + b;
    // Monomials of degree d start at d(d+1)/2 and are ordered x^d, ..., y^d.
    return d * (d + 1) / 2 + b;
}

}  // namespace

double Poly2::eval(Vec2 p) const {
    // Precompute powers once; ten terms at most.
    double px[kMaxDegree + 1] = {1.0, p.x, p.x * p.x, p.x * p.x * p.x};
    double py[kMaxDegree + 1] = {1.0, p.y, p.y * p.y, p.y * p.y * p.y};
    double s = 0.0;
    for (int m = 0; m < kNumMonomials; ++m)
        if (c[m] != 0.0) s += c[m] * px[kMonomials[m][0]] * py[kMonomials[m][1]];
    return s;
}

Poly2 Poly2::dx() const {
    Poly2 r;
    for (int m = 0; m < kNumMonomials; ++m) {
        int a = kMonomials[m][0], b = kMonomials[m][1];
        if (a > 0 && c[m] != 0.0) r.c[monomial_index(a - 1, b)] += a * c[m];
    }
    return r;
}

Poly2 Poly2::dy() const {
    Poly2 r;
    for (int m = 0; m < kNumMonomials; ++m) {
        int a = kMonomials[m][0], b = kMonomials[m][1];
        if (b > 0 && c[m] != 0.0) r.c[monomial_index(a, b - 1)] += b * c[m];
    }
    return r;
}

Poly2 Poly2::ddir(Vec2 mu) const {
    Poly2 r;
    for (int m = 0; m < kNumMonomials; ++m) {
        if (c[m] == 0.0) continue;
        int a = kMonomials[m][0], b = kMonomials[m][1];
        if (a > 0) r.c[monomial_index(a - 1, b)] += mu.x * a * c[m];
        if (b > 0) r.c[monomial_index(a, b - 1)] += mu.y * b * c[m];
    }
    return r;
}

// ---------------------------------------------------------------------------
// ReferenceElement

ReferenceElement::ReferenceElement(int order) : order_(order) {
    if (order < 1 || order > kMaxDegree) throw Error("polynomial order must be 1..3");
    nbasis_ = monomial_count(order);

    const Vec2 v0{0.0, 0.0}, v1{1.0, 0.0}, v2{0.0, 1.0};
    nodes_ = {v0, v1, v2};
    if (order == 2) {
        nodes_.push_back(0.5 * (v0 + v1));
        nodes_.push_back(0.5 * (v1 + v2));
        nodes_.push_back(0.5 * (v2 + v0));
    } else if (order == 3) {
        const Vec2 verts[3] = {v0, v1, v2};
        for (int e = 0; e < 3; ++e) {
            Vec2 a = verts[e], b = verts[(e + 1) % 3];
            nodes_.push_back(a + (1.0 / 3.0) * (b - a));
            nodes_.push_back(a + (2.0 / 3.0) * (b - a));
        }
        nodes_.push_back({1.0 / 3.0, 1.0 / 3.0});
    }

    // Invert the Vandermonde at the nodes: row i of V^{-T} holds the monomial
    // coefficients of the i-th nodal basis function.
    Eigen::MatrixXd V(nbasis_, nbasis_);
    for (int i = 0; i < nbasis_; ++i)
        for (int m = 0; m < nbasis_; ++m)
            V(i, m) = std::pow(nodes_[i].x, kMonomials[m][0]) *
                      std::pow(nodes_[i].y, kMonomials[m][1]);
    Eigen::MatrixXd C = V.inverse().transpose();

    basis_.resize(nbasis_);
    for (int i = 0; i < nbasis_; ++i) {
        for (int m = 0; m < nbasis_; ++m) {
            double v = C(i, m);
            basis_[i].c[m] = (std::abs(v) < 1e-13) ? 0.0 : v;  // drop inversion noise
        }
    }

    for (int ax = 0; ax <= kMaxDegree; ++ax) {
        for (int ay = 0; ay + ax <= kMaxDegree; ++ay) {
            auto& tab = partials_[ax][ay];
            tab.resize(nbasis_);
            for (int i = 0; i < nbasis_; ++i) {
                Poly2 p = basis_[i];
                for (int k = 0; k < ax; ++k) p = p.dx();
                for (int k = 0; k < ay; ++k) p = p.dy();
                tab[i] = p;
            }
        }
    }
}

void ReferenceElement::values(Vec2 ref, double* out) const {
    for (int i = 0; i < nbasis_; ++i) out[i] = basis_[i].eval(ref);
}

void ReferenceElement::partial(int ax, int ay, Vec2 ref, double* out) const {
    if (ax < 0 || ay < 0) throw Error("negative derivative order");
    if (ax + ay > kMaxDegree) {
        for (int i = 0; i < nbasis_; ++i) out[i] = 0.0;
        return;
    }
    const auto& tab = partials_[ax][ay];
    for (int i = 0; i < nbasis_; ++i) out[i] = tab[i].eval(ref);
}

void ReferenceElement::directional(int j, Vec2 mu, Vec2 ref, double* out) const {
    if (j == 0) {
        values(ref, out);
        return;
    }
    if (j > kMaxDegree) {
        for (int i = 0; i < nbasis_; ++i) out[i] = 0.0;
        return;
    }
    // (mu . grad)^j = sum_{a+b=j} C(j,a) mu_x^a mu_y^b d^j/dxi^a deta^b
    for (int i = 0; i < nbasis_; ++i) out[i] = 0.0;
    double tmp[kNumMonomials];
    for (int a = j; a >= 0; --a) {
        int b = j - a;
        double binom = 1.0;
        for (int k = 0; k < b; ++k) binom = binom * (j - k) / (k + 1);
        double coef = binom * std::pow(mu.x, a) * std::pow(mu.y, b);
        if (coef == 0.0) continue;
        partial(a, b, ref, tmp);
        for (int i = 0; i < nbasis_; ++i) out[i] += coef * tmp[i];
    }
}

const ReferenceElement& ReferenceElement::get(int order) {
    static const ReferenceElement p1(1), p2(2), p3(3);
    switch (order) {
        case 1: return p1;
        case 2: return p2;
        case 3: return p3;
        default: throw Error("polynomial order must be 1..3");
    }
}

// ---------------------------------------------------------------------------
// ElementMap

ElementMap make_element_map(Vec2 a, Vec2 b, Vec2 c) {
    ElementMap em;
    em.v0 = a;
    em.b00 = b.x - a.x;
    em.b10 = b.y - a.y;
    em.b01 = c.x - a.x;
    em.b11 = c.y - a.y;
    em.det = em.b00 * em.b11 - em.b01 * em.b10;
    if (std::abs(em.det) <= 1e-14)
        throw DegenerateElement("triangle with |det B| <= 1e-14");
    double inv = 1.0 / em.det;
    em.g00 = em.b11 * inv;
    em.g01 = -em.b01 * inv;
    em.g10 = -em.b10 * inv;
    em.g11 = em.b00 * inv;
    return em;
}

void physical_partial(const ElementMap& em, const ReferenceElement& re, int ax, int ay,
                      Vec2 ref, double* out) {
    const int n = re.num_basis();
    if (ax + ay > kMaxDegree) {
        for (int i = 0; i < n; ++i) out[i] = 0.0;
        return;
    }
    // d/dx = g00 d/dxi + g10 d/deta, d/dy = g01 d/dxi + g11 d/deta; expand
    // the operator power with binomial coefficients and collect reference
    // partials by total order.
    for (int i = 0; i < n; ++i) out[i] = 0.0;
    double tmp[kNumMonomials];
    auto binom = [](int nn, int kk) {
        double r = 1.0;
        for (int t = 0; t < kk; ++t) r = r * (nn - t) / (t + 1);
        return r;
    };
    for (int i1 = 0; i1 <= ax; ++i1) {
        for (int i2 = 0; i2 <= ay; ++i2) {
            double coef = binom(ax, i1) * std::pow(em.g00, i1) * std::pow(em.g10, ax - i1) *
                          binom(ay, i2) * std::pow(em.g01, i2) * std::pow(em.g11, ay - i2);
            if (coef == 0.0) continue;
            re.partial(i1 + i2, ax + ay - i1 - i2, ref, tmp);
            for (int k = 0; k < n; ++k) out[k] += coef * tmp[k];
        }
    }
}

}  // namespace cutfem

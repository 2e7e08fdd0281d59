#include "cutfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cutfem {

void FormConfig::validate(int order) const {
    if (order < 1 || order > 3) throw ConfigError("polynomial order must be 1..3");
    if (beta <= 0.0) throw ConfigError("beta must be positive");
    if (gamma_j < 0.0) throw ConfigError("gamma_j must be nonnegative");
    if (variant == Variant::NonsymmetricTaylor) {
        if (taylor_k < 0 || taylor_k > 2) throw ConfigError("taylor_k must be 0..2");
        // A k-th order expansion needs k derivative orders, and the error
        // balance never benefits from k > p-1.
        if (taylor_k >= 1 && taylor_k > order - 1)
            throw ConfigError("taylor_k is capped at p-1 (got k=" +
                              std::to_string(taylor_k) + ", p=" + std::to_string(order) +
                              ")");
    } else if (variant == Variant::SymmetricK1) {
        if (order < 2) throw ConfigError("the symmetric variant needs p >= 2");
        if (nu_source != NuSource::FacetNormal)
            throw ConfigError("the symmetric variant requires the facet normal "
                              "as correction direction");
    }
}

std::vector<BoundaryQuadPoint> build_boundary_quadrature(const ActiveMesh& am,
                                                         const LevelSet& ls,
                                                         int gauss_points,
                                                         NuSource nu_source,
                                                         double search_radius) {
    if (search_radius <= 0.0) search_radius = 4.0 * am.h;
    SegmentRule rule = segment_rule(gauss_points);
    std::vector<BoundaryQuadPoint> out;
    for (int ord = 0; ord < am.num_active(); ++ord) {
        const CutSegment& seg = am.segments[ord];
        if (seg.length <= 0.0) continue;
        for (size_t q = 0; q < rule.points.size(); ++q) {
            BoundaryQuadPoint p;
            p.ordinal = ord;
            p.x = seg.a + rule.points[q] * (seg.b - seg.a);
            p.weight = rule.weights[q] * seg.length;
            p.n_h = seg.normal;

            Vec2 nu = seg.normal;
            if (nu_source == NuSource::ExactNormalAtProjection) {
                // Approximate the exact normal at the projected point: one
                // projection along the gradient direction, then re-read the
                // gradient there. Falls back to the facet normal where the
                // gradient degenerates.
                try {
                    Vec2 nu0 = exact_normal(ls, p.x);
                    auto pre = project_to_boundary(ls, p.x, nu0, search_radius);
                    nu = exact_normal(ls, pre.point);
                } catch (const DegenerateGradient&) {
                    nu = seg.normal;
                }
            }
            auto proj = project_to_boundary(ls, p.x, nu, search_radius);
            p.nu_h = nu;
            p.rho_h = proj.varsigma;
            p.p_h = proj.point;
            out.push_back(p);
        }
    }
    return out;
}

void taylor_row(const ReferenceElement& re, const ElementMap& em, Vec2 x, Vec2 nu,
                double rho, int k, double* out) {
    const int n = re.num_basis();
    Vec2 ref = em.inverse_map(x);
    re.values(ref, out);
    if (k <= 0) return;
    Vec2 mu = em.pull_direction(nu);
    double tmp[kNumMonomials];
    double coef = 1.0;
    for (int j = 1; j <= k; ++j) {
        coef *= rho / j;
        re.directional(j, mu, ref, tmp);
        for (int i = 0; i < n; ++i) out[i] += coef * tmp[i];
    }
}

void assemble_volume(const ActiveMesh& am, const DofMap& dm, const LevelSet& ls,
                     Triplets& a, Eigen::VectorXd& b) {
    const ReferenceElement& re = ReferenceElement::get(dm.order);
    const TriangleRule rule = triangle_rule(2 * dm.order);
    const int n = re.num_basis();
    const bool has_source = static_cast<bool>(ls.source_fn);

    double vals[kNumMonomials], gx[kNumMonomials], gy[kNumMonomials];
    for (int ord = 0; ord < am.num_active(); ++ord) {
        if (am.subtris[ord].empty()) continue;
        auto verts = am.element_vertices(am.active_elements[ord]);
        ElementMap em = make_element_map(verts[0], verts[1], verts[2]);
        const std::vector<int>& dofs = dm.element_dofs[ord];

        std::vector<QuadPoint> pts = element_volume_quadrature(am, ord, rule);
        std::vector<double> ke(n * n, 0.0);
        std::vector<double> fe(n, 0.0);
        for (const QuadPoint& qp : pts) {
            Vec2 ref = em.inverse_map(qp.x);
            re.partial(1, 0, ref, gx);
            re.partial(0, 1, ref, gy);
            Vec2 grad[kNumMonomials];
            for (int i = 0; i < n; ++i) grad[i] = em.push_gradient({gx[i], gy[i]});
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    ke[i * n + j] += qp.w * dot(grad[i], grad[j]);
            if (has_source) {
                double f = ls.source(qp.x);
                if (f != 0.0) {
                    re.values(ref, vals);
                    for (int i = 0; i < n; ++i) fe[i] += qp.w * f * vals[i];
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            b[dofs[i]] += fe[i];
            for (int j = 0; j < n; ++j)
                if (ke[i * n + j] != 0.0) a.emplace_back(dofs[i], dofs[j], ke[i * n + j]);
        }
    }
}

void assemble_boundary(const ActiveMesh& am, const DofMap& dm, const FormConfig& fc,
                       const std::vector<BoundaryQuadPoint>& bqp, Triplets& a) {
    const ReferenceElement& re = ReferenceElement::get(dm.order);
    const int n = re.num_basis();
    const double bh = fc.beta / am.h;

    double vals[kNumMonomials], gx[kNumMonomials], gy[kNumMonomials];
    double dn[kNumMonomials], trow[kNumMonomials];
    for (const BoundaryQuadPoint& p : bqp) {
        auto verts = am.element_vertices(am.active_elements[p.ordinal]);
        ElementMap em = make_element_map(verts[0], verts[1], verts[2]);
        const std::vector<int>& dofs = dm.element_dofs[p.ordinal];
        Vec2 ref = em.inverse_map(p.x);

        re.values(ref, vals);
        re.partial(1, 0, ref, gx);
        re.partial(0, 1, ref, gy);
        for (int i = 0; i < n; ++i) dn[i] = dot(p.n_h, em.push_gradient({gx[i], gy[i]}));

        switch (fc.variant) {
            case Variant::NonsymmetricTaylor: {
                taylor_row(re, em, p.x, p.nu_h, p.rho_h, fc.taylor_k, trow);
                // -(n.grad v, w) - (T_k v, n.grad w) + beta/h (T_k v, w);
                // v is the trial (column), w the test (row).
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        a.emplace_back(dofs[i], dofs[j],
                                       p.weight * (-dn[j] * vals[i] - trow[j] * dn[i] +
                                                   bh * trow[j] * vals[i]));
                break;
            }
            case Variant::SymmetricK1: {
                // T_1 along the facet normal on both slots keeps the matrix
                // symmetric: -(n.grad v, w) - (v, n.grad w)
                //            - rho (n.grad v, n.grad w) + beta/h (T_1 v, T_1 w).
                for (int i = 0; i < n; ++i) trow[i] = vals[i] + p.rho_h * dn[i];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        a.emplace_back(dofs[i], dofs[j],
                                       p.weight * (-dn[j] * vals[i] - vals[j] * dn[i] -
                                                   p.rho_h * dn[j] * dn[i] +
                                                   bh * trow[j] * trow[i]));
                break;
            }
            case Variant::ExactBoundaryNitsche: {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        a.emplace_back(dofs[i], dofs[j],
                                       p.weight * (-dn[j] * vals[i] - vals[j] * dn[i] +
                                                   bh * vals[j] * vals[i]));
                break;
            }
        }
    }
}

void assemble_ghost_penalty(const ActiveMesh& am, const DofMap& dm, double gamma_j,
                            Triplets& j) {
    if (gamma_j == 0.0 || am.ghost_faces.empty()) return;
    const ReferenceElement& re = ReferenceElement::get(dm.order);
    const int n = re.num_basis();
    const int p = dm.order;
    SegmentRule rule = segment_rule(p + 2);

    // Precompute h^{2l-1} factors.
    double hpow[kMaxDegree + 1];
    for (int l = 1; l <= p; ++l) hpow[l] = gamma_j * std::pow(am.h, 2 * l - 1);

    double tmp[kNumMonomials];
    for (const GhostFace& f : am.ghost_faces) {
        int ord_lo = am.active_index[f.elem_lo];
        int ord_hi = am.active_index[f.elem_hi];
        const std::vector<int>& dofs_lo = dm.element_dofs[ord_lo];
        const std::vector<int>& dofs_hi = dm.element_dofs[ord_hi];

        // United dof list; shared dofs appear once so jumps of continuous
        // functions cancel exactly.
        std::vector<int> slots(dofs_lo);
        std::vector<int> hi_slot(n);
        for (int i = 0; i < n; ++i) {
            auto it = std::find(slots.begin(), slots.end(), dofs_hi[i]);
            if (it == slots.end()) {
                hi_slot[i] = static_cast<int>(slots.size());
                slots.push_back(dofs_hi[i]);
            } else {
                hi_slot[i] = static_cast<int>(it - slots.begin());
            }
        }
        const int m = static_cast<int>(slots.size());

        auto verts_lo = am.element_vertices(f.elem_lo);
        auto verts_hi = am.element_vertices(f.elem_hi);
        ElementMap em_lo = make_element_map(verts_lo[0], verts_lo[1], verts_lo[2]);
        ElementMap em_hi = make_element_map(verts_hi[0], verts_hi[1], verts_hi[2]);
        Vec2 mu_lo = em_lo.pull_direction(f.normal);
        Vec2 mu_hi = em_hi.pull_direction(f.normal);

        std::vector<double> acc(m * m, 0.0);
        std::vector<double> row(m);
        for (size_t q = 0; q < rule.points.size(); ++q) {
            Vec2 x = f.a + rule.points[q] * (f.b - f.a);
            double w = rule.weights[q] * f.length;
            Vec2 ref_lo = em_lo.inverse_map(x);
            Vec2 ref_hi = em_hi.inverse_map(x);
            for (int l = 1; l <= p; ++l) {
                std::fill(row.begin(), row.end(), 0.0);
                re.directional(l, mu_lo, ref_lo, tmp);
                for (int i = 0; i < n; ++i) row[i] += tmp[i];
                re.directional(l, mu_hi, ref_hi, tmp);
                for (int i = 0; i < n; ++i) row[hi_slot[i]] -= tmp[i];
                double scale = w * hpow[l];
                for (int i = 0; i < m; ++i) {
                    if (row[i] == 0.0) continue;
                    for (int k = 0; k < m; ++k)
                        acc[i * m + k] += scale * row[i] * row[k];
                }
            }
        }
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k)
                if (acc[i * m + k] != 0.0)
                    j.emplace_back(slots[i], slots[k], acc[i * m + k]);
    }
}

void assemble_load_boundary(const ActiveMesh& am, const DofMap& dm, const LevelSet& ls,
                            const FormConfig& fc,
                            const std::vector<BoundaryQuadPoint>& bqp, Eigen::VectorXd& b) {
    const ReferenceElement& re = ReferenceElement::get(dm.order);
    const int n = re.num_basis();
    const double bh = fc.beta / am.h;
    const bool has_g = static_cast<bool>(ls.boundary_fn);

    double vals[kNumMonomials], gx[kNumMonomials], gy[kNumMonomials];
    double dn[kNumMonomials], trow[kNumMonomials];
    for (const BoundaryQuadPoint& p : bqp) {
        double g = 0.0;
        if (has_g)
            g = (fc.variant == Variant::ExactBoundaryNitsche) ? ls.boundary_value(p.x)
                                                              : ls.boundary_value(p.p_h);
        if (g == 0.0) continue;
        auto verts = am.element_vertices(am.active_elements[p.ordinal]);
        ElementMap em = make_element_map(verts[0], verts[1], verts[2]);
        const std::vector<int>& dofs = dm.element_dofs[p.ordinal];
        Vec2 ref = em.inverse_map(p.x);

        re.values(ref, vals);
        re.partial(1, 0, ref, gx);
        re.partial(0, 1, ref, gy);
        for (int i = 0; i < n; ++i) dn[i] = dot(p.n_h, em.push_gradient({gx[i], gy[i]}));

        if (fc.variant == Variant::SymmetricK1) {
            for (int i = 0; i < n; ++i) trow[i] = vals[i] + p.rho_h * dn[i];
            for (int i = 0; i < n; ++i)
                b[dofs[i]] += p.weight * (-g * dn[i] + bh * g * trow[i]);
        } else {
            for (int i = 0; i < n; ++i)
                b[dofs[i]] += p.weight * (-g * dn[i] + bh * g * vals[i]);
        }
    }
}

AssembledSystem assemble_system(const ActiveMesh& am, const DofMap& dm, const LevelSet& ls,
                                const FormConfig& fc,
                                const std::vector<BoundaryQuadPoint>& bqp) {
    fc.validate(dm.order);
    AssembledSystem sys;
    sys.ndof = dm.ndof;
    sys.h = am.h;
    sys.b = Eigen::VectorXd::Zero(dm.ndof);

    Triplets ta, tj;
    assemble_volume(am, dm, ls, ta, sys.b);
    assemble_boundary(am, dm, fc, bqp, ta);
    assemble_ghost_penalty(am, dm, fc.gamma_j, tj);
    assemble_load_boundary(am, dm, ls, fc, bqp, sys.b);

    sys.ghost.resize(dm.ndof, dm.ndof);
    sys.ghost.setFromTriplets(tj.begin(), tj.end());
    ta.insert(ta.end(), tj.begin(), tj.end());
    sys.A.resize(dm.ndof, dm.ndof);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    return sys;
}

double ghost_penalty_value(const ActiveMesh& am, const DofMap& dm, double gamma_j,
                           const Eigen::VectorXd& u) {
    if (gamma_j == 0.0 || am.ghost_faces.empty()) return 0.0;
    const ReferenceElement& re = ReferenceElement::get(dm.order);
    const int n = re.num_basis();
    const int p = dm.order;
    SegmentRule rule = segment_rule(p + 2);

    double hpow[kMaxDegree + 1];
    for (int l = 1; l <= p; ++l) hpow[l] = gamma_j * std::pow(am.h, 2 * l - 1);

    double tmp[kNumMonomials];
    double acc = 0.0;
    for (const GhostFace& f : am.ghost_faces) {
        const std::vector<int>& dofs_lo = dm.element_dofs[am.active_index[f.elem_lo]];
        const std::vector<int>& dofs_hi = dm.element_dofs[am.active_index[f.elem_hi]];
        auto verts_lo = am.element_vertices(f.elem_lo);
        auto verts_hi = am.element_vertices(f.elem_hi);
        ElementMap em_lo = make_element_map(verts_lo[0], verts_lo[1], verts_lo[2]);
        ElementMap em_hi = make_element_map(verts_hi[0], verts_hi[1], verts_hi[2]);
        Vec2 mu_lo = em_lo.pull_direction(f.normal);
        Vec2 mu_hi = em_hi.pull_direction(f.normal);

        for (size_t q = 0; q < rule.points.size(); ++q) {
            Vec2 x = f.a + rule.points[q] * (f.b - f.a);
            double w = rule.weights[q] * f.length;
            Vec2 ref_lo = em_lo.inverse_map(x);
            Vec2 ref_hi = em_hi.inverse_map(x);
            for (int l = 1; l <= p; ++l) {
                double jump = 0.0;
                re.directional(l, mu_lo, ref_lo, tmp);
                for (int i = 0; i < n; ++i) jump += u[dofs_lo[i]] * tmp[i];
                re.directional(l, mu_hi, ref_hi, tmp);
                for (int i = 0; i < n; ++i) jump -= u[dofs_hi[i]] * tmp[i];
                acc += w * hpow[l] * jump * jump;
            }
        }
    }
    return acc;
}

double energy_norm_squared(const ActiveMesh& am, const DofMap& dm, double gamma_j,
                           const std::vector<BoundaryQuadPoint>& bqp,
                           const Eigen::VectorXd& u) {
    const ReferenceElement& re = ReferenceElement::get(dm.order);
    const TriangleRule rule = triangle_rule(2 * dm.order);
    const int n = re.num_basis();

    double gx[kNumMonomials], gy[kNumMonomials], vals[kNumMonomials];
    double grad_part = 0.0;
    for (int ord = 0; ord < am.num_active(); ++ord) {
        if (am.subtris[ord].empty()) continue;
        auto verts = am.element_vertices(am.active_elements[ord]);
        ElementMap em = make_element_map(verts[0], verts[1], verts[2]);
        const std::vector<int>& dofs = dm.element_dofs[ord];
        for (const QuadPoint& qp : element_volume_quadrature(am, ord, rule)) {
            Vec2 ref = em.inverse_map(qp.x);
            re.partial(1, 0, ref, gx);
            re.partial(0, 1, ref, gy);
            Vec2 g{0.0, 0.0};
            for (int i = 0; i < n; ++i) {
                Vec2 gi = em.push_gradient({gx[i], gy[i]});
                g = g + u[dofs[i]] * gi;
            }
            grad_part += qp.w * dot(g, g);
        }
    }

    double ghost_part = ghost_penalty_value(am, dm, gamma_j, u);

    double bdry_part = 0.0;
    for (const BoundaryQuadPoint& p : bqp) {
        auto verts = am.element_vertices(am.active_elements[p.ordinal]);
        ElementMap em = make_element_map(verts[0], verts[1], verts[2]);
        const std::vector<int>& dofs = dm.element_dofs[p.ordinal];
        Vec2 ref = em.inverse_map(p.x);
        re.values(ref, vals);
        re.partial(1, 0, ref, gx);
        re.partial(0, 1, ref, gy);
        double v = 0.0, dnv = 0.0;
        for (int i = 0; i < n; ++i) {
            v += u[dofs[i]] * vals[i];
            dnv += u[dofs[i]] * dot(p.n_h, em.push_gradient({gx[i], gy[i]}));
        }
        bdry_part += p.weight * (am.h * dnv * dnv + v * v / am.h);
    }
    return grad_part + ghost_part + bdry_part;
}

void dump_matrix(const SpMat& A, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    for (int r = 0; r < A.outerSize(); ++r)
        for (SpMat::InnerIterator it(A, r); it; ++it)
            std::fprintf(f, "%d %d %.17g\n", static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
    std::fclose(f);
}

}  // namespace cutfem

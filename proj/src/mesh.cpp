#include "cutfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace cutfem {

BackgroundMesh build_background(Vec2 lo, Vec2 hi, int n) {
    if (n < 1) throw Error("background mesh needs n >= 1");
    if (!(hi.x > lo.x) || !(hi.y > lo.y)) throw Error("empty background box");
    BackgroundMesh mesh;
    mesh.box_lo = lo;
    mesh.box_hi = hi;
    const double dx = (hi.x - lo.x) / n;
    const double dy = (hi.y - lo.y) / n;
    mesh.h = std::hypot(dx, dy);

    mesh.vertices.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            mesh.vertices.push_back({lo.x + i * dx, lo.y + j * dy});

    mesh.triangles.reserve(2 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            int v00 = j * (n + 1) + i;
            int v10 = v00 + 1;
            int v01 = v00 + (n + 1);
            int v11 = v01 + 1;
            // Split along the v00-v11 diagonal, both triangles CCW.
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    return mesh;
}

const char* to_string(ElementClass c) {
    switch (c) {
        case ElementClass::Inside: return "inside";
        case ElementClass::Cut: return "cut";
        case ElementClass::OutsideButActive: return "outside_active";
        case ElementClass::Excluded: return "excluded";
    }
    return "?";
}

std::vector<double> interpolate_levelset(const LevelSet& ls, const BackgroundMesh& mesh) {
    std::vector<double> phi(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) phi[i] = ls.value(mesh.vertices[i]);
    return phi;
}

std::vector<ElementClass> classify_elements(const LevelSet& ls, const BackgroundMesh& mesh,
                                            const std::vector<double>& phi_nodal) {
    std::vector<ElementClass> cls(mesh.triangles.size());
    for (size_t e = 0; e < mesh.triangles.size(); ++e) {
        const auto& t = mesh.triangles[e];
        int neg = 0;
        for (int k = 0; k < 3; ++k)
            if (phi_nodal[t[k]] < 0.0) ++neg;  // exact zero counts as positive
        if (neg == 3) {
            cls[e] = ElementClass::Inside;
        } else if (neg > 0) {
            cls[e] = ElementClass::Cut;
        } else {
            // No discrete-domain part; probe the exact level set at seven
            // sample points for an intersection with the exact domain.
            Vec2 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
            const Vec2 samples[7] = {a,
                                     b,
                                     c,
                                     0.5 * (a + b),
                                     0.5 * (b + c),
                                     0.5 * (c + a),
                                     (1.0 / 3.0) * (a + b + c)};
            bool hit = false;
            for (const Vec2& s : samples)
                if (ls.value(s) < 0.0) {
                    hit = true;
                    break;
                }
            cls[e] = hit ? ElementClass::OutsideButActive : ElementClass::Excluded;
        }
    }
    return cls;
}

namespace {

// Zero crossing on the segment (u,fu)-(v,fv), computed in a canonical vertex
// order so the two elements sharing an edge produce the bitwise-identical
// point.
Vec2 edge_crossing(Vec2 u, double fu, Vec2 v, double fv) {
    if (v.x < u.x || (v.x == u.x && v.y < u.y)) {
        std::swap(u, v);
        std::swap(fu, fv);
    }
    double t = fu / (fu - fv);
    return u + t * (v - u);
}

double subtri_drop_threshold(double tri_area) {
    // Keep |det| of kept sub-triangles safely above the degenerate-map guard.
    return std::max(1e-12 * std::abs(tri_area), 1e-13);
}

}  // namespace

std::vector<std::array<Vec2, 3>> cut_cell_subtriangles(const std::array<Vec2, 3>& tri,
                                                       const std::array<double, 3>& phi) {
    bool neg[3];
    int nneg = 0;
    for (int k = 0; k < 3; ++k) {
        neg[k] = phi[k] < 0.0;
        if (neg[k]) ++nneg;
    }
    std::vector<std::array<Vec2, 3>> out;
    if (nneg == 0) return out;
    if (nneg == 3) {
        out.push_back(tri);
        return out;
    }

    const double area = triangle_area(tri[0], tri[1], tri[2]);
    const double drop = subtri_drop_threshold(area);
    auto push = [&](Vec2 a, Vec2 b, Vec2 c) {
        if (std::abs(triangle_area(a, b, c)) > drop) out.push_back({a, b, c});
    };

    if (nneg == 1) {
        int iN = neg[0] ? 0 : (neg[1] ? 1 : 2);
        int i1 = (iN + 1) % 3, i2 = (iN + 2) % 3;
        Vec2 c1 = edge_crossing(tri[iN], phi[iN], tri[i1], phi[i1]);
        Vec2 c2 = edge_crossing(tri[iN], phi[iN], tri[i2], phi[i2]);
        push(tri[iN], c1, c2);
    } else {  // nneg == 2: quadrilateral, split along one diagonal
        int iP = !neg[0] ? 0 : (!neg[1] ? 1 : 2);
        int iN1 = (iP + 1) % 3, iN2 = (iP + 2) % 3;
        Vec2 cA = edge_crossing(tri[iN2], phi[iN2], tri[iP], phi[iP]);
        Vec2 cB = edge_crossing(tri[iP], phi[iP], tri[iN1], phi[iN1]);
        push(tri[iN1], tri[iN2], cA);
        push(tri[iN1], cA, cB);
    }
    return out;
}

CutSegment boundary_segment(const std::array<Vec2, 3>& tri, const std::array<double, 3>& phi) {
    bool neg[3];
    int nneg = 0;
    for (int k = 0; k < 3; ++k) {
        neg[k] = phi[k] < 0.0;
        if (neg[k]) ++nneg;
    }
    if (nneg == 0 || nneg == 3)
        throw DegenerateCut("boundary segment requested for an uncut triangle");

    CutSegment seg;
    if (nneg == 1) {
        int iN = neg[0] ? 0 : (neg[1] ? 1 : 2);
        int i1 = (iN + 1) % 3, i2 = (iN + 2) % 3;
        seg.a = edge_crossing(tri[iN], phi[iN], tri[i1], phi[i1]);
        seg.b = edge_crossing(tri[iN], phi[iN], tri[i2], phi[i2]);
    } else {
        int iP = !neg[0] ? 0 : (!neg[1] ? 1 : 2);
        int iN1 = (iP + 1) % 3, iN2 = (iP + 2) % 3;
        seg.a = edge_crossing(tri[iN2], phi[iN2], tri[iP], phi[iP]);
        seg.b = edge_crossing(tri[iP], phi[iP], tri[iN1], phi[iN1]);
    }
    seg.length = norm(seg.b - seg.a);

    // grad of the linear interpolant: sum phi_i grad lambda_i with
    // grad lambda_i = rot_cw(p_{i+1} - p_{i+2}) / (2A). It is normal to the
    // zero line and points out of {phi_h < 0} by construction.
    double twoA = 2.0 * triangle_area(tri[0], tri[1], tri[2]);
    Vec2 g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        Vec2 d = tri[(i + 1) % 3] - tri[(i + 2) % 3];
        g = g + (phi[i] / twoA) * Vec2{d.y, -d.x};
    }
    double gn = norm(g);
    if (gn <= 0.0) throw DegenerateCut("cut triangle with vanishing interpolant gradient");
    seg.normal = g / gn;
    return seg;
}

ActiveMesh build_active_mesh(const LevelSet& ls, const BackgroundMesh& mesh) {
    ActiveMesh am;
    am.background = mesh;
    am.h = mesh.h;
    am.phi_nodal = interpolate_levelset(ls, mesh);
    am.cls = classify_elements(ls, mesh, am.phi_nodal);

    const int ne = static_cast<int>(mesh.triangles.size());
    am.active_index.assign(ne, -1);
    for (int e = 0; e < ne; ++e) {
        if (am.cls[e] != ElementClass::Excluded) {
            am.active_index[e] = static_cast<int>(am.active_elements.size());
            am.active_elements.push_back(e);
        }
    }

    am.subtris.resize(am.num_active());
    am.segments.resize(am.num_active());
    for (int ord = 0; ord < am.num_active(); ++ord) {
        int e = am.active_elements[ord];
        auto verts = am.element_vertices(e);
        const auto& t = mesh.triangles[e];
        std::array<double, 3> phi = {am.phi_nodal[t[0]], am.phi_nodal[t[1]],
                                     am.phi_nodal[t[2]]};
        switch (am.cls[e]) {
            case ElementClass::Inside:
                am.subtris[ord] = {verts};
                break;
            case ElementClass::Cut:
                am.subtris[ord] = cut_cell_subtriangles(verts, phi);
                am.segments[ord] = boundary_segment(verts, phi);
                break;
            default:
                break;  // OutsideButActive: no discrete-domain part
        }
    }

    // Edge -> adjacent elements, in sorted key order for determinism.
    std::map<std::pair<int, int>, std::array<int, 2>> edges;
    for (int e = 0; e < ne; ++e) {
        const auto& t = mesh.triangles[e];
        for (int k = 0; k < 3; ++k) {
            int u = t[k], v = t[(k + 1) % 3];
            std::pair<int, int> key{std::min(u, v), std::max(u, v)};
            auto [it, fresh] = edges.try_emplace(key, std::array<int, 2>{-1, -1});
            it->second[fresh ? 0 : 1] = e;
        }
    }

    auto is_band = [&](int e) {
        return am.cls[e] == ElementClass::Cut || am.cls[e] == ElementClass::OutsideButActive;
    };
    for (const auto& [key, elems] : edges) {
        int e0 = elems[0], e1 = elems[1];
        if (e0 < 0 || e1 < 0) continue;  // box boundary
        if (am.cls[e0] == ElementClass::Excluded || am.cls[e1] == ElementClass::Excluded)
            continue;
        if (!is_band(e0) && !is_band(e1)) continue;
        GhostFace f;
        f.elem_lo = std::min(e0, e1);
        f.elem_hi = std::max(e0, e1);
        f.a = mesh.vertices[key.first];
        f.b = mesh.vertices[key.second];
        Vec2 d = f.b - f.a;
        f.length = norm(d);
        f.normal = Vec2{d.y, -d.x} / f.length;
        // Orient from the lower- toward the higher-indexed element.
        auto centroid = [&](int e) {
            auto v = am.element_vertices(e);
            return (1.0 / 3.0) * (v[0] + v[1] + v[2]);
        };
        if (dot(f.normal, centroid(f.elem_hi) - centroid(f.elem_lo)) < 0.0)
            f.normal = -f.normal;
        am.ghost_faces.push_back(f);
    }

    // A boundary segment lying exactly on a mesh edge is fine on its own
    // (the nudge rule puts the discrete domain entirely on one side), but if
    // the elements on both sides each produced that segment the boundary
    // would be double counted; that means the nudge rule failed.
    using Quantized = std::pair<long long, long long>;
    std::map<std::pair<Quantized, Quantized>, int> seg_on_edge;
    const double snap = 1e-9 * mesh.h;
    auto quantize = [&](Vec2 p) {
        return Quantized{std::llround(p.x / snap), std::llround(p.y / snap)};
    };
    for (int ord = 0; ord < am.num_active(); ++ord) {
        const CutSegment& s = am.segments[ord];
        if (s.length <= 0.0) continue;
        int e = am.active_elements[ord];
        auto verts = am.element_vertices(e);
        for (int k = 0; k < 3; ++k) {
            Vec2 u = verts[k], v = verts[(k + 1) % 3];
            bool fwd = norm(s.a - u) < snap && norm(s.b - v) < snap;
            bool bwd = norm(s.a - v) < snap && norm(s.b - u) < snap;
            if (fwd || bwd) {
                Quantized ku = quantize(u), kv = quantize(v);
                std::pair<Quantized, Quantized> key{std::min(ku, kv), std::max(ku, kv)};
                if (++seg_on_edge[key] > 1)
                    throw DegenerateCut("discrete boundary coincides with a mesh edge "
                                        "shared by two cut elements");
            }
        }
    }

    return am;
}

std::vector<QuadPoint> element_volume_quadrature(const ActiveMesh& am, int ordinal,
                                                 const TriangleRule& rule) {
    std::vector<QuadPoint> pts;
    for (const auto& st : am.subtris[ordinal]) {
        ElementMap em = make_element_map(st[0], st[1], st[2]);
        double jac = std::abs(em.det);
        for (size_t q = 0; q < rule.points.size(); ++q)
            pts.push_back({em.map(rule.points[q]), rule.weights[q] * jac});
    }
    return pts;
}

void dump_mesh(const ActiveMesh& am, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    for (const Vec2& v : am.background.vertices)
        std::fprintf(f, "v %.17g %.17g\n", v.x, v.y);
    for (const auto& t : am.background.triangles)
        std::fprintf(f, "t %d %d %d\n", t[0], t[1], t[2]);
    for (size_t e = 0; e < am.cls.size(); ++e)
        std::fprintf(f, "c %zu %s\n", e, to_string(am.cls[e]));
    std::fclose(f);
}

}  // namespace cutfem

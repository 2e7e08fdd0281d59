#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "cutfem/mesh.hpp"

using namespace cutfem;

TEST_CASE("background mesh is a CCW criss-cross grid") {
    BackgroundMesh bg = build_background({-1.0, -1.0}, {1.0, 1.0}, 4);
    CHECK(bg.vertices.size() == 25);
    CHECK(bg.triangles.size() == 32);
    CHECK(bg.h == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-15));
    double area = 0.0, longest = 0.0;
    for (const auto& t : bg.triangles) {
        Vec2 a = bg.vertices[t[0]], b = bg.vertices[t[1]], c = bg.vertices[t[2]];
        double s = triangle_area(a, b, c);
        CHECK(s > 0.0);  // CCW
        area += s;
        longest = std::max({longest, norm(b - a), norm(c - b), norm(a - c)});
    }
    CHECK(area == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(longest == doctest::Approx(bg.h).epsilon(1e-13));
}

TEST_CASE("levelset interpolation samples the vertices") {
    LevelSet ls = make_ring(0.25, 0.75);
    BackgroundMesh bg = build_background({-1.0, -1.0}, {1.0, 1.0}, 8);
    std::vector<double> phi = interpolate_levelset(ls, bg);
    REQUIRE(phi.size() == bg.vertices.size());
    for (size_t i = 0; i < phi.size(); ++i)
        CHECK(phi[i] == doctest::Approx(ls.value(bg.vertices[i])).epsilon(1e-15));
}

TEST_CASE("classification covers all cases and the nudge rule") {
    LevelSet ls = make_circle({0.0, 0.0}, 0.5);
    BackgroundMesh bg = build_background({-1.0, -1.0}, {1.0, 1.0}, 16);
    std::vector<double> phi = interpolate_levelset(ls, bg);
    std::vector<ElementClass> cls = classify_elements(ls, bg, phi);
    REQUIRE(cls.size() == bg.triangles.size());
    int inside = 0, cut = 0, outside_active = 0, excluded = 0;
    for (size_t e = 0; e < cls.size(); ++e) {
        const auto& t = bg.triangles[e];
        int neg = 0;
        for (int v : t)
            if (phi[v] < 0.0) ++neg;
        switch (cls[e]) {
            case ElementClass::Inside:
                CHECK(neg == 3);
                ++inside;
                break;
            case ElementClass::Cut:
                CHECK(neg >= 1);
                CHECK(neg <= 2);
                ++cut;
                break;
            case ElementClass::OutsideButActive:
                CHECK(neg == 0);
                ++outside_active;
                break;
            case ElementClass::Excluded:
                CHECK(neg == 0);
                ++excluded;
                break;
        }
    }
    CHECK(inside > 0);
    CHECK(cut > 0);
    CHECK(excluded > 0);
    CHECK(inside + cut + outside_active + excluded == static_cast<int>(cls.size()));
}

TEST_CASE("cut subtriangles split corner and quad configurations") {
    std::array<Vec2, 3> tri = {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};

    auto total_area = [](const std::vector<std::array<Vec2, 3>>& ts) {
        double s = 0.0;
        for (const auto& t : ts) s += std::abs(triangle_area(t[0], t[1], t[2]));
        return s;
    };

    // One negative vertex: the corner triangle with midpoint cut points.
    auto corner = cut_cell_subtriangles(tri, {-1.0, 1.0, 1.0});
    CHECK(corner.size() == 1);
    CHECK(total_area(corner) == doctest::Approx(0.125).epsilon(1e-14));

    // Two negative vertices: the complementary quadrilateral.
    auto quad = cut_cell_subtriangles(tri, {-1.0, -1.0, 1.0});
    CHECK(quad.size() == 2);
    CHECK(total_area(quad) == doctest::Approx(0.375).epsilon(1e-14));

    // Uncut cases.
    auto whole = cut_cell_subtriangles(tri, {-1.0, -0.5, -2.0});
    CHECK(total_area(whole) == doctest::Approx(0.5).epsilon(1e-14));
    auto none = cut_cell_subtriangles(tri, {1.0, 0.5, 2.0});
    CHECK(none.empty());

    // Nudge rule at exact nodal zeros: zero counts positive, so (0,0,+) has
    // no domain part while (0,0,-) keeps the whole triangle.
    auto zero_pos = cut_cell_subtriangles(tri, {0.0, 0.0, 1.0});
    CHECK(total_area(zero_pos) == doctest::Approx(0.0));
    auto zero_neg = cut_cell_subtriangles(tri, {0.0, 0.0, -1.0});
    CHECK(total_area(zero_neg) == doctest::Approx(0.5).epsilon(1e-14));

    // Monte Carlo cross-check of the negative-side area for random cuts.
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_real_distribution<double> pt(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::array<double, 3> phi = {uni(rng), uni(rng), uni(rng)};
        if (std::abs(phi[0]) < 0.05 || std::abs(phi[1]) < 0.05 || std::abs(phi[2]) < 0.05)
            continue;
        double area = total_area(cut_cell_subtriangles(tri, phi));
        int hits = 0;
        const int samples = 200000;
        for (int s = 0; s < samples; ++s) {
            double x = pt(rng), y = pt(rng);
            if (x + y > 1.0) {
                x = 1.0 - x;
                y = 1.0 - y;
            }
            double v = phi[0] * (1.0 - x - y) + phi[1] * x + phi[2] * y;
            if (v < 0.0) ++hits;
        }
        double mc = 0.5 * hits / samples;
        CHECK(std::abs(area - mc) < 5e-3);
    }
}

TEST_CASE("boundary segment geometry and orientation") {
    std::array<Vec2, 3> tri = {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
    CutSegment seg = boundary_segment(tri, {-1.0, 1.0, 1.0});
    CHECK(seg.length == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
    CHECK(norm(seg.b - seg.a) == doctest::Approx(seg.length).epsilon(1e-14));
    // Normal is unit, points out of {phi < 0} along grad of the interpolant.
    CHECK(norm(seg.normal) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(seg.normal.x == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(seg.normal.y == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(std::abs(dot(seg.normal, seg.b - seg.a)) < 1e-14);

    // Endpoints interpolate the zero crossing.
    auto on_zero = [&](Vec2 p) {
        double x = p.x, y = p.y;
        return std::abs(-1.0 * (1.0 - x - y) + 1.0 * x + 1.0 * y);
    };
    CHECK(on_zero(seg.a) < 1e-14);
    CHECK(on_zero(seg.b) < 1e-14);
}

TEST_CASE("active mesh wires classes, cuts, segments and ghost faces together") {
    LevelSet ls = make_circle({0.0, 0.0}, 0.5);
    BackgroundMesh bg = build_background({-1.0, -1.0}, {1.0, 1.0}, 16);
    ActiveMesh am = build_active_mesh(ls, bg);
    CHECK(am.h == doctest::Approx(bg.h));
    REQUIRE(am.num_active() > 0);

    // active_elements ascending, active_index is its inverse.
    for (int ord = 0; ord < am.num_active(); ++ord) {
        int e = am.active_elements[ord];
        CHECK(am.active_index[e] == ord);
        if (ord > 0) CHECK(e > am.active_elements[ord - 1]);
        CHECK(am.cls[e] != ElementClass::Excluded);
    }
    for (size_t e = 0; e < am.cls.size(); ++e)
        if (am.cls[e] == ElementClass::Excluded) CHECK(am.active_index[e] == -1);

    // Subtriangle areas: full triangle when Inside, empty when OutsideButActive.
    for (int ord = 0; ord < am.num_active(); ++ord) {
        int e = am.active_elements[ord];
        auto verts = am.element_vertices(e);
        double full = triangle_area(verts[0], verts[1], verts[2]);
        double part = 0.0;
        for (const auto& t : am.subtris[ord])
            part += std::abs(triangle_area(t[0], t[1], t[2]));
        if (am.cls[e] == ElementClass::Inside)
            CHECK(part == doctest::Approx(full).epsilon(1e-13));
        if (am.cls[e] == ElementClass::OutsideButActive) CHECK(am.subtris[ord].empty());
        if (am.cls[e] == ElementClass::Cut) {
            CHECK(part > 0.0);
            CHECK(part < full + 1e-13);
        }
    }

    // Segments live on cut elements, normals are unit and point outward
    // (level set increases along them).
    int with_segment = 0;
    for (int ord = 0; ord < am.num_active(); ++ord) {
        const CutSegment& s = am.segments[ord];
        if (s.length == 0.0) continue;
        ++with_segment;
        CHECK(am.cls[am.active_elements[ord]] == ElementClass::Cut);
        CHECK(norm(s.normal) == doctest::Approx(1.0).epsilon(1e-12));
        Vec2 mid = 0.5 * (s.a + s.b);
        CHECK(ls.value(mid + 0.01 * s.normal) > ls.value(mid - 0.01 * s.normal));
    }
    CHECK(with_segment > 0);

    // Ghost faces: shared edges between active elements, at least one side
    // cut or outside-active, normal from lo to hi.
    CHECK(!am.ghost_faces.empty());
    for (const GhostFace& f : am.ghost_faces) {
        CHECK(f.elem_lo < f.elem_hi);
        CHECK(am.active_index[f.elem_lo] >= 0);
        CHECK(am.active_index[f.elem_hi] >= 0);
        bool touches_boundary_zone =
            am.cls[f.elem_lo] == ElementClass::Cut ||
            am.cls[f.elem_lo] == ElementClass::OutsideButActive ||
            am.cls[f.elem_hi] == ElementClass::Cut ||
            am.cls[f.elem_hi] == ElementClass::OutsideButActive;
        CHECK(touches_boundary_zone);
        CHECK(f.length == doctest::Approx(norm(f.b - f.a)).epsilon(1e-13));
        CHECK(norm(f.normal) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(dot(f.normal, f.b - f.a)) < 1e-12);

        auto centroid = [&](int e) {
            auto v = am.element_vertices(e);
            return (v[0] + v[1] + v[2]) / 3.0;
        };
        CHECK(dot(f.normal, centroid(f.elem_hi) - centroid(f.elem_lo)) > 0.0);

        // Both endpoints are vertices of both elements.
        for (Vec2 p : {f.a, f.b}) {
            int shared = 0;
            for (int e : {f.elem_lo, f.elem_hi})
                for (Vec2 v : am.element_vertices(e))
                    if (norm(v - p) < 1e-13) ++shared;
            CHECK(shared == 2);
        }
    }
}

TEST_CASE("volume quadrature recovers the area of a disk to second order") {
    LevelSet ls = make_circle({0.0, 0.0}, 0.5);
    TriangleRule rule = triangle_rule(2);
    double prev_err = 0.0;
    for (int n : {16, 32, 64}) {
        BackgroundMesh bg = build_background({-1.0, -1.0}, {1.0, 1.0}, n);
        ActiveMesh am = build_active_mesh(ls, bg);
        double area = 0.0, length = 0.0;
        for (int ord = 0; ord < am.num_active(); ++ord)
            for (const QuadPoint& q : element_volume_quadrature(am, ord, rule)) {
                CHECK(q.w > 0.0);
                area += q.w;
            }
        for (const CutSegment& s : am.segments) length += s.length;
        double area_err = std::abs(area - M_PI * 0.25);
        double length_err = std::abs(length - M_PI);
        CHECK(area_err < 0.6 * am.h * am.h);
        CHECK(length_err < 0.9 * am.h * am.h);
        if (prev_err > 0.0) CHECK(prev_err / area_err > 3.0);  // O(h^2) decay
        prev_err = area_err;
    }
}

TEST_CASE("grid-aligned interface keeps the discrete domain intact") {
    // Zero set exactly on a mesh line: the nudge rule assigns the line to the
    // positive side, nothing degenerates, and the negative half keeps its area.
    LevelSet ls = make_affine({0.0, 1.0}, 0.0);
    BackgroundMesh bg = build_background({-1.0, -1.0}, {1.0, 1.0}, 8);
    ActiveMesh am = build_active_mesh(ls, bg);
    double area = 0.0;
    TriangleRule rule = triangle_rule(2);
    for (int ord = 0; ord < am.num_active(); ++ord)
        for (const QuadPoint& q : element_volume_quadrature(am, ord, rule)) area += q.w;
    CHECK(area == doctest::Approx(2.0).epsilon(1e-13));
    double seg_total = 0.0;
    for (int ord = 0; ord < am.num_active(); ++ord) {
        auto v = am.element_vertices(am.active_elements[ord]);
        CHECK((v[0].y + v[1].y + v[2].y) / 3.0 < 0.0);  // active only below the line
        const CutSegment& s = am.segments[ord];
        if (s.length == 0.0) continue;
        seg_total += s.length;
        CHECK(std::abs(s.a.y) < 1e-14);
        CHECK(std::abs(s.b.y) < 1e-14);
        CHECK(s.normal.y == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(seg_total == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("mesh dump lists vertices, triangles and classifications") {
    LevelSet ls = make_circle({0.0, 0.0}, 0.5);
    BackgroundMesh bg = build_background({-1.0, -1.0}, {1.0, 1.0}, 8);
    ActiveMesh am = build_active_mesh(ls, bg);
    const char* path = "mesh_dump_test.txt";
    dump_mesh(am, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    int nv = 0, nt = 0, nc = 0;
    std::string tag;
    while (in >> tag) {
        std::string rest;
        std::getline(in, rest);
        if (tag == "v") ++nv;
        if (tag == "t") ++nt;
        if (tag == "c") ++nc;
    }
    CHECK(nv == static_cast<int>(bg.vertices.size()));
    CHECK(nt == static_cast<int>(bg.triangles.size()));
    CHECK(nc == static_cast<int>(bg.triangles.size()));
    std::remove(path);
}

#pragma once

#include <array>
#include <string>
#include <vector>

#include "cutfem/femcore.hpp"
#include "cutfem/geometry.hpp"

namespace cutfem {

// Structured triangulation of a box: n x n squares, each split along the
// same (lower-left to upper-right) diagonal. The mesh size h is the diagonal
// length, the longest edge in the mesh.
struct BackgroundMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW vertex indices
    double h = 0.0;
    Vec2 box_lo{0.0, 0.0}, box_hi{0.0, 0.0};
};

BackgroundMesh build_background(Vec2 lo, Vec2 hi, int n);

enum class ElementClass {
    Inside,            // all nodal phi < 0: fully in the discrete domain
    Cut,               // mixed nodal signs: crossed by the discrete boundary
    OutsideButActive,  // no discrete-domain part, but intersects the exact domain
    Excluded,          // not part of the active mesh
};

const char* to_string(ElementClass c);

// Nodal values of the piecewise-linear interpolant of the level set.
std::vector<double> interpolate_levelset(const LevelSet& ls, const BackgroundMesh& mesh);

// Vertex-sign classification with the nudge rule: a nodal value of exactly
// zero counts as positive, so the discrete domain {phi_h < 0} never touches
// a degenerate zero-measure cut. The "intersects the exact domain" probe for
// OutsideButActive samples phi at the 3 vertices, 3 edge midpoints and the
// barycenter.
std::vector<ElementClass> classify_elements(const LevelSet& ls, const BackgroundMesh& mesh,
                                            const std::vector<double>& phi_nodal);

struct QuadPoint {
    Vec2 x;
    double w = 0.0;
};

// Sub-triangulation of {phi_h < 0} inside one triangle: the whole triangle,
// or the corner triangle / split quadrilateral left of the zero line of the
// linear interpolant. Degenerate (zero-area) pieces are dropped.
std::vector<std::array<Vec2, 3>> cut_cell_subtriangles(const std::array<Vec2, 3>& tri,
                                                       const std::array<double, 3>& phi);

// Straight segment approximating the boundary inside one cut triangle, with
// the outward unit normal n_h (aligned with grad phi_h). Zero-length
// segments (the zero line grazing a vertex) yield length == 0 and are
// skipped by callers.
struct CutSegment {
    Vec2 a, b;
    Vec2 normal{0.0, 0.0};
    double length = 0.0;
};

CutSegment boundary_segment(const std::array<Vec2, 3>& tri, const std::array<double, 3>& phi);

// Interior face of the active mesh entering the ghost penalty: both
// neighbors active, at least one of them Cut or OutsideButActive. The face
// normal points from the lower- to the higher-indexed element.
struct GhostFace {
    int elem_lo, elem_hi;  // background element indices, elem_lo < elem_hi
    Vec2 a, b;
    Vec2 normal;
    double length;
};

// Everything downstream needs about one cut discretization: classification,
// per-element cut-cell geometry, boundary segments and the ghost face set.
struct ActiveMesh {
    BackgroundMesh background;
    std::vector<double> phi_nodal;
    std::vector<ElementClass> cls;       // per background element
    std::vector<int> active_elements;    // background indices, ascending
    std::vector<int> active_index;       // background index -> ordinal in active_elements, or -1
    // Indexed like active_elements:
    std::vector<std::vector<std::array<Vec2, 3>>> subtris;  // covers K cap {phi_h<0}
    std::vector<CutSegment> segments;                       // length 0 when none
    std::vector<GhostFace> ghost_faces;
    double h = 0.0;

    int num_active() const { return static_cast<int>(active_elements.size()); }
    std::array<Vec2, 3> element_vertices(int background_elem) const {
        const auto& t = background.triangles[background_elem];
        return {background.vertices[t[0]], background.vertices[t[1]],
                background.vertices[t[2]]};
    }
};

ActiveMesh build_active_mesh(const LevelSet& ls, const BackgroundMesh& mesh);

// Volume quadrature over K cap {phi_h < 0} for an active element (by
// ordinal), mapping the reference rule onto each sub-triangle. Empty for
// OutsideButActive elements.
std::vector<QuadPoint> element_volume_quadrature(const ActiveMesh& am, int ordinal,
                                                 const TriangleRule& rule);

// Plain-text dump: "v x y" per vertex, "t i j k" per triangle, "c elem class"
// per active-mesh classification.
void dump_mesh(const ActiveMesh& am, const std::string& path);

}  // namespace cutfem

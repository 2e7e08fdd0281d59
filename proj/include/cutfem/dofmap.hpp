#pragma once

#include <vector>

#include "cutfem/mesh.hpp"

namespace cutfem {

// Continuous Lagrange dof numbering over the active elements. Vertex and
// edge dofs are shared topologically (keyed by global vertex / sorted vertex
// pair), so conformity is exact by construction. element_dofs rows follow
// the ReferenceElement node ordering.
struct DofMap {
    int order = 1;
    int ndof = 0;
    std::vector<std::vector<int>> element_dofs;  // per active ordinal
    std::vector<Vec2> dof_coords;
};

DofMap build_dof_map(const ActiveMesh& am, int order);

}  // namespace cutfem

#include "cutfem/dofmap.hpp"

#include <map>
#include <utility>

namespace cutfem {

DofMap build_dof_map(const ActiveMesh& am, int order) {
    if (order < 1 || order > 3) throw Error("polynomial order must be 1..3");
    DofMap dm;
    dm.order = order;

    std::map<int, int> vertex_dof;
    // Edge dofs in canonical orientation (low global vertex -> high); P3 has
    // two per edge, stored in that direction.
    std::map<std::pair<int, int>, std::array<int, 2>> edge_dofs;
    const auto& mesh = am.background;

    auto get_vertex = [&](int v) {
        auto [it, fresh] = vertex_dof.try_emplace(v, dm.ndof);
        if (fresh) {
            ++dm.ndof;
            dm.dof_coords.push_back(mesh.vertices[v]);
        }
        return it->second;
    };
    auto get_edge = [&](int u, int v) -> const std::array<int, 2>& {
        std::pair<int, int> key{std::min(u, v), std::max(u, v)};
        auto [it, fresh] = edge_dofs.try_emplace(key, std::array<int, 2>{-1, -1});
        if (fresh) {
            Vec2 a = mesh.vertices[key.first], b = mesh.vertices[key.second];
            if (order == 2) {
                it->second[0] = dm.ndof++;
                dm.dof_coords.push_back(0.5 * (a + b));
            } else {  // order == 3
                it->second[0] = dm.ndof++;
                dm.dof_coords.push_back(a + (1.0 / 3.0) * (b - a));
                it->second[1] = dm.ndof++;
                dm.dof_coords.push_back(a + (2.0 / 3.0) * (b - a));
            }
        }
        return it->second;
    };

    dm.element_dofs.resize(am.num_active());
    for (int ord = 0; ord < am.num_active(); ++ord) {
        const auto& t = mesh.triangles[am.active_elements[ord]];
        std::vector<int>& dofs = dm.element_dofs[ord];
        dofs.reserve(monomial_count(order));
        for (int k = 0; k < 3; ++k) dofs.push_back(get_vertex(t[k]));
        if (order >= 2) {
            for (int e = 0; e < 3; ++e) {
                int u = t[e], v = t[(e + 1) % 3];
                const auto& ed = get_edge(u, v);
                if (order == 2) {
                    dofs.push_back(ed[0]);
                } else {
                    // Local edge nodes run from u toward v; flip when the
                    // canonical (sorted) orientation is the reverse.
                    if (u < v) {
                        dofs.push_back(ed[0]);
                        dofs.push_back(ed[1]);
                    } else {
                        dofs.push_back(ed[1]);
                        dofs.push_back(ed[0]);
                    }
                }
            }
        }
        if (order == 3) {
            auto verts = am.element_vertices(am.active_elements[ord]);
            dofs.push_back(dm.ndof++);
            dm.dof_coords.push_back((1.0 / 3.0) * (verts[0] + verts[1] + verts[2]));
        }
    }
    return dm;
}

}  // namespace cutfem

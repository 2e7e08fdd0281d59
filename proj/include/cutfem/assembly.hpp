#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "cutfem/dofmap.hpp"
#include "cutfem/geometry.hpp"
#include "cutfem/mesh.hpp"

namespace cutfem {

// Weak-form flavors for the Dirichlet condition on the discrete boundary.
//
// NonsymmetricTaylor: boundary data pulled back from the exact boundary and
//   matched against a k-th order Taylor expansion of the trial function in
//   the correction direction; nonsymmetric for k >= 1.
// SymmetricK1: the symmetric variant of the first-order correction (requires
//   the correction direction to be the facet normal).
// ExactBoundaryNitsche: classical symmetric Nitsche with the data evaluated
//   at the quadrature point itself; only meaningful when the boundary data
//   has a closed form off the boundary.
enum class Variant { NonsymmetricTaylor, SymmetricK1, ExactBoundaryNitsche };

enum class NuSource { FacetNormal, ExactNormalAtProjection };

struct FormConfig {
    Variant variant = Variant::NonsymmetricTaylor;
    int taylor_k = 1;           // expansion order, 0..2 (ignored by the other variants)
    double beta = 100.0;        // Nitsche penalty
    double gamma_j = 0.1;       // ghost penalty strength
    NuSource nu_source = NuSource::FacetNormal;

    // Throws ConfigError on an inconsistent combination (k > p-1, symmetric
    // variant with p < 2, non-facet correction direction with the symmetric
    // variant, bad penalty signs).
    void validate(int order) const;
};

// One quadrature point on the discrete boundary with everything the forms
// need: facet normal, correction direction, signed distance rho_h to the
// exact boundary along it, and the projected point.
struct BoundaryQuadPoint {
    int ordinal = -1;  // active-element ordinal owning the segment
    Vec2 x;
    double weight = 0.0;
    Vec2 n_h;
    Vec2 nu_h;
    double rho_h = 0.0;
    Vec2 p_h;
};

// Gauss points on every boundary segment plus the boundary projection at
// each. search_radius <= 0 defaults to 4h.
std::vector<BoundaryQuadPoint> build_boundary_quadrature(const ActiveMesh& am,
                                                         const LevelSet& ls,
                                                         int gauss_points,
                                                         NuSource nu_source,
                                                         double search_radius = 0.0);

// Row of Taylor-expansion coefficients: out[i] = sum_{j<=k} rho^j/j! times
// the j-th directional derivative of basis i along nu, at physical point x.
void taylor_row(const ReferenceElement& re, const ElementMap& em, Vec2 x, Vec2 nu,
                double rho, int k, double* out);

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

// Individual pieces (exposed for tests); assemble_system drives them.
void assemble_volume(const ActiveMesh& am, const DofMap& dm, const LevelSet& ls,
                     Triplets& a, Eigen::VectorXd& b);
void assemble_boundary(const ActiveMesh& am, const DofMap& dm, const FormConfig& fc,
                       const std::vector<BoundaryQuadPoint>& bqp, Triplets& a);
void assemble_ghost_penalty(const ActiveMesh& am, const DofMap& dm, double gamma_j,
                            Triplets& j);
void assemble_load_boundary(const ActiveMesh& am, const DofMap& dm, const LevelSet& ls,
                            const FormConfig& fc,
                            const std::vector<BoundaryQuadPoint>& bqp, Eigen::VectorXd& b);

struct AssembledSystem {
    SpMat A;      // a_h = a_0 + j_h
    SpMat ghost;  // j_h alone (already contained in A); kept for inspection
    Eigen::VectorXd b;
    int ndof = 0;
    double h = 0.0;
};

AssembledSystem assemble_system(const ActiveMesh& am, const DofMap& dm, const LevelSet& ls,
                                const FormConfig& fc,
                                const std::vector<BoundaryQuadPoint>& bqp);

// j_h(v,v) evaluated face by face: each pointwise derivative jump is formed
// first and then squared. Contracting the assembled ghost matrix with v
// instead loses everything below roughly 1e-10: the expanded outer-product
// entries reach 1e4 and their cancellation noise swamps small jump energies.
double ghost_penalty_value(const ActiveMesh& am, const DofMap& dm, double gamma_j,
                           const Eigen::VectorXd& u);

// Discrete energy norm squared of a dof vector:
// |grad v|^2 over the discrete domain + j_h(v,v) + h |n.grad v|^2 + h^{-1} |v|^2
// over the discrete boundary.
double energy_norm_squared(const ActiveMesh& am, const DofMap& dm, double gamma_j,
                           const std::vector<BoundaryQuadPoint>& bqp,
                           const Eigen::VectorXd& u);

// Coordinate text dump, "i j value" per stored entry, 0-based.
void dump_matrix(const SpMat& A, const std::string& path);

}  // namespace cutfem

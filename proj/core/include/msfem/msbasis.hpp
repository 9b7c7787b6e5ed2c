#pragma once

#include "msfem/fem.hpp"
#include "msfem/geometry.hpp"

#include <optional>
#include <span>
#include <vector>

namespace msfem {

/// C(j, a) = int phi_j N_a: coarse hat j against fine hat a. Rows are coarse
/// vertices, columns fine vertices.
struct ConstraintMatrix
{
    SparseMatrix C;
};

/// Exact integrals via the mesh nesting: every coarse hat is linear on each
/// fine element.
ConstraintMatrix constraint_matrix(const PeriodicMesh& mesh);

/// Fine-grid coefficients of the multiscale basis, one column per coarse
/// vertex.
struct MultiscaleBasis
{
    SparseMatrix Phi;          ///< N_f x N_x
    std::optional<int> l_star; ///< localization level; empty for the global basis
    double constraint_residual = 0.0;   ///< max |C Phi - I|
    double stationarity_residual = 0.0; ///< max over columns of the relative KKT residual

    bool is_global() const { return !l_star.has_value(); }
};

/// Minimises (1/2) phi^T A phi subject to C phi = e_i for every coarse vertex
/// i, with one factorization of the full KKT matrix.
MultiscaleBasis build_basis_global(const FineSystem& system, const ConstraintMatrix& C);

/// A single global basis function (used for decay studies).
Eigen::VectorXd global_basis_column(const FineSystem& system, const ConstraintMatrix& C, Index vertex);

/// Patch-localized basis: column i is the minimiser over fine functions
/// vanishing outside D_{l*}(i), constrained against every coarse hat of the
/// closed patch. Columns are solved independently on `threads` workers.
MultiscaleBasis build_basis_localized(const PeriodicMesh& mesh, const FineSystem& system,
                                      const ConstraintMatrix& C, int l_star, unsigned threads = 1);

/// Same with caller-supplied patches (patches[i] centred on vertex i).
MultiscaleBasis build_basis_localized(const PeriodicMesh& mesh, const FineSystem& system,
                                      const ConstraintMatrix& C, std::span<const NodalPatch> patches,
                                      unsigned threads = 1);

/// ceil(log2(1/H)) + 1.
int default_l_star(const PeriodicMesh& mesh);

/// default_l_star plus one ring for every halving of H below eps, so the
/// truncation error keeps pace with the discretization error as H/eps shrinks.
int scaled_l_star(const PeriodicMesh& mesh, double eps);

/// Gradient energy of one basis function outside growing nodal patches.
struct DecayProfile
{
    Index center = 0;
    int saturation_level = 0;
    std::vector<int> levels;
    std::vector<double> tail_energy; ///< ||grad phi|| over D \ D_l
    std::vector<double> e_relative;  ///< (||grad phi||_D - ||grad phi||_{D_l}) / max over l
    std::vector<double> ratios;      ///< tail_energy[l+1] / tail_energy[l]
    double gradient_norm = 0.0;      ///< ||grad phi||_D
    double fitted_beta = 0.0;        ///< exp of the least-squares slope of log tail_energy
    int fitted_levels = 0;
};

/// Levels 0..max_level (saturation when negative). The fit uses the levels
/// before saturation whose tail exceeds fit_floor * ||grad phi||_D.
DecayProfile decay_profile(const PeriodicMesh& mesh, const Eigen::VectorXd& column, Index center,
                           int max_level = -1, double fit_floor = 1e-10);

/// Coarse vertex closest to x (periodic distance).
Index nearest_coarse_vertex(const PeriodicMesh& mesh, const Point& x);

} // namespace msfem

#pragma once

#include "msfem/fem.hpp"
#include "msfem/potential.hpp"

#include <optional>
#include <span>
#include <vector>

namespace msfem {

struct RelativeErrors
{
    double l2 = 0.0;
    double h1 = 0.0;
};

/// ||num - exact|| / ||exact|| in L2 and H1. Throws UndefinedError when
/// exact has zero norm.
RelativeErrors relative_errors(const WaveField& num, const WaveField& exact, const SparseMatrix& S,
                               const SparseMatrix& M);

/// |psi|^2 at the fine vertices.
Eigen::VectorXd position_density(const WaveField& field);

/// (eps^2/2)|grad psi|^2 + v|psi|^2 averaged over each element with the
/// element quadrature, then averaged over the elements around each vertex.
Eigen::VectorXd energy_density(const WaveField& field, const PotentialSpec& spec, double eps,
                               const SimplexLattice& lattice);

/// Exact integral of |psi_h|^2 for the P1 field, element by element.
double integrate_position_density(const WaveField& field, const SimplexLattice& lattice);

/// Errors for one coarse mesh.
struct ErrorSample
{
    double H_over_eps = 0.0;
    double err_l2 = 0.0;
    double err_h1 = 0.0;
};

/// One row of a convergence table; rates are log2 ratios to the previous row.
struct ErrorReport
{
    double H_over_eps = 0.0;
    double err_l2 = 0.0;
    double err_h1 = 0.0;
    std::optional<double> rate_l2;
    std::optional<double> rate_h1;
};

/// Rows must be ordered by successively halved H_over_eps (relative
/// tolerance 1e-9); otherwise InvalidInput.
std::vector<ErrorReport> convergence_table(std::span<const ErrorSample> samples);

/// Least-squares slope of y against x.
double fitted_slope(std::span<const double> x, std::span<const double> y);

} // namespace msfem

#pragma once

#include "msfem/geometry.hpp"
#include "msfem/potential.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace msfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Complex = std::complex<double>;

/// P1 matrices on the fine lattice.
struct FineSystem
{
    SparseMatrix S; ///< stiffness, int grad u . grad w
    SparseMatrix M; ///< mass, int u w
    SparseMatrix V; ///< potential, int v u w
    SparseMatrix A; ///< Hamiltonian (eps^2 / 2) S + V
    double eps = 1.0;
    std::vector<std::string> warnings;
};

/// Complex nodal values on the fine vertices.
struct WaveField
{
    Eigen::VectorXcd values;

    Eigen::Index size() const { return values.size(); }
};

/// One quadrature node of a fine element: position, weight and the values of
/// the element's nodal basis functions there.
struct QuadraturePoint
{
    Point x;
    double weight = 0.0;
    std::array<double, 3> shape{};
};

/// Quadrature used for potential-weighted integrals: 2-point Gauss on
/// segments, edge midpoints on triangles. Both are exact for quadratics.
std::vector<QuadraturePoint> element_quadrature(const SimplexLattice& lattice, Index element);

/// Constant gradients of the element's nodal basis functions.
std::array<std::array<double, 2>, 3> element_gradients(const SimplexLattice& lattice, Index element);

/// Assembles S, M, V and A on mesh.fine(). Emits a warning when h is larger
/// than an eighth of the potential's smallest scale.
FineSystem assemble(const PeriodicMesh& mesh, const PotentialSpec& spec, double eps);

/// Same, for a bare lattice.
FineSystem assemble(const SimplexLattice& lattice, const PotentialSpec& spec, double eps);

/// K c for a real K and complex c.
Eigen::VectorXcd multiply(const SparseMatrix& K, const Eigen::VectorXcd& c);

/// Hermitian form c^* K c for a real symmetric K.
double hermitian_form(const SparseMatrix& K, const Eigen::VectorXcd& c);

double l2_norm(const WaveField& field, const SparseMatrix& M);
double h1_norm(const WaveField& field, const SparseMatrix& S, const SparseMatrix& M);

/// Nodal interpolant of f on the fine vertices.
WaveField interpolate(const SimplexLattice& lattice, const std::function<Complex(const Point&)>& f);
WaveField interpolate(const PeriodicMesh& mesh, const std::function<Complex(const Point&)>& f);

/// Gaussian wave packet (10/pi)^{1/4} exp(-5 (x - 1/2)^2).
Complex gaussian_1d(const Point& x);

/// (10/pi)^{1/2} exp(-5 (x - 1/2)^2 - 5 (y - 1/2)^2).
Complex gaussian_2d(const Point& x);

/// int |grad u|^2 over every fine element, for a real nodal vector u.
std::vector<double> element_gradient_energy(const SimplexLattice& lattice, const Eigen::VectorXd& u);

} // namespace msfem

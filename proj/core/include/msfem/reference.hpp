#pragma once

#include "msfem/fem.hpp"
#include "msfem/potential.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace msfem {

/// Time integrators for the fine reference solution. All are diagonal Pade
/// approximants of the exponential (equivalently Gauss collocation) and hence
/// exactly M_h-unitary.
enum class TimeScheme
{
    crank_nicolson, ///< order 2
    gauss4,         ///< order 4, two complex-shifted solves per step
    gauss8,         ///< order 8, four complex-shifted solves per step
};

TimeScheme parse_time_scheme(const std::string& name);
std::string to_string(TimeScheme scheme);

/// Fine-grid trajectory sampled at the requested output times.
struct ReferenceRun
{
    double k_ref = 0.0;
    double T = 0.0;
    TimeScheme scheme = TimeScheme::crank_nicolson;
    std::vector<double> times;
    std::vector<WaveField> snapshots;
    double mass_drift = 0.0; ///< max over all steps of |m_n - m_0| / m_0

    /// Snapshot at time t; throws InvalidInput if t was not requested.
    const WaveField& at(double t) const;
};

/// (i eps M_h - k/2 A_h) psi^{n+1} = (i eps M_h + k/2 A_h) psi^n with one
/// sparse factorization. T / k_ref must be an integer and every output time
/// a grid point in [0, T].
ReferenceRun crank_nicolson(const FineSystem& system, const WaveField& psi_in, double k_ref, double T,
                            std::span<const double> output_times);

/// Same contract with a selectable scheme.
ReferenceRun integrate_reference(const FineSystem& system, const WaveField& psi_in, double k_ref, double T,
                                 std::span<const double> output_times, TimeScheme scheme);

/// The five benchmark problems: potential, dimension and initial wave packet.
struct ExampleProblem
{
    int id = 1;
    int dim = 1;
    double eps = 1.0 / 40.0;
    PotentialSpec potential;
    std::function<Complex(const Point&)> initial;
};

/// Examples 3 and 5 tie their fine scale to eps: eps2 = eps with eps1 = 4 eps
/// (layered) and eps1 = 2 eps (checkerboard).
ExampleProblem example_problem(int id, double eps);

/// eps/64 in 1D, eps/16 in 2D.
double default_fine_size(int dim, double eps);

/// Number of cells per axis for a nominal size, snapped to 1/n within 1%.
/// Throws InvalidDiscretization otherwise.
int cells_for_size(double size);

/// Builds the fine lattice, assembles and integrates to T = 1 from the
/// example's Gaussian. h <= 0 selects default_fine_size.
ReferenceRun reference_for_example(int id, double eps, double h = 0.0, double k_ref = 1e-4,
                                   std::span<const double> output_times = {},
                                   TimeScheme scheme = TimeScheme::crank_nicolson);

} // namespace msfem

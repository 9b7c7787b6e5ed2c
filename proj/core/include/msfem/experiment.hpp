#pragma once

#include "msfem/analysis.hpp"
#include "msfem/config.hpp"
#include "msfem/evolution.hpp"
#include "msfem/io.hpp"
#include "msfem/msbasis.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace msfem {

inline constexpr const char* version = "0.1.0";

/// Potential, dimension and initial data of a configured run.
struct Problem
{
    int dim = 1;
    double eps = 1.0;
    PotentialSpec potential;
    std::function<Complex(const Point&)> initial;
    std::string label;
};

Problem make_problem(const ExperimentConfig& config);
Problem make_problem(const ExperimentConfig& config, double eps);

/// Cells per axis for the coarse mesh H = eps * ratio and the fine mesh.
struct Resolution
{
    int coarse_n = 0;
    int fine_n = 0;
};

/// Throws ConfigError when a size is not within 1% of 1/n or the coarse mesh
/// does not nest in the fine one.
Resolution resolve(const ExperimentConfig& config, double eps, double ratio);

/// Fine lattice size shared by every row of a sweep.
int fine_cells(const ExperimentConfig& config, int dim, double eps);

/// Equispaced times 0, T/(n-1), ..., T.
std::vector<double> sample_times(double T, int n);

/// The whole multiscale pipeline on one coarse mesh: basis, reduction,
/// projection, propagation and reconstruction at `times`.
struct MultiscaleRun
{
    MultiscaleBasis basis;
    ReducedSystem reduced;
    CoefficientState initial;
    bool dense = true;
    std::vector<double> times;
    std::vector<CoefficientState> states;
    std::vector<WaveField> fields;
    std::vector<ConservationSample> conservation;
    double mass_drift = 0.0;   ///< max relative
    double energy_drift = 0.0; ///< max |E(t) - E(0)| / (|E(0)| + mass(0))
    std::optional<Eigen::VectorXd> eigenvalues;
    double basis_seconds = 0.0;
    double reduce_seconds = 0.0;
    double evolution_seconds = 0.0;
};

struct BasisChoice
{
    std::optional<int> l_star; ///< empty: default or scaled level
    bool global = false;
    bool scaled = false;

    static BasisChoice from(const ExperimentConfig& config)
    {
        return {config.l_star, config.global_basis, config.scaled_l_star};
    }

    int level(const PeriodicMesh& mesh, double eps) const
    {
        if (l_star)
            return *l_star;
        return scaled ? scaled_l_star(mesh, eps) : default_l_star(mesh);
    }
};

MultiscaleRun run_multiscale(const PeriodicMesh& mesh, const FineSystem& fine, const WaveField& psi_in,
                             const BasisChoice& choice, std::span<const double> times, unsigned threads,
                             long dense_limit);

struct RunOptions
{
    bool write_outputs = true;
    std::ostream* log = nullptr;
};

struct RowFailure
{
    double H_over_eps = 0.0;
    std::string message;
};

struct RowDiagnostics
{
    double H_over_eps = 0.0;
    int coarse_n = 0;
    Index coarse_vertices = 0;
    std::optional<int> l_star;
    bool dense = true;
    double mesh_ratio = 0.0; ///< sqrt(V0) H / eps
    double constraint_residual = 0.0;
    double mass_drift = 0.0;
    double energy_drift = 0.0;
    double seconds = 0.0;
};

struct ConvergenceResult
{
    std::vector<ErrorReport> table;
    std::vector<RowDiagnostics> rows;
    std::vector<RowFailure> failures;
    double reference_mass_drift = 0.0;
    double reference_seconds = 0.0;
};

/// Errors against one shared fine reference for every ratio; writes
/// errors.csv, conservation.csv and manifest.txt. A failing row is logged and
/// skipped.
ConvergenceResult run_convergence(const ExperimentConfig& config, const RunOptions& options = {});

struct DecayResult
{
    std::vector<double> eps;
    std::vector<DecayProfile> profiles;
};

/// Global basis function nearest the domain centre for every eps in
/// decay_eps (or eps), with H = decay_ratio * eps; writes decay.csv.
DecayResult run_decay(const ExperimentConfig& config, const RunOptions& options = {});

struct ObservablesResult
{
    double H_over_eps = 0.0;
    Eigen::VectorXd position_ms;
    Eigen::VectorXd position_ref;
    Eigen::VectorXd energy_ms;
    Eigen::VectorXd energy_ref;
    double position_gap = 0.0; ///< max |n_ms - n_ref| / max n_ref
    double energy_gap = 0.0;   ///< max |e_ms - e_ref| / max |e_ref|
};

/// Densities of the multiscale and reference solutions at T for the first
/// ratio; writes density_ms.csv and density_ref.csv.
ObservablesResult run_observables(const ExperimentConfig& config, const RunOptions& options = {});

struct BasisSummary
{
    double H_over_eps = 0.0;
    Index coarse_vertices = 0;
    Index fine_vertices = 0;
    std::optional<int> l_star;
    long nonzeros = 0;
    double constraint_residual = 0.0;
    double stationarity_residual = 0.0;
    MeshCondition mesh_condition;
};

/// Basis for the first ratio; writes basis.csv triplets and basis.txt.
BasisSummary run_basis(const ExperimentConfig& config, const RunOptions& options = {});

/// Fine reference at the sample times; writes reference_T.csv and reference.txt.
ReferenceRun run_reference(const ExperimentConfig& config, const RunOptions& options = {});

struct CheckResult
{
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Invariant suite on the first ratio; writes check.csv.
std::vector<CheckResult> run_check(const ExperimentConfig& config, const RunOptions& options = {});

} // namespace msfem

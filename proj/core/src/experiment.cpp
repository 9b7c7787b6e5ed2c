#include "msfem/experiment.hpp"

#include "msfem/error.hpp"
#include "msfem/chebyshev.hpp"
#include "msfem/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace msfem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void log_line(const RunOptions& options, const std::string& line)
{
    if (options.log)
        *options.log << line << '\n' << std::flush;
}

std::filesystem::path output_path(const ExperimentConfig& config, const std::string& file)
{
    return std::filesystem::path(config.output_dir) / file;
}

std::string manifest_header(const ExperimentConfig& config, const std::string& command)
{
    std::ostringstream out;
    out << "msfem " << version << "\n";
    out << "command: " << command << "\n";
    out << "modules: geometry " << version << ", potential " << version << ", fem_core " << version << ", msbasis "
        << version << ", evolution " << version << ", reference " << version << ", analysis " << version << "\n\n";
    out << echo(config) << "\n";
    return out.str();
}

struct FineSetup
{
    Problem problem;
    SimplexLattice lattice;
    FineSystem system;
    WaveField psi_in;
};

FineSetup setup_fine(const ExperimentConfig& config, double eps, const RunOptions& options)
{
    FineSetup s;
    s.problem = make_problem(config, eps);
    s.lattice = SimplexLattice(s.problem.dim, fine_cells(config, s.problem.dim, eps));
    s.system = assemble(s.lattice, s.problem.potential, eps);
    for (const auto& w : s.system.warnings)
        log_line(options, "warning: " + w);
    s.psi_in = interpolate(s.lattice, s.problem.initial);
    return s;
}

double relative_max(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    const double scale = b.cwiseAbs().maxCoeff();
    const double diff = (a - b).cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff / scale : diff;
}

} // namespace

Problem make_problem(const ExperimentConfig& config)
{
    return make_problem(config, config.eps);
}

Problem make_problem(const ExperimentConfig& config, double eps)
{
    Problem p;
    p.eps = eps;
    try {
        if (config.example > 0) {
            ExampleProblem ex = example_problem(config.example, eps);
            p.dim = ex.dim;
            p.potential = std::move(ex.potential);
            p.initial = std::move(ex.initial);
            p.label = "example " + std::to_string(config.example);
        } else {
            p.potential = config.potential_file.empty()
                              ? make_potential(config.potential, eps, config.eps1, config.eps2, config.value)
                              : load_sampled_potential(config.potential_file);
            p.dim = p.potential.dim() != 0 ? p.potential.dim() : config.dim;
            p.label = p.potential.describe();
            p.initial = p.dim == 1 ? gaussian_1d : gaussian_2d;
        }
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    if (config.initial == InitialData::plane_wave) {
        const double k = 2.0 * std::numbers::pi * config.wave_number;
        p.initial = [k](const Point& x) { return std::polar(1.0, k * x.x); };
    } else if (config.initial == InitialData::zero) {
        p.initial = [](const Point&) { return Complex(0.0); };
    }
    return p;
}

int fine_cells(const ExperimentConfig& config, int dim, double eps)
{
    const double h = config.h > 0.0 ? config.h : default_fine_size(dim, eps);
    try {
        return cells_for_size(h);
    } catch (const InvalidDiscretization& e) {
        throw ConfigError(std::string("fine mesh: ") + e.what());
    }
}

Resolution resolve(const ExperimentConfig& config, double eps, double ratio)
{
    const Problem p = make_problem(config, eps);
    Resolution r;
    try {
        r.coarse_n = cells_for_size(eps * ratio);
    } catch (const InvalidDiscretization& e) {
        std::ostringstream msg;
        msg << "H/eps = " << ratio << ": " << e.what();
        throw ConfigError(msg.str());
    }
    r.fine_n = fine_cells(config, p.dim, eps);
    if (r.coarse_n < 2 || r.fine_n % r.coarse_n != 0) {
        std::ostringstream msg;
        msg << "H/eps = " << ratio << " gives 1/H = " << r.coarse_n << ", which does not nest in 1/h = " << r.fine_n;
        throw ConfigError(msg.str());
    }
    return r;
}

std::vector<double> sample_times(double T, int n)
{
    if (n < 2)
        throw InvalidInput("sample_times: need at least two samples");
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        t[static_cast<std::size_t>(i)] = T * i / (n - 1);
    t.back() = T;
    return t;
}

MultiscaleRun run_multiscale(const PeriodicMesh& mesh, const FineSystem& fine, const WaveField& psi_in,
                             const BasisChoice& choice, std::span<const double> times, unsigned threads,
                             long dense_limit)
{
    MultiscaleRun run;
    auto start = Clock::now();
    const ConstraintMatrix C = constraint_matrix(mesh);
    run.basis = choice.global
                    ? build_basis_global(fine, C)
                    : build_basis_localized(mesh, fine, C, choice.level(mesh, fine.eps), threads);
    run.basis_seconds = seconds_since(start);
    start = Clock::now();
    run.reduced = reduce(fine, run.basis);
    run.initial = project_initial(run.reduced, fine, run.basis, psi_in);
    run.reduce_seconds = seconds_since(start);

    start = Clock::now();
    const Evolver evolver(run.reduced, dense_limit);
    run.dense = evolver.is_dense();
    if (run.dense)
        run.eigenvalues = evolver.dense().Lambda;
    const double mass0 = mass(run.reduced, run.initial);
    const double energy0 = energy(run.reduced, run.initial);
    const double energy_scale = energy0 != 0.0 ? std::abs(energy0) : mass0;
    run.times.assign(times.begin(), times.end());
    for (double t : times) {
        CoefficientState state = evolver.propagate(run.initial, t);
        const double m = mass(run.reduced, state);
        const double e = energy(run.reduced, state);
        run.conservation.push_back({t, m, e});
        if (mass0 > 0.0)
            run.mass_drift = std::max(run.mass_drift, std::abs(m - mass0) / mass0);
        if (energy_scale > 0.0)
            run.energy_drift = std::max(run.energy_drift, std::abs(e - energy0) / energy_scale);
        run.fields.push_back(reconstruct(run.basis, state));
        run.states.push_back(std::move(state));
    }
    run.evolution_seconds = seconds_since(start);
    return run;
}

ConvergenceResult run_convergence(const ExperimentConfig& config, const RunOptions& options)
{
    validate(config);
    ConvergenceResult result;
    const FineSetup fine = setup_fine(config, config.eps, options);
    const std::vector<double> times = sample_times(config.T, config.samples);

    auto start = Clock::now();
    const ReferenceRun reference =
        integrate_reference(fine.system, fine.psi_in, config.k_ref, config.T, times, config.scheme);
    result.reference_seconds = seconds_since(start);
    result.reference_mass_drift = reference.mass_drift;
    {
        std::ostringstream msg;
        msg << "reference: " << fine.lattice.num_vertices() << " fine vertices, " << to_string(config.scheme)
            << ", k = " << config.k_ref << ", " << std::setprecision(3) << result.reference_seconds << " s";
        log_line(options, msg.str());
    }
    const WaveField& exact = reference.at(config.T);

    std::ostringstream conservation;
    conservation << std::setprecision(17) << "H_over_eps,t,mass,energy\n";
    std::vector<ErrorReport> table;
    std::optional<double> previous_ratio;
    std::optional<ErrorReport> previous;
    for (double ratio : config.ratios) {
        start = Clock::now();
        try {
            const Resolution res = resolve(config, config.eps, ratio);
            const PeriodicMesh mesh(fine.problem.dim, res.coarse_n, res.fine_n);
            const BasisChoice choice = BasisChoice::from(config);
            const MultiscaleRun run = run_multiscale(mesh, fine.system, fine.psi_in, choice, times,
                                                     config.threads, config.dense_limit);
            const RelativeErrors err = relative_errors(run.fields.back(), exact, fine.system.S, fine.system.M);

            ErrorReport row{ratio, err.l2, err.h1, std::nullopt, std::nullopt};
            if (previous && std::abs(previous->H_over_eps - 2.0 * ratio) <= 1e-9 * previous->H_over_eps) {
                row.rate_l2 = std::log2(previous->err_l2 / err.l2);
                row.rate_h1 = std::log2(previous->err_h1 / err.h1);
            }
            table.push_back(row);
            previous = row;

            RowDiagnostics diag;
            diag.H_over_eps = ratio;
            diag.coarse_n = res.coarse_n;
            diag.coarse_vertices = mesh.num_coarse_vertices();
            diag.l_star = run.basis.l_star;
            diag.dense = run.dense;
            diag.mesh_ratio =
                check_mesh_condition(fine.problem.potential, mesh.H(), config.eps, 1.0, fine.problem.dim).ratio;
            diag.constraint_residual = run.basis.constraint_residual;
            diag.mass_drift = run.mass_drift;
            diag.energy_drift = run.energy_drift;
            diag.seconds = seconds_since(start);
            result.rows.push_back(diag);
            for (const auto& s : run.conservation)
                conservation << ratio << ',' << s.t << ',' << s.mass << ',' << s.energy << '\n';

            std::ostringstream msg;
            msg << "H/eps = " << ratio << ": N_x = " << diag.coarse_vertices << ", err_l2 = " << std::scientific
                << std::setprecision(4) << err.l2 << ", err_h1 = " << err.h1 << std::defaultfloat
                << std::setprecision(3) << " (basis " << run.basis_seconds << " s, reduce " << run.reduce_seconds
                << " s, evolve " << run.evolution_seconds << " s, " << (run.dense ? "dense" : "chebyshev") << ")";
            log_line(options, msg.str());
        } catch (const Error& e) {
            result.failures.push_back({ratio, e.what()});
            previous.reset();
            std::ostringstream msg;
            msg << "H/eps = " << ratio << ": failed: " << e.what();
            log_line(options, msg.str());
        }
    }
    result.table = std::move(table);

    if (options.write_outputs) {
        write_error_table(output_path(config, "errors.csv"), result.table);
        write_text(output_path(config, "conservation.csv"), conservation.str());

        std::ostringstream manifest;
        manifest << manifest_header(config, "convergence");
        manifest << std::setprecision(6);
        manifest << "fine_cells = " << fine.lattice.cells_per_axis() << "\n";
        manifest << "reference_mass_drift = " << result.reference_mass_drift << "\n";
        manifest << "reference_seconds = " << result.reference_seconds << "\n";
        for (const auto& d : result.rows)
            manifest << "row H_over_eps = " << d.H_over_eps << ": 1/H = " << d.coarse_n
                     << ", l_star = " << (d.l_star ? std::to_string(*d.l_star) : "global")
                     << ", propagation = " << (d.dense ? "dense eigendecomposition" : "chebyshev")
                     << ", mesh_ratio = " << d.mesh_ratio << ", constraint_residual = " << d.constraint_residual
                     << ", mass_drift = " << d.mass_drift << ", energy_drift = " << d.energy_drift
                     << ", seconds = " << d.seconds << "\n";
        for (const auto& f : result.failures)
            manifest << "failed H_over_eps = " << f.H_over_eps << ": " << f.message << "\n";
        write_text(output_path(config, "manifest.txt"), manifest.str());
    }
    return result;
}

DecayResult run_decay(const ExperimentConfig& config, const RunOptions& options)
{
    validate(config);
    DecayResult result;
    result.eps = config.decay_eps.empty() ? std::vector<double>{config.eps} : config.decay_eps;
    for (double eps : result.eps) {
        const auto start = Clock::now();
        const Problem problem = make_problem(config, eps);
        const Resolution res = resolve(config, eps, config.decay_ratio);
        const PeriodicMesh mesh(problem.dim, res.coarse_n, res.fine_n);
        const FineSystem system = assemble(mesh, problem.potential, eps);
        const ConstraintMatrix C = constraint_matrix(mesh);
        const Index center = nearest_coarse_vertex(mesh, Point{0.5, 0.5});
        const Eigen::VectorXd column = global_basis_column(system, C, center);
        result.profiles.push_back(decay_profile(mesh, column, center));

        std::ostringstream msg;
        msg << "eps = " << eps << ": saturation level " << result.profiles.back().saturation_level
            << ", fitted beta = " << result.profiles.back().fitted_beta << " (" << std::setprecision(3)
            << seconds_since(start) << " s)";
        log_line(options, msg.str());
    }
    if (options.write_outputs) {
        write_decay_profiles(output_path(config, "decay.csv"), result.eps, result.profiles);
        std::ostringstream manifest;
        manifest << manifest_header(config, "decay") << std::setprecision(6);
        for (std::size_t i = 0; i < result.eps.size(); ++i)
            manifest << "eps = " << result.eps[i] << ": fitted_beta = " << result.profiles[i].fitted_beta
                     << " over " << result.profiles[i].fitted_levels << " levels\n";
        write_text(output_path(config, "manifest.txt"), manifest.str());
    }
    return result;
}

ObservablesResult run_observables(const ExperimentConfig& config, const RunOptions& options)
{
    validate(config);
    ObservablesResult result;
    result.H_over_eps = config.ratios.front();
    const FineSetup fine = setup_fine(config, config.eps, options);
    const std::array<double, 1> times{config.T};
    const ReferenceRun reference =
        integrate_reference(fine.system, fine.psi_in, config.k_ref, config.T, times, config.scheme);

    const Resolution res = resolve(config, config.eps, result.H_over_eps);
    const PeriodicMesh mesh(fine.problem.dim, res.coarse_n, res.fine_n);
    const MultiscaleRun run = run_multiscale(mesh, fine.system, fine.psi_in, BasisChoice::from(config),
                                             times, config.threads, config.dense_limit);

    const WaveField& ms = run.fields.back();
    const WaveField& ref = reference.at(config.T);
    result.position_ms = position_density(ms);
    result.position_ref = position_density(ref);
    result.energy_ms = energy_density(ms, fine.problem.potential, config.eps, fine.lattice);
    result.energy_ref = energy_density(ref, fine.problem.potential, config.eps, fine.lattice);
    result.position_gap = relative_max(result.position_ms, result.position_ref);
    result.energy_gap = relative_max(result.energy_ms, result.energy_ref);

    std::ostringstream msg;
    msg << "H/eps = " << result.H_over_eps << ": position density gap " << result.position_gap
        << ", energy density gap " << result.energy_gap;
    log_line(options, msg.str());

    if (options.write_outputs) {
        const std::array<std::string, 2> names{"position", "energy"};
        const std::array<Eigen::VectorXd, 2> ms_series{result.position_ms, result.energy_ms};
        const std::array<Eigen::VectorXd, 2> ref_series{result.position_ref, result.energy_ref};
        write_nodal_series(output_path(config, "density_ms.csv"), fine.lattice, names, ms_series);
        write_nodal_series(output_path(config, "density_ref.csv"), fine.lattice, names, ref_series);
        std::ostringstream manifest;
        manifest << manifest_header(config, "observables") << std::setprecision(6);
        manifest << "H_over_eps = " << result.H_over_eps << "\n";
        manifest << "position_gap = " << result.position_gap << "\nenergy_gap = " << result.energy_gap << "\n";
        manifest << "multiscale_mass_drift = " << run.mass_drift << "\n";
        manifest << "reference_mass_drift = " << reference.mass_drift << "\n";
        write_text(output_path(config, "manifest.txt"), manifest.str());
    }
    return result;
}

BasisSummary run_basis(const ExperimentConfig& config, const RunOptions& options)
{
    validate(config);
    BasisSummary summary;
    summary.H_over_eps = config.ratios.front();
    const Problem problem = make_problem(config);
    const Resolution res = resolve(config, config.eps, summary.H_over_eps);
    const PeriodicMesh mesh(problem.dim, res.coarse_n, res.fine_n);
    const FineSystem system = assemble(mesh, problem.potential, config.eps);
    for (const auto& w : system.warnings)
        log_line(options, "warning: " + w);
    const ConstraintMatrix C = constraint_matrix(mesh);
    const MultiscaleBasis basis =
        config.global_basis
            ? build_basis_global(system, C)
            : build_basis_localized(mesh, system, C, BasisChoice::from(config).level(mesh, config.eps), config.threads);

    summary.coarse_vertices = mesh.num_coarse_vertices();
    summary.fine_vertices = mesh.num_fine_vertices();
    summary.l_star = basis.l_star;
    summary.nonzeros = basis.Phi.nonZeros();
    summary.constraint_residual = basis.constraint_residual;
    summary.stationarity_residual = basis.stationarity_residual;
    summary.mesh_condition = check_mesh_condition(problem.potential, mesh.H(), config.eps, 1.0, problem.dim);
    if (!summary.mesh_condition.pass) {
        std::ostringstream msg;
        msg << "warning: sqrt(V0) H / eps = " << summary.mesh_condition.ratio << " exceeds 1";
        log_line(options, msg.str());
    }

    if (options.write_outputs) {
        write_triplets(output_path(config, "basis.csv"), basis.Phi);
        std::ostringstream text;
        text << manifest_header(config, "basis") << std::setprecision(6);
        text << "coarse_vertices = " << summary.coarse_vertices << "\nfine_vertices = " << summary.fine_vertices
             << "\nl_star = " << (summary.l_star ? std::to_string(*summary.l_star) : "global")
             << "\nnonzeros = " << summary.nonzeros << "\nconstraint_residual = " << summary.constraint_residual
             << "\nstationarity_residual = " << summary.stationarity_residual
             << "\nmesh_ratio = " << summary.mesh_condition.ratio << "\nsup_norm = " << summary.mesh_condition.sup_norm
             << "\n";
        write_text(output_path(config, "basis.txt"), text.str());
    }
    return summary;
}

ReferenceRun run_reference(const ExperimentConfig& config, const RunOptions& options)
{
    validate(config);
    const FineSetup fine = setup_fine(config, config.eps, options);
    const std::vector<double> times = sample_times(config.T, config.samples);
    const auto start = Clock::now();
    ReferenceRun run = integrate_reference(fine.system, fine.psi_in, config.k_ref, config.T, times, config.scheme);
    const double seconds = seconds_since(start);

    std::ostringstream msg;
    msg << "reference: mass drift " << run.mass_drift << " (" << seconds << " s)";
    log_line(options, msg.str());

    if (options.write_outputs) {
        write_field(output_path(config, "reference_T.csv"), fine.lattice, run.at(config.T));
        std::ostringstream text;
        text << manifest_header(config, "reference") << std::setprecision(17);
        text << "h = " << fine.lattice.spacing() << "\nk_ref = " << run.k_ref << "\nT = " << run.T
             << "\nscheme = " << to_string(run.scheme) << "\nmass_drift = " << run.mass_drift
             << "\nseconds = " << seconds << "\n";
        write_text(output_path(config, "reference.txt"), text.str());
    }
    return run;
}

std::vector<CheckResult> run_check(const ExperimentConfig& config, const RunOptions& options)
{
    validate(config);
    std::vector<CheckResult> checks;
    auto add = [&](const std::string& name, double value, double tolerance, bool pass) {
        checks.push_back({name, value, tolerance, pass});
    };
    auto at_most = [&](const std::string& name, double value, double tolerance) {
        add(name, value, tolerance, value <= tolerance);
    };

    const FineSetup fine = setup_fine(config, config.eps, options);
    const Resolution res = resolve(config, config.eps, config.ratios.front());
    const PeriodicMesh mesh(fine.problem.dim, res.coarse_n, res.fine_n);
    const std::vector<double> times = sample_times(config.T, config.samples);
    const MultiscaleRun run = run_multiscale(mesh, fine.system, fine.psi_in, BasisChoice::from(config),
                                             times, config.threads, config.dense_limit);
    const ReducedSystem& reduced = run.reduced;

    at_most("constraint feasibility |C Phi - I|", run.basis.constraint_residual, 1e-8);
    const SparseMatrix At = reduced.A.transpose();
    at_most("symmetry of A", (reduced.A - At).norm() / reduced.A.norm(), 1e-12);

    double smallest = 0.0;
    if (reduced.size() <= 2000) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(reduced.M), Eigen::EigenvaluesOnly);
        smallest = eig.eigenvalues()[0];
    } else {
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(reduced.M);
        smallest = ldlt.vectorD().minCoeff();
    }
    add("positive definite M (smallest eigenvalue or pivot)", smallest, 0.0, smallest > 0.0);

    at_most("mass drift", run.mass_drift, 1e-10);
    at_most("energy drift", run.energy_drift, 1e-10);

    const double c0_norm = run.initial.c.norm();
    if (run.dense) {
        const Propagator prop = decompose(reduced);
        const Eigen::MatrixXd A = Eigen::MatrixXd(reduced.A);
        const Eigen::MatrixXd M = Eigen::MatrixXd(reduced.M);
        at_most("eigen residual |AP - MP Lambda| / |A|",
                (A * prop.P - M * prop.P * prop.Lambda.asDiagonal()).norm() / A.norm(), 1e-8);
        at_most("M-orthonormality |P^T M P - I|",
                (prop.P.transpose() * M * prop.P - Eigen::MatrixXd::Identity(A.rows(), A.rows())).cwiseAbs().maxCoeff(),
                1e-10);
        const CoefficientState forward = propagate(prop, run.initial, config.T);
        const CoefficientState back = propagate(prop, forward, 0.0);
        at_most("time reversal", (back.c - run.initial.c).norm() / c0_norm, 1e-11);
        const double gauge = gauge_shift_check(reduced, run.initial, 1.0, config.T);
        at_most("gauge shift omega = 1", gauge / forward.c.norm(), 1e-10);
    }

    const CoefficientState& last = run.states.back();
    const double m = mass(reduced, last);
    const double fine_mass = hermitian_form(fine.system.M, run.fields.back().values);
    at_most("|Phi c|^2 = mass", std::abs(fine_mass - m) / std::max(m, 1e-300), 1e-12);
    const double integral = integrate_position_density(run.fields.back(), fine.lattice);
    at_most("integral of position density = mass", std::abs(integral - fine_mass) / std::max(fine_mass, 1e-300),
            1e-10);

    // Galerkin projection is the M_h-orthogonal projection onto span(Phi).
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal;
    const WaveField projected = reconstruct(run.basis, run.initial);
    const double best = l2_norm(WaveField{projected.values - fine.psi_in.values}, fine.system.M);
    double worst_gain = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXcd d(reduced.size());
        for (Eigen::Index i = 0; i < d.size(); ++i)
            d[i] = Complex(normal(rng), normal(rng)) * 1e-3 * c0_norm / std::sqrt(static_cast<double>(d.size()));
        const WaveField other = reconstruct(run.basis, CoefficientState{run.initial.c + d, 0.0});
        worst_gain = std::min(worst_gain, l2_norm(WaveField{other.values - fine.psi_in.values}, fine.system.M) - best);
    }
    add("projection optimality (min gain of random perturbations)", worst_gain, -1e-12, worst_gain >= -1e-12);

    if (options.write_outputs) {
        std::ostringstream csv;
        csv << std::setprecision(10) << "name,value,tolerance,pass\n";
        for (const auto& c : checks)
            csv << '"' << c.name << "\"," << c.value << ',' << c.tolerance << ',' << (c.pass ? "true" : "false")
                << '\n';
        write_text(output_path(config, "check.csv"), csv.str());
        write_text(output_path(config, "manifest.txt"), manifest_header(config, "check"));
    }
    return checks;
}

} // namespace msfem

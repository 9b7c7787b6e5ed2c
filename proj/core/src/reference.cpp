#include "msfem/reference.hpp"

#include "msfem/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/UmfPackSupport>

#include <cmath>
#include <map>
#include <sstream>

namespace msfem {

namespace {

using ComplexSparse = Eigen::SparseMatrix<Complex>;
using ComplexLU = Eigen::UmfPackLU<ComplexSparse>;

long grid_steps(double t, double k, const char* what)
{
    const double steps = t / k;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
        std::ostringstream msg;
        msg << what << " " << t << " is not a multiple of the stepsize " << k;
        throw InvalidInput(msg.str());
    }
    return static_cast<long>(rounded);
}

// z M - c A as a complex matrix (shared sparsity: M and A have the pattern
// of the fine lattice).
ComplexSparse combine(const FineSystem& system, Complex mass_factor, Complex hamiltonian_factor)
{
    ComplexSparse K = mass_factor * system.M.cast<Complex>() + hamiltonian_factor * system.A.cast<Complex>();
    K.makeCompressed();
    return K;
}

void factorize(ComplexLU& lu, const ComplexSparse& K)
{
    lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success)
        throw SolverError("reference solver: the implicit matrix is singular");
}

struct PadeFractions
{
    std::vector<Complex> poles;
    double at_infinity = 1.0;
};

// Poles of the diagonal (m,m) Pade approximant N(z) / N(-z) of
// exp(z), N(z) = sum_j (2m-j)! m! / ((2m)! j! (m-j)!) z^j.
PadeFractions pade_fractions(int m)
{
    std::vector<double> c(static_cast<std::size_t>(m + 1));
    c[0] = 1.0;
    for (int j = 1; j <= m; ++j)
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] * (m - j + 1) / (j * (2.0 * m - j + 1));
    auto numerator = [&](Complex z) {
        Complex v = 0.0;
        for (int j = m; j >= 0; --j)
            v = v * z + c[static_cast<std::size_t>(j)];
        return v;
    };
    auto denominator = [&](Complex z) { return numerator(-z); };
    auto denominator_slope = [&](Complex z) {
        Complex v = 0.0;
        for (int j = m; j >= 1; --j)
            v = v * z + (j % 2 == 0 ? 1.0 : -1.0) * j * c[static_cast<std::size_t>(j)];
        return v;
    };

    // Roots of the denominator from its companion matrix, polished by Newton.
    const double lead = (m % 2 == 0 ? 1.0 : -1.0) * c[static_cast<std::size_t>(m)];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i)
        companion(i, i - 1) = 1.0;
    for (int j = 0; j < m; ++j)
        companion(j, m - 1) = -(j % 2 == 0 ? 1.0 : -1.0) * c[static_cast<std::size_t>(j)] / lead;
    const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();

    PadeFractions f;
    f.at_infinity = m % 2 == 0 ? 1.0 : -1.0;
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        Complex d = roots[i];
        for (int it = 0; it < 3; ++it)
            d -= denominator(d) / denominator_slope(d);
        f.poles.push_back(d);
    }
    return f;
}

} // namespace

TimeScheme parse_time_scheme(const std::string& name)
{
    if (name == "crank_nicolson" || name == "cn")
        return TimeScheme::crank_nicolson;
    if (name == "gauss4")
        return TimeScheme::gauss4;
    if (name == "gauss8")
        return TimeScheme::gauss8;
    throw InvalidInput("unknown time scheme '" + name + "'");
}

std::string to_string(TimeScheme scheme)
{
    switch (scheme) {
    case TimeScheme::gauss4: return "gauss4";
    case TimeScheme::gauss8: return "gauss8";
    default: return "crank_nicolson";
    }
}

const WaveField& ReferenceRun::at(double t) const
{
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t)))
            return snapshots[i];
    std::ostringstream msg;
    msg << "reference run holds no snapshot at t = " << t;
    throw InvalidInput(msg.str());
}

ReferenceRun integrate_reference(const FineSystem& system, const WaveField& psi_in, double k_ref, double T,
                                 std::span<const double> output_times, TimeScheme scheme)
{
    if (psi_in.size() != system.M.rows())
        throw InvalidInput("reference solver: initial field does not match the fine system");
    if (!(k_ref > 0.0) || !(T >= 0.0))
        throw InvalidInput("reference solver: stepsize must be positive and T nonnegative");
    const long steps = grid_steps(T, k_ref, "final time");

    std::multimap<long, std::size_t> wanted;
    for (std::size_t i = 0; i < output_times.size(); ++i) {
        const double t = output_times[i];
        if (t < -1e-12 || t > T * (1.0 + 1e-12))
            throw InvalidInput("reference solver: output time outside [0, T]");
        wanted.emplace(grid_steps(t, k_ref, "output time"), i);
    }

    ReferenceRun run;
    run.k_ref = k_ref;
    run.T = T;
    run.scheme = scheme;
    run.times.assign(output_times.begin(), output_times.end());
    // the terminal state is always kept
    if (wanted.find(steps) == wanted.end()) {
        wanted.emplace(steps, run.times.size());
        run.times.push_back(T);
    }
    run.snapshots.resize(run.times.size());

    const double eps = system.eps;
    const Complex I(0.0, 1.0);

    // Crank-Nicolson: one solve with (i eps M - k/2 A). Higher orders factor the
    // (m,m) Pade approximant of exp(z), z = -i k M^{-1} A / eps, over its poles d_j,
    // with (z - d)^{-1} psi = (-i k/eps A - d M)^{-1} M psi.
    // UmfPackLU reads the factored matrix during solves, so the matrices live
    // alongside their factorizations.
    const PadeFractions pade = scheme == TimeScheme::crank_nicolson ? PadeFractions{}
                                                                     : pade_fractions(scheme == TimeScheme::gauss4 ? 2 : 4);
    const std::size_t stages = std::max<std::size_t>(1, pade.poles.size());
    std::vector<ComplexSparse> implicit(stages);
    std::vector<ComplexLU> solvers(stages);
    ComplexSparse explicit_part;
    if (scheme == TimeScheme::crank_nicolson) {
        implicit[0] = combine(system, I * eps, -0.5 * k_ref);
        factorize(solvers[0], implicit[0]);
        explicit_part = combine(system, I * eps, 0.5 * k_ref);
    } else {
        for (std::size_t j = 0; j < stages; ++j) {
            implicit[j] = combine(system, -pade.poles[j], -I * k_ref / eps);
            factorize(solvers[j], implicit[j]);
        }
    }

    Eigen::VectorXcd psi = psi_in.values;
    const double mass0 = hermitian_form(system.M, psi);
    auto record = [&](long n) {
        auto [lo, hi] = wanted.equal_range(n);
        for (auto it = lo; it != hi; ++it)
            run.snapshots[it->second].values = psi;
    };
    record(0);

    for (long n = 1; n <= steps; ++n) {
        if (scheme == TimeScheme::crank_nicolson) {
            psi = solvers[0].solve(Eigen::VectorXcd(explicit_part * psi));
        } else {
            // R(z) = (-1)^m prod_j (z + d_j) / (z - d_j), one factor at a time:
            // (z + d)/(z - d) psi = psi + 2 d (z - d)^{-1} psi. Summing the
            // partial fractions instead loses unitarity to cancellation.
            for (std::size_t j = 0; j < stages; ++j)
                psi += 2.0 * pade.poles[j] * solvers[j].solve(multiply(system.M, psi));
            psi *= pade.at_infinity;
        }
        if (!psi.allFinite())
            throw SolverError("reference solver produced non-finite values");
        if (mass0 > 0.0)
            run.mass_drift = std::max(run.mass_drift, std::abs(hermitian_form(system.M, psi) - mass0) / mass0);
        record(n);
    }
    return run;
}

ReferenceRun crank_nicolson(const FineSystem& system, const WaveField& psi_in, double k_ref, double T,
                            std::span<const double> output_times)
{
    return integrate_reference(system, psi_in, k_ref, T, output_times, TimeScheme::crank_nicolson);
}

ExampleProblem example_problem(int id, double eps)
{
    if (!(eps > 0.0))
        throw InvalidInput("example_problem: eps must be positive");
    ExampleProblem p;
    p.id = id;
    p.eps = eps;
    p.dim = id <= 3 ? 1 : 2;
    switch (id) {
    case 1: p.potential = PotentialSpec(potentials::Mathieu{eps}); break;
    case 2: p.potential = PotentialSpec(potentials::MultiplicativeTwoScale{eps}); break;
    case 3: p.potential = PotentialSpec(potentials::Layered{4.0 * eps, eps}); break;
    case 4: p.potential = PotentialSpec(potentials::AdditiveTwoScale2D{eps}); break;
    case 5: p.potential = PotentialSpec(potentials::Checkerboard2D{2.0 * eps, eps}); break;
    default: throw InvalidInput("unknown example " + std::to_string(id) + " (expected 1..5)");
    }
    if (p.dim == 1)
        p.initial = gaussian_1d;
    else
        p.initial = gaussian_2d;
    return p;
}

double default_fine_size(int dim, double eps)
{
    return dim == 1 ? eps / 64.0 : eps / 16.0;
}

int cells_for_size(double size)
{
    if (!(size > 0.0) || !std::isfinite(size))
        throw InvalidDiscretization("mesh size must be positive");
    const double n = 1.0 / size;
    const double rounded = std::max(1.0, std::round(n));
    if (std::abs(n - rounded) > 0.01 * rounded) {
        std::ostringstream msg;
        msg << "mesh size " << size << " is not within 1% of 1/n for an integer n";
        throw InvalidDiscretization(msg.str());
    }
    return static_cast<int>(rounded);
}

ReferenceRun reference_for_example(int id, double eps, double h, double k_ref, std::span<const double> output_times,
                                   TimeScheme scheme)
{
    const ExampleProblem problem = example_problem(id, eps);
    if (h <= 0.0)
        h = default_fine_size(problem.dim, eps);
    const SimplexLattice lattice(problem.dim, cells_for_size(h));
    const FineSystem system = assemble(lattice, problem.potential, eps);
    const WaveField psi_in = interpolate(lattice, problem.initial);
    const std::array<double, 1> terminal{1.0};
    if (output_times.empty())
        output_times = terminal;
    return integrate_reference(system, psi_in, k_ref, 1.0, output_times, scheme);
}

} // namespace msfem

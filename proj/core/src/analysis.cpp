#include "msfem/analysis.hpp"

#include "msfem/error.hpp"

#include <cmath>

namespace msfem {

RelativeErrors relative_errors(const WaveField& num, const WaveField& exact, const SparseMatrix& S,
                               const SparseMatrix& M)
{
    if (num.size() != exact.size())
        throw InvalidInput("relative_errors: fields live on different meshes");
    const double l2_exact = l2_norm(exact, M);
    const double h1_exact = h1_norm(exact, S, M);
    if (l2_exact == 0.0 || h1_exact == 0.0)
        throw UndefinedError("relative error undefined: reference field has zero norm");
    const WaveField diff{num.values - exact.values};
    return {l2_norm(diff, M) / l2_exact, h1_norm(diff, S, M) / h1_exact};
}

Eigen::VectorXd position_density(const WaveField& field)
{
    return field.values.cwiseAbs2();
}

Eigen::VectorXd energy_density(const WaveField& field, const PotentialSpec& spec, double eps,
                               const SimplexLattice& lattice)
{
    if (field.size() != lattice.num_vertices())
        throw InvalidInput("energy_density: field does not match the lattice");
    const double measure = lattice.element_measure();
    Eigen::VectorXd element_value(lattice.num_elements());
    for (Index e = 0; e < lattice.num_elements(); ++e) {
        const auto nodes = lattice.element(e);
        const auto grads = element_gradients(lattice, e);
        std::array<Complex, 2> grad{};
        for (std::size_t a = 0; a < nodes.size(); ++a)
            for (std::size_t d = 0; d < 2; ++d)
                grad[d] += grads[a][d] * field.values[nodes[a]];
        const double kinetic = 0.5 * eps * eps * (std::norm(grad[0]) + std::norm(grad[1]));

        double potential = 0.0;
        for (const QuadraturePoint& q : element_quadrature(lattice, e)) {
            Complex psi = 0.0;
            for (std::size_t a = 0; a < nodes.size(); ++a)
                psi += q.shape[a] * field.values[nodes[a]];
            potential += q.weight * spec(q.x.x, q.x.y) * std::norm(psi);
        }
        element_value[e] = kinetic + potential / measure;
    }

    Eigen::VectorXd nodal(lattice.num_vertices());
    for (Index v = 0; v < lattice.num_vertices(); ++v) {
        const auto elements = lattice.elements_of_vertex(v);
        double sum = 0.0;
        for (Index e : elements)
            sum += element_value[e];
        nodal[v] = sum / static_cast<double>(elements.size());
    }
    return nodal;
}

double integrate_position_density(const WaveField& field, const SimplexLattice& lattice)
{
    if (field.size() != lattice.num_vertices())
        throw InvalidInput("integrate_position_density: field does not match the lattice");
    // int_K |sum_a u_a N_a|^2 = |K| / ((d+1)(d+2)) (sum_a |u_a|^2 + |sum_a u_a|^2)
    const int n = lattice.nodes_per_element();
    const double factor = lattice.element_measure() / (n * (n + 1));
    double total = 0.0;
    for (Index e = 0; e < lattice.num_elements(); ++e) {
        double squares = 0.0;
        Complex sum = 0.0;
        for (Index v : lattice.element(e)) {
            squares += std::norm(field.values[v]);
            sum += field.values[v];
        }
        total += factor * (squares + std::norm(sum));
    }
    return total;
}

std::vector<ErrorReport> convergence_table(std::span<const ErrorSample> samples)
{
    std::vector<ErrorReport> rows;
    rows.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const ErrorSample& s = samples[i];
        if (!(s.err_l2 >= 0.0) || !(s.err_h1 >= 0.0))
            throw InvalidInput("convergence_table: errors must be nonnegative");
        ErrorReport row{s.H_over_eps, s.err_l2, s.err_h1, std::nullopt, std::nullopt};
        if (i > 0) {
            const double previous = samples[i - 1].H_over_eps;
            if (std::abs(previous - 2.0 * s.H_over_eps) > 1e-9 * previous)
                throw InvalidInput("convergence_table: H/eps must halve between consecutive rows");
            row.rate_l2 = std::log2(samples[i - 1].err_l2 / s.err_l2);
            row.rate_h1 = std::log2(samples[i - 1].err_h1 / s.err_h1);
        }
        rows.push_back(row);
    }
    return rows;
}

double fitted_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidInput("fitted_slope: need at least two paired samples");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0)
        throw InvalidInput("fitted_slope: abscissae are all equal");
    return sxy / sxx;
}

} // namespace msfem

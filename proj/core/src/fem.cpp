#include "msfem/fem.hpp"

#include "msfem/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace msfem {

namespace {

using Triplet = Eigen::Triplet<double>;

void require_size(const SparseMatrix& K, Eigen::Index n, const char* what)
{
    if (K.rows() != n || K.cols() != n) {
        std::ostringstream msg;
        msg << what << ": field of length " << n << " does not match a " << K.rows() << "x" << K.cols()
            << " matrix";
        throw InvalidInput(msg.str());
    }
}

} // namespace

std::vector<QuadraturePoint> element_quadrature(const SimplexLattice& lattice, Index element)
{
    const auto p = lattice.element_coordinates(element);
    const double measure = lattice.element_measure();
    std::vector<QuadraturePoint> rule;
    if (lattice.dim() == 1) {
        const double g = 0.5 / std::sqrt(3.0);
        for (double xi : {0.5 - g, 0.5 + g}) {
            QuadraturePoint q;
            q.x = {p[0].x + xi * (p[1].x - p[0].x), 0.0};
            q.weight = 0.5 * measure;
            q.shape = {1.0 - xi, xi, 0.0};
            rule.push_back(q);
        }
        return rule;
    }
    constexpr std::array<std::array<int, 2>, 3> edges{{{0, 1}, {1, 2}, {2, 0}}};
    for (const auto& edge : edges) {
        QuadraturePoint q;
        q.x = {0.5 * (p[edge[0]].x + p[edge[1]].x), 0.5 * (p[edge[0]].y + p[edge[1]].y)};
        q.weight = measure / 3.0;
        q.shape = {0.0, 0.0, 0.0};
        q.shape[edge[0]] = 0.5;
        q.shape[edge[1]] = 0.5;
        rule.push_back(q);
    }
    return rule;
}

std::array<std::array<double, 2>, 3> element_gradients(const SimplexLattice& lattice, Index element)
{
    const auto p = lattice.element_coordinates(element);
    if (lattice.dim() == 1) {
        const double inv = 1.0 / (p[1].x - p[0].x);
        return {{{-inv, 0.0}, {inv, 0.0}, {0.0, 0.0}}};
    }
    const double det = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
    return {{{(p[1].y - p[2].y) / det, (p[2].x - p[1].x) / det},
             {(p[2].y - p[0].y) / det, (p[0].x - p[2].x) / det},
             {(p[0].y - p[1].y) / det, (p[1].x - p[0].x) / det}}};
}

FineSystem assemble(const SimplexLattice& lattice, const PotentialSpec& spec, double eps)
{
    if (spec.dim() != 0 && spec.dim() != lattice.dim()) {
        std::ostringstream msg;
        msg << "assemble: " << spec.describe() << " does not match a " << lattice.dim() << "D mesh";
        throw InvalidInput(msg.str());
    }
    if (!(eps > 0.0))
        throw InvalidInput("assemble: eps must be positive");

    FineSystem system;
    system.eps = eps;
    if (lattice.spacing() > spec.smallest_scale() / 8.0) {
        std::ostringstream msg;
        msg << "fine mesh h = " << lattice.spacing() << " under-resolves " << spec.describe()
            << " (recommended h <= " << spec.smallest_scale() / 8.0 << ")";
        system.warnings.push_back(msg.str());
    }

    const int npe = lattice.nodes_per_element();
    const double measure = lattice.element_measure();
    const Index n = lattice.num_vertices();
    std::vector<Triplet> s_entries;
    std::vector<Triplet> m_entries;
    std::vector<Triplet> v_entries;
    const std::size_t reserve = static_cast<std::size_t>(lattice.num_elements()) * npe * npe;
    s_entries.reserve(reserve);
    m_entries.reserve(reserve);
    v_entries.reserve(reserve);

    for (Index e = 0; e < lattice.num_elements(); ++e) {
        const auto verts = lattice.element(e);
        const auto grads = element_gradients(lattice, e);
        const auto rule = element_quadrature(lattice, e);
        std::array<double, 3> potential{};
        for (std::size_t q = 0; q < rule.size(); ++q)
            potential[q] = spec(rule[q].x.x, rule[q].x.y);

        for (int a = 0; a < npe; ++a) {
            for (int b = 0; b < npe; ++b) {
                const double stiff = measure * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                const double mass = lattice.dim() == 1 ? measure / 6.0 * (a == b ? 2.0 : 1.0)
                                                       : measure / 12.0 * (a == b ? 2.0 : 1.0);
                double pot = 0.0;
                for (std::size_t q = 0; q < rule.size(); ++q)
                    pot += rule[q].weight * potential[q] * (rule[q].shape[a] * rule[q].shape[b]);
                s_entries.emplace_back(verts[a], verts[b], stiff);
                m_entries.emplace_back(verts[a], verts[b], mass);
                v_entries.emplace_back(verts[a], verts[b], pot);
            }
        }
    }

    system.S.resize(n, n);
    system.M.resize(n, n);
    system.V.resize(n, n);
    system.S.setFromTriplets(s_entries.begin(), s_entries.end());
    system.M.setFromTriplets(m_entries.begin(), m_entries.end());
    system.V.setFromTriplets(v_entries.begin(), v_entries.end());
    system.A = (0.5 * eps * eps) * system.S + system.V;
    return system;
}

FineSystem assemble(const PeriodicMesh& mesh, const PotentialSpec& spec, double eps)
{
    return assemble(mesh.fine(), spec, eps);
}

Eigen::VectorXcd multiply(const SparseMatrix& K, const Eigen::VectorXcd& c)
{
    Eigen::VectorXcd out(K.rows());
    out.real() = K * c.real();
    out.imag() = K * c.imag();
    return out;
}

double hermitian_form(const SparseMatrix& K, const Eigen::VectorXcd& c)
{
    const Eigen::VectorXd re = c.real();
    const Eigen::VectorXd im = c.imag();
    return re.dot(K * re) + im.dot(K * im);
}

double l2_norm(const WaveField& field, const SparseMatrix& M)
{
    require_size(M, field.size(), "l2_norm");
    return std::sqrt(std::max(0.0, hermitian_form(M, field.values)));
}

double h1_norm(const WaveField& field, const SparseMatrix& S, const SparseMatrix& M)
{
    require_size(S, field.size(), "h1_norm");
    require_size(M, field.size(), "h1_norm");
    return std::sqrt(std::max(0.0, hermitian_form(S, field.values) + hermitian_form(M, field.values)));
}

WaveField interpolate(const SimplexLattice& lattice, const std::function<Complex(const Point&)>& f)
{
    WaveField field;
    field.values.resize(lattice.num_vertices());
    for (Index v = 0; v < lattice.num_vertices(); ++v)
        field.values[v] = f(lattice.vertex(v));
    return field;
}

WaveField interpolate(const PeriodicMesh& mesh, const std::function<Complex(const Point&)>& f)
{
    return interpolate(mesh.fine(), f);
}

Complex gaussian_1d(const Point& x)
{
    const double dx = x.x - 0.5;
    return std::pow(10.0 / std::numbers::pi, 0.25) * std::exp(-5.0 * dx * dx);
}

Complex gaussian_2d(const Point& x)
{
    const double dx = x.x - 0.5;
    const double dy = x.y - 0.5;
    return std::sqrt(10.0 / std::numbers::pi) * std::exp(-5.0 * dx * dx - 5.0 * dy * dy);
}

std::vector<double> element_gradient_energy(const SimplexLattice& lattice, const Eigen::VectorXd& u)
{
    if (u.size() != lattice.num_vertices())
        throw InvalidInput("element_gradient_energy: vector length does not match the lattice");
    std::vector<double> energy(lattice.num_elements());
    const double measure = lattice.element_measure();
    for (Index e = 0; e < lattice.num_elements(); ++e) {
        const auto verts = lattice.element(e);
        const auto grads = element_gradients(lattice, e);
        double gx = 0.0;
        double gy = 0.0;
        for (std::size_t a = 0; a < verts.size(); ++a) {
            gx += u[verts[a]] * grads[a][0];
            gy += u[verts[a]] * grads[a][1];
        }
        energy[e] = measure * (gx * gx + gy * gy);
    }
    return energy;
}

} // namespace msfem

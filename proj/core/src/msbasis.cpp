#include "msfem/msbasis.hpp"

#include "msfem/error.hpp"
#include "msfem/kkt.hpp"
#include "msfem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace msfem {

namespace {

using Triplet = Eigen::Triplet<double>;

std::array<double, 3> barycentric(const std::array<Point, 3>& tri, int dim, const Point& p)
{
    if (dim == 1) {
        const double t = (p.x - tri[0].x) / (tri[1].x - tri[0].x);
        return {1.0 - t, t, 0.0};
    }
    const double det = (tri[1].x - tri[0].x) * (tri[2].y - tri[0].y) - (tri[2].x - tri[0].x) * (tri[1].y - tri[0].y);
    const double l1 = ((p.x - tri[0].x) * (tri[2].y - tri[0].y) - (tri[2].x - tri[0].x) * (p.y - tri[0].y)) / det;
    const double l2 = ((tri[1].x - tri[0].x) * (p.y - tri[0].y) - (p.x - tri[0].x) * (tri[1].y - tri[0].y)) / det;
    return {1.0 - l1 - l2, l1, l2};
}

long periodic_offset(long v, long c, long n)
{
    long d = (v - c) % n;
    if (d < 0)
        d += n;
    if (d >= (n + 1) / 2)
        d -= n;
    return d;
}

// Orders lattice vertices by their periodic offset from `center` so that
// translated patches produce identical local numbering.
std::vector<Index> order_by_offset(const SimplexLattice& lattice, std::span<const Index> vertices, Index center)
{
    const long n = lattice.cells_per_axis();
    auto key = [&](Index v) -> std::pair<long, long> {
        if (lattice.dim() == 1)
            return {0, periodic_offset(v, center, n)};
        return {periodic_offset(v / n, center / n, n), periodic_offset(v % n, center % n, n)};
    };
    std::vector<std::pair<std::pair<long, long>, Index>> keyed;
    keyed.reserve(vertices.size());
    for (Index v : vertices)
        keyed.push_back({key(v), v});
    std::sort(keyed.begin(), keyed.end());
    std::vector<Index> ordered;
    ordered.reserve(keyed.size());
    for (const auto& k : keyed)
        ordered.push_back(k.second);
    return ordered;
}

double max_abs_deviation_from_identity(const SparseMatrix& CPhi)
{
    double worst = 0.0;
    std::vector<char> diagonal_seen(static_cast<std::size_t>(CPhi.cols()), 0);
    for (Eigen::Index k = 0; k < CPhi.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(CPhi, k); it; ++it) {
            const bool diag = it.row() == it.col();
            if (diag)
                diagonal_seen[static_cast<std::size_t>(k)] = 1;
            worst = std::max(worst, std::abs(it.value() - (diag ? 1.0 : 0.0)));
        }
    if (std::find(diagonal_seen.begin(), diagonal_seen.end(), 0) != diagonal_seen.end())
        worst = std::max(worst, 1.0);
    return worst;
}

double relative_stationarity(const SparseMatrix& A, const SparseMatrix& C, const Eigen::VectorXd& phi,
                             const Eigen::VectorXd& mu)
{
    const Eigen::VectorXd a_phi = A * phi;
    const Eigen::VectorXd ct_mu = C.transpose() * mu;
    const double scale = a_phi.norm() + ct_mu.norm();
    return scale > 0.0 ? (a_phi + ct_mu).norm() / scale : 0.0;
}

struct LocalWorkspace
{
    SaddlePointSolver solver;
    std::vector<Index> fine_map;
    std::vector<Index> coarse_map;
};

} // namespace

ConstraintMatrix constraint_matrix(const PeriodicMesh& mesh)
{
    const SimplexLattice& coarse = mesh.coarse();
    const SimplexLattice& fine = mesh.fine();
    const int npe = fine.nodes_per_element();
    const double measure = fine.element_measure();
    const double mass_diag = (mesh.dim() == 1 ? measure / 6.0 : measure / 12.0) * 2.0;
    const double mass_off = mass_diag / 2.0;

    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(fine.num_elements()) * npe * npe);
    for (Index e = 0; e < fine.num_elements(); ++e) {
        const Index k = mesh.parent(e);
        const auto coarse_coords = coarse.element_coordinates(k);
        const auto coarse_verts = coarse.element(k);
        const auto fine_coords = fine.element_coordinates(e);
        const auto fine_verts = fine.element(e);

        // values of each coarse hat at the fine element's vertices
        std::array<std::array<double, 3>, 3> hat_at{};
        for (int b = 0; b < npe; ++b) {
            const auto lambda = barycentric(coarse_coords, mesh.dim(), fine_coords[b]);
            for (int s = 0; s < npe; ++s)
                hat_at[s][b] = lambda[s];
        }
        for (int s = 0; s < npe; ++s)
            for (int a = 0; a < npe; ++a) {
                double value = 0.0;
                for (int b = 0; b < npe; ++b)
                    value += hat_at[s][b] * (a == b ? mass_diag : mass_off);
                entries.emplace_back(coarse_verts[s], fine_verts[a], value);
            }
    }
    ConstraintMatrix result;
    result.C.resize(coarse.num_vertices(), fine.num_vertices());
    result.C.setFromTriplets(entries.begin(), entries.end());
    result.C.prune(0.0);
    result.C.makeCompressed();
    return result;
}

MultiscaleBasis build_basis_global(const FineSystem& system, const ConstraintMatrix& constraints)
{
    const SparseMatrix& A = system.A;
    const SparseMatrix& C = constraints.C;
    const Eigen::Index nf = A.rows();
    const Eigen::Index nx = C.rows();

    SaddlePointSolver solver;
    solver.factorize(A, C);

    constexpr Eigen::Index chunk = 64;
    std::vector<Triplet> entries;
    double stationarity = 0.0;
    for (Eigen::Index first = 0; first < nx; first += chunk) {
        const Eigen::Index count = std::min(chunk, nx - first);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nf + nx, count);
        for (Eigen::Index c = 0; c < count; ++c)
            rhs(nf + first + c, c) = 1.0;
        const Eigen::MatrixXd sol = solver.solve(rhs);
        for (Eigen::Index c = 0; c < count; ++c) {
            const Eigen::VectorXd phi = sol.col(c).head(nf);
            const Eigen::VectorXd mu = sol.col(c).tail(nx);
            stationarity = std::max(stationarity, relative_stationarity(A, C, phi, mu));
            for (Eigen::Index r = 0; r < nf; ++r)
                if (phi[r] != 0.0)
                    entries.emplace_back(r, first + c, phi[r]);
        }
    }

    MultiscaleBasis basis;
    basis.Phi.resize(nf, nx);
    basis.Phi.setFromTriplets(entries.begin(), entries.end());
    basis.stationarity_residual = stationarity;
    basis.constraint_residual = max_abs_deviation_from_identity(C * basis.Phi);
    return basis;
}

Eigen::VectorXd global_basis_column(const FineSystem& system, const ConstraintMatrix& constraints, Index vertex)
{
    const Eigen::Index nf = system.A.rows();
    const Eigen::Index nx = constraints.C.rows();
    if (vertex < 0 || vertex >= nx)
        throw InvalidInput("global_basis_column: vertex out of range");
    SaddlePointSolver solver;
    solver.factorize(system.A, constraints.C);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + nx);
    rhs[nf + vertex] = 1.0;
    return solver.solve(rhs).head(nf);
}

MultiscaleBasis build_basis_localized(const PeriodicMesh& mesh, const FineSystem& system,
                                      const ConstraintMatrix& C, int l_star, unsigned threads)
{
    if (l_star < 1)
        throw InvalidInput("build_basis_localized: l* must be at least 1");
    const Index nx = mesh.num_coarse_vertices();
    std::vector<NodalPatch> patches(static_cast<std::size_t>(nx));
    parallel_for(patches.size(), threads,
                 [&](unsigned, std::size_t i) { patches[i] = nodal_patch(mesh, static_cast<Index>(i), l_star); });
    return build_basis_localized(mesh, system, C, patches, threads);
}

MultiscaleBasis build_basis_localized(const PeriodicMesh& mesh, const FineSystem& system,
                                      const ConstraintMatrix& constraints, std::span<const NodalPatch> patches,
                                      unsigned threads)
{
    const SparseMatrix& A = system.A;
    const SparseMatrix& C = constraints.C;
    const Index nf = mesh.num_fine_vertices();
    const Index nx = mesh.num_coarse_vertices();
    if (A.rows() != nf || C.rows() != nx || C.cols() != nf)
        throw InvalidInput("build_basis_localized: system does not match the mesh");
    if (static_cast<Index>(patches.size()) != nx)
        throw InvalidInput("build_basis_localized: need one patch per coarse vertex");
    const int level = patches.empty() ? 0 : patches.front().level;
    if (level < 1)
        throw InvalidInput("build_basis_localized: l* must be at least 1");

    const unsigned workers = resolve_threads(threads);
    std::vector<LocalWorkspace> workspaces(workers);
    for (auto& ws : workspaces) {
        ws.fine_map.assign(static_cast<std::size_t>(nf), -1);
        ws.coarse_map.assign(static_cast<std::size_t>(nx), -1);
    }

    std::vector<std::vector<std::pair<Index, double>>> columns(static_cast<std::size_t>(nx));
    std::vector<double> stationarity(static_cast<std::size_t>(nx), 0.0);

    parallel_for(static_cast<std::size_t>(nx), workers, [&](unsigned worker, std::size_t column) {
        LocalWorkspace& ws = workspaces[worker];
        const NodalPatch& patch = patches[column];
        const Index center = static_cast<Index>(column);
        if (patch.center != center)
            throw InvalidInput("build_basis_localized: patches must be ordered by center vertex");

        const auto dofs = order_by_offset(mesh.fine(), patch.fine_dofs, mesh.fine_vertex_of(center));
        const auto cons = order_by_offset(mesh.coarse(), patch.coarse_vertices, center);
        const Index n = static_cast<Index>(dofs.size());
        const Index m = static_cast<Index>(cons.size());
        for (Index p = 0; p < n; ++p)
            ws.fine_map[dofs[p]] = p;
        for (Index q = 0; q < m; ++q)
            ws.coarse_map[cons[q]] = q;

        std::vector<Triplet> a_entries;
        std::vector<Triplet> c_entries;
        for (Index p = 0; p < n; ++p) {
            for (SparseMatrix::InnerIterator it(A, dofs[p]); it; ++it) {
                const Index r = ws.fine_map[it.row()];
                if (r >= 0)
                    a_entries.emplace_back(r, p, it.value());
            }
            for (SparseMatrix::InnerIterator it(C, dofs[p]); it; ++it) {
                const Index r = ws.coarse_map[it.row()];
                if (r >= 0)
                    c_entries.emplace_back(r, p, it.value());
            }
        }
        const Index local_center = ws.coarse_map[center];
        for (Index v : dofs)
            ws.fine_map[v] = -1;
        for (Index v : cons)
            ws.coarse_map[v] = -1;

        SparseMatrix A_loc(n, n);
        SparseMatrix C_loc(m, n);
        A_loc.setFromTriplets(a_entries.begin(), a_entries.end());
        C_loc.setFromTriplets(c_entries.begin(), c_entries.end());

        try {
            ws.solver.factorize(A_loc, C_loc);
        } catch (const IllPosedBasis& e) {
            std::ostringstream msg;
            msg << "localized basis for coarse vertex " << center << ": " << e.what();
            throw IllPosedBasis(msg.str());
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
        rhs[n + local_center] = 1.0;
        const Eigen::VectorXd sol = ws.solver.solve(rhs);
        stationarity[column] = relative_stationarity(A_loc, C_loc, sol.head(n), sol.tail(m));

        auto& out = columns[column];
        out.reserve(static_cast<std::size_t>(n));
        for (Index p = 0; p < n; ++p)
            if (sol[p] != 0.0)
                out.emplace_back(dofs[p], sol[p]);
        std::sort(out.begin(), out.end());
    });

    MultiscaleBasis basis;
    basis.l_star = level;
    basis.Phi.resize(nf, nx);
    std::size_t total = 0;
    for (const auto& col : columns)
        total += col.size();
    std::vector<Triplet> entries;
    entries.reserve(total);
    for (std::size_t j = 0; j < columns.size(); ++j)
        for (const auto& [row, value] : columns[j])
            entries.emplace_back(row, static_cast<Index>(j), value);
    basis.Phi.setFromTriplets(entries.begin(), entries.end());
    basis.stationarity_residual = *std::max_element(stationarity.begin(), stationarity.end());
    basis.constraint_residual = max_abs_deviation_from_identity(C * basis.Phi);
    return basis;
}

int default_l_star(const PeriodicMesh& mesh)
{
    const int n = mesh.coarse().cells_per_axis();
    int k = 0;
    while ((1L << k) < n)
        ++k;
    return k + 1;
}

int scaled_l_star(const PeriodicMesh& mesh, double eps)
{
    const double halvings = std::log2(eps * mesh.coarse().cells_per_axis());
    return default_l_star(mesh) + std::max(0, static_cast<int>(std::ceil(halvings - 1e-9)));
}

DecayProfile decay_profile(const PeriodicMesh& mesh, const Eigen::VectorXd& column, Index center, int max_level,
                           double fit_floor)
{
    const auto entry = patch_entry_levels(mesh, center);
    const int saturation = *std::max_element(entry.begin(), entry.end());
    const auto fine_energy = element_gradient_energy(mesh.fine(), column);

    std::vector<double> ring(static_cast<std::size_t>(saturation) + 1, 0.0);
    for (Index e = 0; e < mesh.fine().num_elements(); ++e)
        ring[static_cast<std::size_t>(entry[mesh.parent(e)])] += fine_energy[e];

    // tail_sq[l] = sum of rings beyond l, accumulated from the outside in
    std::vector<double> tail_sq(ring.size(), 0.0);
    for (int l = saturation - 1; l >= 0; --l)
        tail_sq[l] = tail_sq[l + 1] + ring[l + 1];
    std::vector<double> inner_sq(ring.size(), 0.0);
    double running = 0.0;
    for (int l = 0; l <= saturation; ++l) {
        running += ring[l];
        inner_sq[l] = running;
    }
    const double total = std::sqrt(tail_sq[0] + ring[0]);

    DecayProfile profile;
    profile.center = center;
    profile.saturation_level = saturation;
    profile.gradient_norm = total;
    const int last = max_level < 0 ? saturation : max_level;
    double max_gap = 0.0;
    for (int l = 0; l <= last; ++l) {
        const int lc = std::min(l, saturation);
        profile.levels.push_back(l);
        profile.tail_energy.push_back(std::sqrt(tail_sq[lc]));
        const double gap = total - std::sqrt(inner_sq[lc]);
        profile.e_relative.push_back(gap);
        max_gap = std::max(max_gap, gap);
    }
    for (double& g : profile.e_relative)
        g = max_gap > 0.0 ? std::max(g, 0.0) / max_gap : 0.0;
    for (std::size_t l = 0; l + 1 < profile.tail_energy.size(); ++l)
        profile.ratios.push_back(profile.tail_energy[l] > 0.0 ? profile.tail_energy[l + 1] / profile.tail_energy[l]
                                                               : 0.0);

    // least-squares slope of log(tail) against l
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t l = 0; l < profile.tail_energy.size(); ++l) {
        const double t = profile.tail_energy[l];
        if (profile.levels[l] >= saturation || !(t > fit_floor * total))
            continue;
        const double x = profile.levels[l];
        const double y = std::log(t);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    profile.fitted_levels = count;
    if (count >= 2) {
        const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
        profile.fitted_beta = std::exp(slope);
    } else {
        profile.fitted_beta = std::numeric_limits<double>::quiet_NaN();
    }
    return profile;
}

Index nearest_coarse_vertex(const PeriodicMesh& mesh, const Point& x)
{
    const SimplexLattice& coarse = mesh.coarse();
    const double n = coarse.cells_per_axis();
    if (mesh.dim() == 1)
        return coarse.vertex_index(std::lround(x.x * n));
    return coarse.vertex_index(std::lround(x.x * n), std::lround(x.y * n));
}

} // namespace msfem

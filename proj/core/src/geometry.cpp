#include "msfem/geometry.hpp"

#include "msfem/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace msfem {

namespace {

long wrap(long i, long n)
{
    const long r = i % n;
    return r < 0 ? r + n : r;
}

void sort_unique(std::vector<Index>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

int cells_from_size(double size, const char* what)
{
    if (!(size > 0.0) || !std::isfinite(size)) {
        std::ostringstream msg;
        msg << what << " must be positive, got " << size;
        throw InvalidDiscretization(msg.str());
    }
    const double inv = 1.0 / size;
    const double n = std::round(inv);
    if (n < 1.0 || std::abs(inv - n) > 1e-9 * inv) {
        std::ostringstream msg;
        msg << "1/" << what << " = " << inv << " is not an integer";
        throw InvalidDiscretization(msg.str());
    }
    return static_cast<int>(n);
}

} // namespace

SimplexLattice::SimplexLattice(int dim, int cells_per_axis)
    : dim_(dim), n_(cells_per_axis)
{
    if (dim != 1 && dim != 2)
        throw InvalidDiscretization("dimension must be 1 or 2");
    if (cells_per_axis < 2)
        throw InvalidDiscretization("a periodic lattice needs at least 2 cells per axis");

    const long n = n_;
    if (dim_ == 1) {
        num_vertices_ = static_cast<Index>(n);
        num_elements_ = static_cast<Index>(n);
        connectivity_.reserve(2 * n);
        for (long i = 0; i < n; ++i) {
            connectivity_.push_back(vertex_index(i));
            connectivity_.push_back(vertex_index(i + 1));
        }
    } else {
        num_vertices_ = static_cast<Index>(n * n);
        num_elements_ = static_cast<Index>(2 * n * n);
        connectivity_.reserve(6 * n * n);
        for (long j = 0; j < n; ++j) {
            for (long i = 0; i < n; ++i) {
                const Index v00 = vertex_index(i, j);
                const Index v10 = vertex_index(i + 1, j);
                const Index v11 = vertex_index(i + 1, j + 1);
                const Index v01 = vertex_index(i, j + 1);
                connectivity_.insert(connectivity_.end(), {v00, v10, v11});
                connectivity_.insert(connectivity_.end(), {v00, v11, v01});
            }
        }
    }

    // vertex -> element adjacency (CSR)
    const int npe = nodes_per_element();
    vertex_offsets_.assign(num_vertices_ + 1, 0);
    for (Index e = 0; e < num_elements_; ++e)
        for (Index v : element(e))
            ++vertex_offsets_[v + 1];
    std::partial_sum(vertex_offsets_.begin(), vertex_offsets_.end(), vertex_offsets_.begin());
    vertex_elements_.resize(static_cast<std::size_t>(num_elements_) * npe);
    std::vector<Index> cursor(vertex_offsets_.begin(), vertex_offsets_.end() - 1);
    for (Index e = 0; e < num_elements_; ++e)
        for (Index v : element(e))
            vertex_elements_[cursor[v]++] = e;
    for (Index v = 0; v < num_vertices_; ++v) {
        auto first = vertex_elements_.begin() + vertex_offsets_[v];
        auto last = vertex_elements_.begin() + vertex_offsets_[v + 1];
        std::sort(first, last);
    }
}

Point SimplexLattice::vertex(Index v) const
{
    if (dim_ == 1)
        return {static_cast<double>(v) / n_, 0.0};
    return {static_cast<double>(v % n_) / n_, static_cast<double>(v / n_) / n_};
}

std::array<Point, 3> SimplexLattice::element_coordinates(Index e) const
{
    const double s = spacing();
    if (dim_ == 1) {
        const double x0 = e * s;
        return {Point{x0, 0.0}, Point{x0 + s, 0.0}, Point{}};
    }
    const Index cell = e / 2;
    const double x0 = (cell % n_) * s;
    const double y0 = (cell / n_) * s;
    if (e % 2 == 0)
        return {Point{x0, y0}, Point{x0 + s, y0}, Point{x0 + s, y0 + s}};
    return {Point{x0, y0}, Point{x0 + s, y0 + s}, Point{x0, y0 + s}};
}

double SimplexLattice::element_measure() const
{
    const double s = spacing();
    return dim_ == 1 ? s : 0.5 * s * s;
}

Index SimplexLattice::vertex_index(long i, long j) const
{
    if (dim_ == 1)
        return static_cast<Index>(wrap(i, n_));
    return static_cast<Index>(wrap(j, n_) * n_ + wrap(i, n_));
}

Index SimplexLattice::locate(const Point& x, std::array<double, 3>& bary) const
{
    auto cell_and_offset = [this](double c, long& cell) {
        double u = (c - std::floor(c)) * n_;
        cell = static_cast<long>(std::floor(u));
        if (cell >= n_) // c just below 1 rounding up
            cell = n_ - 1;
        return std::clamp(u - static_cast<double>(cell), 0.0, 1.0);
    };

    long i = 0;
    const double a = cell_and_offset(x.x, i);
    if (dim_ == 1) {
        bary = {1.0 - a, a, 0.0};
        return static_cast<Index>(i);
    }
    long j = 0;
    const double b = cell_and_offset(x.y, j);
    const Index cell = static_cast<Index>(j * n_ + i);
    if (b <= a) {
        bary = {1.0 - a, a - b, b};
        return 2 * cell;
    }
    bary = {1.0 - b, a, b - a};
    return 2 * cell + 1;
}

PeriodicMesh::PeriodicMesh(int dim, int coarse_cells, int fine_cells)
    : coarse_(dim, coarse_cells), fine_(dim, fine_cells)
{
    if (fine_cells % coarse_cells != 0)
        throw InvalidDiscretization("fine lattice must refine the coarse lattice (H/h integer)");

    const int r = fine_cells / coarse_cells;
    const int nf = fine_cells;
    const int nc = coarse_cells;
    parent_.resize(fine_.num_elements());
    for (Index e = 0; e < fine_.num_elements(); ++e) {
        if (dim == 1) {
            parent_[e] = e / r;
            continue;
        }
        const Index cell = e / 2;
        const int fi = cell % nf;
        const int fj = cell / nf;
        const int a = fi % r;
        const int b = fj % r;
        const Index coarse_cell = (fj / r) * nc + fi / r;
        int triangle = e % 2;
        if (a > b)
            triangle = 0;
        else if (a < b)
            triangle = 1;
        parent_[e] = 2 * coarse_cell + triangle;
    }

    child_offsets_.assign(coarse_.num_elements() + 1, 0);
    for (Index p : parent_)
        ++child_offsets_[p + 1];
    std::partial_sum(child_offsets_.begin(), child_offsets_.end(), child_offsets_.begin());
    children_.resize(parent_.size());
    std::vector<Index> cursor(child_offsets_.begin(), child_offsets_.end() - 1);
    for (Index e = 0; e < static_cast<Index>(parent_.size()); ++e)
        children_[cursor[parent_[e]]++] = e;
}

Index PeriodicMesh::fine_vertex_of(Index coarse_vertex) const
{
    const int nc = coarse_.cells_per_axis();
    const int r = refinement();
    if (dim() == 1)
        return fine_.vertex_index(static_cast<long>(coarse_vertex) * r);
    return fine_.vertex_index(static_cast<long>(coarse_vertex % nc) * r, static_cast<long>(coarse_vertex / nc) * r);
}

PeriodicMesh build_mesh(int dim, double H, double h)
{
    if (dim != 1 && dim != 2)
        throw InvalidDiscretization("dimension must be 1 or 2");
    const int nc = cells_from_size(H, "H");
    const int nf = cells_from_size(h, "h");
    if (nc < 2)
        throw InvalidDiscretization("H must be at most 1/2 on the periodic unit domain");
    if (nf % nc != 0) {
        std::ostringstream msg;
        msg << "H/h = " << H / h << " is not an integer";
        throw InvalidDiscretization(msg.str());
    }
    return PeriodicMesh(dim, nc, nf);
}

double hat_function(const PeriodicMesh& mesh, Index j, const Point& x)
{
    const SimplexLattice& coarse = mesh.coarse();
    if (j < 0 || j >= coarse.num_vertices())
        throw InvalidInput("hat_function: vertex index out of range");
    std::array<double, 3> bary{};
    const Index e = coarse.locate(x, bary);
    const auto verts = coarse.element(e);
    double value = 0.0;
    for (std::size_t a = 0; a < verts.size(); ++a)
        if (verts[a] == j)
            value += bary[a];
    return value;
}

std::vector<Index> grow_patch(const SimplexLattice& coarse, std::span<const Index> elements)
{
    std::vector<Index> vertices;
    for (Index e : elements)
        for (Index v : coarse.element(e))
            vertices.push_back(v);
    sort_unique(vertices);

    std::vector<Index> grown;
    for (Index v : vertices)
        for (Index e : coarse.elements_of_vertex(v))
            grown.push_back(e);
    sort_unique(grown);
    return grown;
}

NodalPatch nodal_patch(const PeriodicMesh& mesh, Index center, int level)
{
    const SimplexLattice& coarse = mesh.coarse();
    if (center < 0 || center >= coarse.num_vertices())
        throw InvalidInput("nodal_patch: center vertex out of range");
    if (level < 0)
        throw InvalidInput("nodal_patch: level must be non-negative");

    NodalPatch patch;
    patch.center = center;
    patch.level = level;
    const auto support = coarse.elements_of_vertex(center);
    patch.elements.assign(support.begin(), support.end());
    for (int l = 0; l < level; ++l) {
        if (static_cast<Index>(patch.elements.size()) == coarse.num_elements())
            break;
        patch.elements = grow_patch(coarse, patch.elements);
    }

    for (Index e : patch.elements)
        for (Index v : coarse.element(e))
            patch.coarse_vertices.push_back(v);
    sort_unique(patch.coarse_vertices);

    const SimplexLattice& fine = mesh.fine();
    auto in_patch = [&](Index coarse_element) {
        return std::binary_search(patch.elements.begin(), patch.elements.end(), coarse_element);
    };
    std::vector<Index> candidates;
    for (Index k : patch.elements)
        for (Index e : mesh.children(k))
            for (Index v : fine.element(e))
                candidates.push_back(v);
    sort_unique(candidates);
    for (Index v : candidates) {
        const auto adjacent = fine.elements_of_vertex(v);
        const bool interior = std::all_of(adjacent.begin(), adjacent.end(),
                                          [&](Index e) { return in_patch(mesh.parent(e)); });
        if (interior)
            patch.fine_dofs.push_back(v);
    }
    return patch;
}

std::vector<int> patch_entry_levels(const PeriodicMesh& mesh, Index center)
{
    const SimplexLattice& coarse = mesh.coarse();
    if (center < 0 || center >= coarse.num_vertices())
        throw InvalidInput("patch_entry_levels: center vertex out of range");

    std::vector<int> level(coarse.num_elements(), -1);
    std::vector<Index> frontier;
    for (Index e : coarse.elements_of_vertex(center)) {
        level[e] = 0;
        frontier.push_back(e);
    }
    std::vector<char> seen_vertex(coarse.num_vertices(), 0);
    for (int l = 1; !frontier.empty(); ++l) {
        std::vector<Index> next;
        for (Index e : frontier)
            for (Index v : coarse.element(e)) {
                if (seen_vertex[v])
                    continue;
                seen_vertex[v] = 1;
                for (Index k : coarse.elements_of_vertex(v))
                    if (level[k] < 0) {
                        level[k] = l;
                        next.push_back(k);
                    }
            }
        frontier = std::move(next);
    }
    return level;
}

int saturation_level(const PeriodicMesh& mesh, Index center)
{
    const auto levels = patch_entry_levels(mesh, center);
    return *std::max_element(levels.begin(), levels.end());
}

} // namespace msfem

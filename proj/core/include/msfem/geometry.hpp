#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace msfem {

using Index = std::int32_t;

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

/// Uniform simplicial lattice on the periodic unit torus [0,1)^d.
///
/// Vertices and cells are numbered row-major (x fastest). In 2D every square
/// cell (i, j) is split along the diagonal from (i, j) to (i+1, j+1) into
/// triangle 0 = [(i,j), (i+1,j), (i+1,j+1)] and triangle 1 =
/// [(i,j), (i+1,j+1), (i,j+1)], both counter-clockwise. Element 2c + t is
/// triangle t of cell c. In 1D element i is the segment [x_i, x_{i+1}].
class SimplexLattice
{
public:
    SimplexLattice() = default;
    SimplexLattice(int dim, int cells_per_axis);

    int dim() const { return dim_; }
    int cells_per_axis() const { return n_; }
    double spacing() const { return 1.0 / n_; }

    Index num_vertices() const { return num_vertices_; }
    Index num_elements() const { return num_elements_; }
    int nodes_per_element() const { return dim_ + 1; }

    /// Vertex indices of element e (dim + 1 entries).
    std::span<const Index> element(Index e) const
    {
        return {connectivity_.data() + static_cast<std::size_t>(e) * nodes_per_element(),
                static_cast<std::size_t>(nodes_per_element())};
    }

    /// Coordinates of vertex v in [0,1)^d.
    Point vertex(Index v) const;

    /// Unwrapped coordinates of the vertices of element e, lying in [0,1]^d.
    std::array<Point, 3> element_coordinates(Index e) const;

    /// Length (1D) or area (2D) of every element.
    double element_measure() const;

    /// Vertex index of lattice node (i, j), wrapped periodically.
    Index vertex_index(long i, long j = 0) const;

    /// Elements sharing vertex v, ascending.
    std::span<const Index> elements_of_vertex(Index v) const
    {
        return {vertex_elements_.data() + vertex_offsets_[v],
                static_cast<std::size_t>(vertex_offsets_[v + 1] - vertex_offsets_[v])};
    }

    /// Element containing x (wrapped into [0,1)^d) together with the
    /// barycentric coordinates of x in that element.
    Index locate(const Point& x, std::array<double, 3>& barycentric) const;

private:
    int dim_ = 1;
    int n_ = 1;
    Index num_vertices_ = 0;
    Index num_elements_ = 0;
    std::vector<Index> connectivity_;
    std::vector<Index> vertex_offsets_;
    std::vector<Index> vertex_elements_;
};

/// Coarse lattice of size H with a nested uniform refinement of size h.
class PeriodicMesh
{
public:
    PeriodicMesh(int dim, int coarse_cells, int fine_cells);

    int dim() const { return coarse_.dim(); }
    double H() const { return coarse_.spacing(); }
    double h() const { return fine_.spacing(); }
    int refinement() const { return fine_.cells_per_axis() / coarse_.cells_per_axis(); }

    const SimplexLattice& coarse() const { return coarse_; }
    const SimplexLattice& fine() const { return fine_; }

    Index num_coarse_vertices() const { return coarse_.num_vertices(); }
    Index num_fine_vertices() const { return fine_.num_vertices(); }

    /// Coarse element containing fine element e.
    Index parent(Index fine_element) const { return parent_[fine_element]; }

    /// Fine elements tiling coarse element k, ascending.
    std::span<const Index> children(Index coarse_element) const
    {
        return {children_.data() + child_offsets_[coarse_element],
                static_cast<std::size_t>(child_offsets_[coarse_element + 1] - child_offsets_[coarse_element])};
    }

    /// Fine vertex sitting on coarse vertex v.
    Index fine_vertex_of(Index coarse_vertex) const;

private:
    SimplexLattice coarse_;
    SimplexLattice fine_;
    std::vector<Index> parent_;
    std::vector<Index> child_offsets_;
    std::vector<Index> children_;
};

/// Builds the nested periodic mesh; 1/H and H/h must be integers >= 2 and
/// >= 1 respectively. Throws InvalidDiscretization otherwise.
PeriodicMesh build_mesh(int dim, double H, double h);

/// Coarse nodal hat function of vertex j evaluated at x (periodic).
double hat_function(const PeriodicMesh& mesh, Index j, const Point& x);

/// Nodal patch D_level around a coarse vertex.
struct NodalPatch
{
    Index center = 0;
    int level = 0;
    std::vector<Index> elements;        ///< coarse elements, ascending
    std::vector<Index> coarse_vertices; ///< vertices of the closed patch, ascending
    std::vector<Index> fine_dofs;       ///< fine vertices strictly inside the patch, ascending
};

NodalPatch nodal_patch(const PeriodicMesh& mesh, Index center, int level);

/// One ring of growth: all coarse elements touching the closure of `elements`.
std::vector<Index> grow_patch(const SimplexLattice& coarse, std::span<const Index> elements);

/// For every coarse element the first patch level around `center` that
/// contains it. The maximum entry is the saturation level.
std::vector<int> patch_entry_levels(const PeriodicMesh& mesh, Index center);

/// Smallest level whose patch around `center` covers the whole mesh.
int saturation_level(const PeriodicMesh& mesh, Index center);

} // namespace msfem

#pragma once

#include "msfem/geometry.hpp"

#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace msfem {

namespace potentials {

struct Constant
{
    double value = 0.0;
};

/// cos(2 pi x / eps)
struct Mathieu
{
    double eps = 1.0 / 40.0;
};

/// sin(4 x^2) sin(2 pi x / eps)
struct MultiplicativeTwoScale
{
    double eps = 1.0 / 40.0;
};

/// Three-layer heterojunction with external field (x - 1/2)^2. The middle
/// layer (1/3, 2/3] oscillates on eps2, the outer layers on eps1.
struct Layered
{
    double eps1 = 1.0 / 64.0;
    double eps2 = 1.0 / 256.0;
};

/// 1 + sin(4 x^2 y^2) + (1.5 + sin(2 pi x / eps)) / (1.5 + cos(2 pi y / eps))
struct AdditiveTwoScale2D
{
    double eps = 1.0 / 16.0;
};

/// Checkerboard of two product-cosine lattices plus |x - c|^2 with
/// c = (1/2, 1/2). The diagonal quadrants use eps2, the others eps1.
struct Checkerboard2D
{
    double eps1 = 1.0 / 8.0;
    double eps2 = 1.0 / 16.0;
};

/// Values on a tensor grid with (bi)linear interpolation between nodes.
/// Points outside the grid's bounding box are clamped onto it.
struct Sampled
{
    int dim = 1;
    std::vector<double> xs;     ///< ascending node coordinates along x
    std::vector<double> ys;     ///< ascending node coordinates along y (2D only)
    std::vector<double> values; ///< row-major, x fastest
};

} // namespace potentials

/// Description of a potential v(x) on [0,1]^d.
class PotentialSpec
{
public:
    using Kind = std::variant<potentials::Constant, potentials::Mathieu, potentials::MultiplicativeTwoScale,
                              potentials::Layered, potentials::AdditiveTwoScale2D, potentials::Checkerboard2D,
                              potentials::Sampled>;

    PotentialSpec() = default;
    PotentialSpec(Kind kind); // NOLINT(google-explicit-constructor)

    template <class T>
        requires std::is_constructible_v<Kind, T> && (!std::is_same_v<std::remove_cvref_t<T>, Kind>)
    PotentialSpec(T&& kind) // NOLINT(google-explicit-constructor)
        : PotentialSpec(Kind(std::forward<T>(kind)))
    {
    }

    const Kind& kind() const { return kind_; }

    /// Spatial dimension, or 0 for the dimension-free Constant kind.
    int dim() const;

    /// Finest oscillation length of the potential (1 for non-oscillatory kinds).
    double smallest_scale() const;

    std::string describe() const;

    /// Unchecked pointwise evaluation; y is ignored in 1D.
    double operator()(double x, double y = 0.0) const;

private:
    Kind kind_ = potentials::Constant{};
};

/// Pointwise value at x; x.size() must match the potential's dimension.
double evaluate(const PotentialSpec& spec, std::span<const double> x);

/// max |v| over a uniform grid of `sample_density` points per axis including
/// both endpoints. A lower estimate of the true supremum.
double sup_norm(const PotentialSpec& spec, int sample_density, int dim = 0);

struct MeshCondition
{
    double ratio = 0.0; ///< sqrt(V0) * H / eps
    bool pass = true;
    double sup_norm = 0.0;
};

/// Coarse mesh resolution check sqrt(V0) H / eps <= threshold.
MeshCondition check_mesh_condition(const PotentialSpec& spec, double H, double eps, double threshold = 1.0,
                                   int dim = 0);

/// Builds a Sampled potential from CSV rows "x,value" or "x,y,value". A
/// header line is skipped if it does not parse as numbers.
PotentialSpec load_sampled_potential(const std::string& path);

/// Catalog lookup by name ("constant", "mathieu", "multiplicative", "layered",
/// "additive2d", "checkerboard"). Unused parameters are ignored.
PotentialSpec make_potential(const std::string& name, double eps, double eps1, double eps2, double value);

} // namespace msfem

#include <doctest.h>

#include "helpers.hpp"

#include <msfem/analysis.hpp>
#include <msfem/error.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace msfem;
using std::numbers::pi;

TEST_CASE("relative errors of scaled fields")
{
    const SimplexLattice lattice(1, 64);
    const FineSystem sys = assemble(lattice, potentials::Constant{0.0}, 1.0);
    const WaveField exact = interpolate(lattice, gaussian_1d);
    const RelativeErrors same = relative_errors(exact, exact, sys.S, sys.M);
    CHECK(same.l2 == 0.0);
    CHECK(same.h1 == 0.0);
    const RelativeErrors twice = relative_errors(WaveField{2.0 * exact.values}, exact, sys.S, sys.M);
    CHECK(twice.l2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(twice.h1 == doctest::Approx(1.0).epsilon(1e-14));
    const WaveField zero{Eigen::VectorXcd::Zero(64)};
    CHECK_THROWS_AS(relative_errors(exact, zero, sys.S, sys.M), UndefinedError);
}

TEST_CASE("relative errors are invariant under a global phase")
{
    const SimplexLattice lattice(2, 16);
    const FineSystem sys = assemble(lattice, potentials::Constant{0.0}, 1.0);
    std::mt19937_64 rng(1);
    const WaveField a{testing::random_complex(lattice.num_vertices(), rng)};
    const WaveField b{testing::random_complex(lattice.num_vertices(), rng)};
    const Complex phase = std::polar(1.0, 0.9);
    const RelativeErrors plain = relative_errors(a, b, sys.S, sys.M);
    const RelativeErrors rotated = relative_errors(WaveField{phase * a.values}, WaveField{phase * b.values}, sys.S, sys.M);
    CHECK(std::abs(plain.l2 - rotated.l2) <= 1e-12);
    CHECK(std::abs(plain.h1 - rotated.h1) <= 1e-12);
}

TEST_CASE("position and energy densities of constant fields")
{
    for (int dim : {1, 2}) {
        const SimplexLattice lattice(dim, 12);
        const WaveField one{Eigen::VectorXcd::Ones(lattice.num_vertices())};
        const WaveField zero{Eigen::VectorXcd::Zero(lattice.num_vertices())};
        const PotentialSpec c(potentials::Constant{1.75});
        CHECK((position_density(one).array() - 1.0).abs().maxCoeff() == 0.0);
        CHECK((energy_density(one, c, 0.1, lattice).array() - 1.75).abs().maxCoeff() <= 1e-14);
        CHECK(position_density(zero).cwiseAbs().maxCoeff() == 0.0);
        CHECK(energy_density(zero, c, 0.1, lattice).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("energy density of a plane wave")
{
    const double eps = 0.2;
    const SimplexLattice lattice(1, 2048);
    const WaveField wave = interpolate(lattice, [](const Point& p) { return std::polar(1.0, 2 * pi * p.x); });
    const Eigen::VectorXd e = energy_density(wave, potentials::Constant{0.0}, eps, lattice);
    // (eps^2/2) |2 pi|^2, up to the P1 interpolation of the phase
    CHECK(e.mean() == doctest::Approx(eps * eps / 2 * 4 * pi * pi).epsilon(1e-5));
}

TEST_CASE("integrated position density equals the squared L2 norm")
{
    std::mt19937_64 rng(2);
    for (int dim : {1, 2}) {
        const SimplexLattice lattice(dim, 9);
        const FineSystem sys = assemble(lattice, potentials::Constant{0.0}, 1.0);
        const WaveField f{testing::random_complex(lattice.num_vertices(), rng)};
        const double norm = l2_norm(f, sys.M);
        CHECK(integrate_position_density(f, lattice) == doctest::Approx(norm * norm).epsilon(1e-10));
    }
}

TEST_CASE("convergence rates")
{
    const std::vector<ErrorSample> quarter{{0.5, 0.04, 0.2}, {0.25, 0.01, 0.1}};
    const auto table = convergence_table(quarter);
    REQUIRE(table.size() == 2);
    CHECK_FALSE(table[0].rate_l2.has_value());
    CHECK(*table[1].rate_l2 == doctest::Approx(2.0));
    CHECK(*table[1].rate_h1 == doctest::Approx(1.0));

    const std::vector<ErrorSample> flat{{0.5, 0.02, 0.02}, {0.25, 0.02, 0.02}};
    CHECK(*convergence_table(flat)[1].rate_l2 == 0.0);

    // Example 2 at eps = 1/256, rows 1/2 and 1/4: rates 2.02 and 2.01
    const std::vector<ErrorSample> table_rows{{0.5, 0.02524212, 0.62422624}, {0.25, 0.00623362, 0.15528365}};
    CHECK(*convergence_table(table_rows)[1].rate_l2 == doctest::Approx(2.02).epsilon(0.005 / 2.02));
    CHECK(*convergence_table(table_rows)[1].rate_h1 == doctest::Approx(2.01).epsilon(0.005 / 2.01));
}

TEST_CASE("geometric sequences give their exponent exactly")
{
    std::vector<ErrorSample> rows;
    for (int k = 0; k < 6; ++k) {
        const double H = std::ldexp(1.0, -k - 1);
        rows.push_back({H, 0.3 * std::pow(H, 2.5), 0.7 * std::pow(H, 1.25)});
    }
    for (const ErrorReport& r : convergence_table(rows))
        if (r.rate_l2) {
            CHECK(*r.rate_l2 == doctest::Approx(2.5).epsilon(1e-12));
            CHECK(*r.rate_h1 == doctest::Approx(1.25).epsilon(1e-12));
        }
}

TEST_CASE("non-halving sequences are rejected")
{
    const std::vector<ErrorSample> thirds{{0.5, 0.1, 0.1}, {1.0 / 3, 0.05, 0.05}};
    CHECK_THROWS_AS(convergence_table(thirds), InvalidInput);
    const std::vector<ErrorSample> negative{{0.5, -0.1, 0.1}, {0.25, 0.05, 0.05}};
    CHECK_THROWS_AS(convergence_table(negative), InvalidInput);
}

TEST_CASE("least-squares slope")
{
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{1, 3, 5, 7};
    CHECK(fitted_slope(x, y) == doctest::Approx(2.0));
    const std::vector<double> noisy{1, 3.1, 4.9, 7};
    CHECK(fitted_slope(x, noisy) == doctest::Approx(1.98));
}

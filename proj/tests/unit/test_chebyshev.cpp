#include <doctest.h>

#include "helpers.hpp"

#include <msfem/chebyshev.hpp>

#include <cmath>
#include <random>

using namespace msfem;

namespace {

ReducedSystem mathieu_system(double ratio)
{
    const double eps = 1.0 / 40;
    const PeriodicMesh mesh = build_mesh(1, eps * ratio, eps / 64);
    const FineSystem sys = assemble(mesh, potentials::Mathieu{eps}, eps);
    return reduce(sys, build_basis_localized(mesh, sys, constraint_matrix(mesh), default_l_star(mesh)));
}

} // namespace

TEST_CASE("Bessel sequence matches the standard library")
{
    for (double x : {0.0, 0.3, 1.0, 7.5, 42.0, 300.0}) {
        const Eigen::VectorXd J = bessel_j_sequence(x, 1e-16);
        REQUIRE(J.size() >= 1);
        for (Eigen::Index k = 0; k < J.size(); ++k)
            CHECK(std::abs(J[k] - std::cyl_bessel_j(static_cast<double>(k), x)) <= 1e-12);
        // the truncated tail is negligible
        CHECK(std::abs(std::cyl_bessel_j(static_cast<double>(J.size()), x)) <= 1e-15);
    }
}

TEST_CASE("Bessel sequence satisfies the Neumann sum for large arguments")
{
    const double x = 5000.0;
    const Eigen::VectorXd J = bessel_j_sequence(x, 1e-15);
    double sum = J[0];
    for (Eigen::Index k = 2; k < J.size(); k += 2)
        sum += 2 * J[k];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(J.size() > static_cast<Eigen::Index>(x));
    CHECK(J.size() < static_cast<Eigen::Index>(x + 400));
}

TEST_CASE("Chebyshev propagation matches the eigendecomposition")
{
    const ReducedSystem reduced = mathieu_system(1.0 / 4);
    const Propagator dense = decompose(reduced);
    const ChebyshevPropagator cheb(reduced);
    CHECK(cheb.bounds().lower <= dense.Lambda.minCoeff());
    CHECK(cheb.bounds().upper >= dense.Lambda.maxCoeff());

    std::mt19937_64 rng(10);
    const CoefficientState c0{testing::random_complex(reduced.size(), rng), 0.0};
    for (double t : {0.05, 0.5, 1.0}) {
        const CoefficientState a = cheb.propagate(c0, t);
        const CoefficientState b = propagate(dense, c0, t);
        CHECK(a.t == t);
        CHECK((a.c - b.c).norm() <= 1e-9 * b.c.norm());
    }
    const CoefficientState back = cheb.propagate(cheb.propagate(c0, 0.3), 0.0);
    CHECK((back.c - c0.c).norm() <= 1e-9 * c0.c.norm());
    CHECK(cheb.applications() > 0);
}

TEST_CASE("Chebyshev propagation conserves mass and energy")
{
    const ReducedSystem reduced = mathieu_system(1.0 / 2);
    const ChebyshevPropagator cheb(reduced);
    std::mt19937_64 rng(12);
    const CoefficientState c0{testing::random_complex(reduced.size(), rng), 0.0};
    const CoefficientState c1 = cheb.propagate(c0, 1.0);
    const double m0 = mass(reduced, c0);
    const double e0 = energy(reduced, c0);
    CHECK(std::abs(mass(reduced, c1) - m0) <= 1e-10 * m0);
    CHECK(std::abs(energy(reduced, c1) - e0) <= 1e-10 * (std::abs(e0) + m0));
}

TEST_CASE("evolver switches on the dense limit")
{
    const ReducedSystem reduced = mathieu_system(1.0 / 2);
    const Evolver dense(reduced, 4096);
    const Evolver sparse(reduced, 10);
    CHECK(dense.is_dense());
    CHECK_FALSE(sparse.is_dense());
    std::mt19937_64 rng(13);
    const CoefficientState c0{testing::random_complex(reduced.size(), rng), 0.0};
    const CoefficientState a = dense.propagate(c0, 0.7);
    const CoefficientState b = sparse.propagate(c0, 0.7);
    CHECK((a.c - b.c).norm() <= 1e-9 * a.c.norm());
}

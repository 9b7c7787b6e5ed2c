#include <doctest.h>

#include "helpers.hpp"

#include <msfem/error.hpp>
#include <msfem/evolution.hpp>
#include <msfem/reference.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

using namespace msfem;

namespace {

struct Setup
{
    PeriodicMesh mesh;
    FineSystem sys;
    MultiscaleBasis basis;
    ReducedSystem reduced;
};

Setup mathieu(double ratio, int level = 0)
{
    const double eps = 1.0 / 40;
    PeriodicMesh mesh = build_mesh(1, eps * ratio, eps / 64);
    FineSystem sys = assemble(mesh, potentials::Mathieu{eps}, eps);
    MultiscaleBasis basis =
        build_basis_localized(mesh, sys, constraint_matrix(mesh), level > 0 ? level : default_l_star(mesh));
    ReducedSystem reduced = reduce(sys, basis);
    return {std::move(mesh), std::move(sys), std::move(basis), std::move(reduced)};
}

CoefficientState random_state(Eigen::Index n, std::uint64_t seed, double t = 0.0)
{
    std::mt19937_64 rng(seed);
    return {testing::random_complex(n, rng), t};
}

double relative_gap(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    return (a - b).norm() / b.norm();
}

} // namespace

TEST_CASE("identity basis reproduces the fine matrices")
{
    const PeriodicMesh mesh(1, 16, 16);
    const FineSystem sys = assemble(mesh, potentials::Constant{1.0}, 0.5);
    SparseMatrix I(16, 16);
    I.setIdentity();
    const ReducedSystem red = reduce(sys, I);
    CHECK(testing::max_abs(Eigen::MatrixXd(red.M - sys.M)) <= 1e-15);
    CHECK(testing::max_abs(Eigen::MatrixXd(red.V - sys.M)) <= 1e-15);
    CHECK(testing::max_abs(Eigen::MatrixXd(red.A - sys.A)) <= 1e-15);
}

TEST_CASE("reduced matrices are symmetric")
{
    const Setup s = mathieu(1.0 / 8);
    CHECK(testing::dense_asymmetry(s.reduced.A) <= 1e-12);
    CHECK(testing::dense_asymmetry(s.reduced.M) <= 1e-12);
    CHECK(testing::dense_asymmetry(s.reduced.S) <= 1e-12);
    CHECK(testing::dense_asymmetry(s.reduced.V) <= 1e-12);
}

TEST_CASE("reduced mass is positive definite for every example")
{
    for (int id = 1; id <= 5; ++id) {
        const ExampleProblem ex = example_problem(id, id <= 3 ? 1.0 / 40 : 1.0 / 8);
        const double H = ex.eps / 2;
        const double h = ex.dim == 1 ? ex.eps / 64 : ex.eps / 8;
        const PeriodicMesh mesh = build_mesh(ex.dim, H, h);
        const FineSystem sys = assemble(mesh, ex.potential, ex.eps);
        const MultiscaleBasis basis = build_basis_localized(mesh, sys, constraint_matrix(mesh), default_l_star(mesh));
        const ReducedSystem red = reduce(sys, basis);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(red.M), Eigen::EigenvaluesOnly);
        CAPTURE(id);
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("degenerate bases are rejected")
{
    const PeriodicMesh mesh(1, 8, 8);
    const FineSystem sys = assemble(mesh, potentials::Constant{0.0}, 1.0);
    std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {0, 1, 1.0}};
    SparseMatrix Phi(8, 2);
    Phi.setFromTriplets(t.begin(), t.end());
    CHECK_THROWS_AS(reduce(sys, Phi), ReductionError);
    CHECK_THROWS_AS(reduce(sys, SparseMatrix(4, 2)), InvalidInput);
}

TEST_CASE("projection of fields in the span is exact")
{
    const Setup s = mathieu(1.0 / 4);
    const CoefficientState c0 = random_state(s.reduced.size(), 4);
    const WaveField psi = reconstruct(s.basis, c0);
    const CoefficientState back = project_initial(s.reduced, s.sys, s.basis, psi);
    CHECK(back.t == 0.0);
    CHECK(relative_gap(back.c, c0.c) <= 1e-10);
}

TEST_CASE("projection is L2 optimal")
{
    const Setup s = mathieu(1.0 / 4);
    const WaveField psi = interpolate(s.mesh, gaussian_1d);
    const CoefficientState c = project_initial(s.reduced, s.sys, s.basis, psi);
    auto distance = [&](const Eigen::VectorXcd& coeffs) {
        const WaveField diff{multiply(s.basis.Phi, coeffs) - psi.values};
        return l2_norm(diff, s.sys.M);
    };
    const double best = distance(c.c);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXcd d = c.c + 1e-3 * testing::random_complex(c.c.size(), rng);
        CHECK(distance(d) >= best);
    }
}

TEST_CASE("Gaussian projection error on the Mathieu mesh")
{
    const Setup s = mathieu(1.0 / 8);
    const WaveField psi = interpolate(s.mesh, gaussian_1d);
    const CoefficientState c = project_initial(s.reduced, s.sys, s.basis, psi);
    const WaveField diff{reconstruct(s.basis, c).values - psi.values};
    const double error = l2_norm(diff, s.sys.M) / l2_norm(psi, s.sys.M);
    MESSAGE("Gaussian projection error " << error);
    CHECK(error <= 1e-2);
}

TEST_CASE("diagonal pencil with identity mass")
{
    const Eigen::Vector4d a(3.0, -1.0, 2.0, 0.5);
    const Propagator prop = decompose(Eigen::MatrixXd(a.asDiagonal()), Eigen::MatrixXd::Identity(4, 4), 1.0);
    CHECK(prop.Lambda.isApprox(Eigen::Vector4d(-1.0, 0.5, 2.0, 3.0)));
    const Eigen::MatrixXd expected = (Eigen::MatrixXd(4, 4) << 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0).finished();
    CHECK(testing::max_abs(prop.P - expected) <= 1e-14);
}

TEST_CASE("eigenpairs of the Mathieu pencil")
{
    const Setup s = mathieu(1.0 / 8);
    const Propagator prop = decompose(s.reduced);
    const Eigen::MatrixXd A(s.reduced.A);
    const Eigen::MatrixXd M(s.reduced.M);
    CHECK(std::is_sorted(prop.Lambda.data(), prop.Lambda.data() + prop.size()));
    const double scale = A.norm();
    CHECK((A * prop.P - M * prop.P * prop.Lambda.asDiagonal()).norm() / scale <= 1e-8);
    CHECK(testing::max_abs(prop.P.transpose() * M * prop.P - Eigen::MatrixXd::Identity(prop.size(), prop.size())) <=
          1e-10);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(prop.P);
    CHECK(lu.rank() == prop.size());
}

TEST_CASE("eigenvalues agree with a nonsymmetric solver on M^-1 A")
{
    std::mt19937_64 rng(16);
    const Eigen::MatrixXd R = Eigen::MatrixXd::NullaryExpr(16, 16, [&]() {
        return std::normal_distribution<double>()(rng);
    });
    const Eigen::MatrixXd A = R + R.transpose();
    const Eigen::MatrixXd Q = Eigen::MatrixXd::NullaryExpr(16, 16, [&]() {
        return std::normal_distribution<double>()(rng);
    });
    const Eigen::MatrixXd M = Q * Q.transpose() + 16.0 * Eigen::MatrixXd::Identity(16, 16);
    const Propagator prop = decompose(A, M, 1.0);

    Eigen::EigenSolver<Eigen::MatrixXd> general(M.inverse() * A, false);
    std::vector<double> values;
    for (const auto& z : general.eigenvalues()) {
        CHECK(std::abs(z.imag()) <= 1e-8);
        values.push_back(z.real());
    }
    std::sort(values.begin(), values.end());
    for (int k = 0; k < 16; ++k)
        CHECK(std::abs(prop.Lambda[k] - values[static_cast<std::size_t>(k)]) <= 1e-6);
}

TEST_CASE("indefinite mass fails to decompose")
{
    const Eigen::MatrixXd M = Eigen::Vector2d(1.0, -1.0).asDiagonal();
    CHECK_THROWS_AS(decompose(Eigen::MatrixXd::Identity(2, 2), M, 1.0), DecompositionError);
}

TEST_CASE("propagation identities")
{
    const Setup s = mathieu(1.0 / 4);
    const Propagator prop = decompose(s.reduced);
    const CoefficientState c0 = random_state(s.reduced.size(), 21, 0.2);

    SUBCASE("zero elapsed time")
    {
        CHECK(relative_gap(propagate(prop, c0, 0.2).c, c0.c) <= 1e-13);
    }
    SUBCASE("semigroup")
    {
        const CoefficientState mid = propagate(prop, c0, 0.5);
        const CoefficientState two_step = propagate(prop, mid, 1.0);
        const CoefficientState direct = propagate(prop, c0, 1.0);
        CHECK(two_step.t == 1.0);
        CHECK(relative_gap(two_step.c, direct.c) <= 1e-12);
    }
    SUBCASE("time reversal")
    {
        const CoefficientState forward = propagate(prop, c0, 1.2);
        CHECK(relative_gap(propagate(prop, forward, 0.2).c, c0.c) <= 1e-11);
    }
    SUBCASE("conservation")
    {
        const double m0 = mass(s.reduced, c0);
        const double e0 = energy(s.reduced, c0);
        for (double t : {0.3, 0.7, 1.0, 5.0}) {
            const CoefficientState ct = propagate(prop, c0, t);
            CHECK(std::abs(mass(s.reduced, ct) - m0) <= 1e-11 * m0);
            CHECK(std::abs(energy(s.reduced, ct) - e0) <= 1e-11 * (std::abs(e0) + m0));
        }
    }
    SUBCASE("M-unitarity of the propagation matrix")
    {
        const Eigen::MatrixXcd U = propagation_matrix(prop, 0.37);
        const Eigen::MatrixXcd M = Eigen::MatrixXd(s.reduced.M).cast<Complex>();
        CHECK((U.adjoint() * M * U - M).cwiseAbs().maxCoeff() <= 1e-10 * M.cwiseAbs().maxCoeff());
        const Eigen::VectorXcd direct = propagate(prop, c0, 0.57).c;
        CHECK(relative_gap(U * c0.c, direct) <= 1e-10);
    }
}

TEST_CASE("pure gauge pencil is a global phase")
{
    const double omega = 2.5;
    const double eps = 0.1;
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd Q = Eigen::MatrixXd::NullaryExpr(6, 6, [&]() {
        return std::normal_distribution<double>()(rng);
    });
    const Eigen::MatrixXd M = Q * Q.transpose() + Eigen::MatrixXd::Identity(6, 6);
    const Propagator prop = decompose(omega * M, M, eps);
    const CoefficientState c0 = random_state(6, 2);
    const CoefficientState ct = propagate(prop, c0, 0.8);
    CHECK(relative_gap(ct.c, std::polar(1.0, -omega * 0.8 / eps) * c0.c) <= 1e-12);
}

TEST_CASE("mass and energy of the zero state")
{
    const Setup s = mathieu(1.0 / 2);
    const CoefficientState zero{Eigen::VectorXcd::Zero(s.reduced.size()), 0.0};
    CHECK(mass(s.reduced, zero) == 0.0);
    CHECK(energy(s.reduced, zero) == 0.0);
    CHECK_THROWS_AS(mass(s.reduced, CoefficientState{Eigen::VectorXcd::Zero(3), 0.0}), InvalidInput);
}

TEST_CASE("reconstruction")
{
    const Setup s = mathieu(1.0 / 4);
    const Eigen::Index n = s.reduced.size();
    CoefficientState unit{Eigen::VectorXcd::Zero(n), 0.0};
    unit.c[7] = 1.0;
    const WaveField column = reconstruct(s.basis, unit);
    CHECK((column.values.real() - Eigen::VectorXd(s.basis.Phi.col(7))).cwiseAbs().maxCoeff() == 0.0);

    const CoefficientState c = random_state(n, 6);
    const CoefficientState scaled{Complex(2.0, -1.0) * c.c, 0.0};
    CHECK(relative_gap(reconstruct(s.basis, scaled).values, Complex(2.0, -1.0) * reconstruct(s.basis, c).values) <=
          1e-14);
    const double norm = l2_norm(reconstruct(s.basis, c), s.sys.M);
    CHECK(norm * norm == doctest::Approx(mass(s.reduced, c)).epsilon(1e-12));
}

TEST_CASE("gauge shift check")
{
    const Setup s = mathieu(1.0 / 8);
    const Propagator prop = decompose(s.reduced);
    const CoefficientState c0 = project_initial(s.reduced, s.sys, s.basis, interpolate(s.mesh, gaussian_1d));
    CHECK(gauge_shift_check(s.reduced, c0, 0.0, 1.0) <= 1e-12 * c0.c.norm());
    CHECK(gauge_shift_check(s.reduced, c0, 1.0, 0.0) <= 1e-12 * c0.c.norm());
    const double scale = propagate(prop, c0, 1.0).c.norm();
    CHECK(gauge_shift_check(s.reduced, c0, 1.0, 1.0) <= 1e-10 * scale);

    // modulus invariance
    ReducedSystem shifted = s.reduced;
    shifted.A += 3.0 * s.reduced.M;
    const Eigen::VectorXcd a = propagate(prop, c0, 0.4).c;
    const Eigen::VectorXcd b = propagate(decompose(shifted), c0, 0.4).c;
    CHECK((a.cwiseAbs() - b.cwiseAbs()).cwiseAbs().maxCoeff() <= 1e-10 * a.norm());
}

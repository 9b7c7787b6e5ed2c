#include "msfem/evolution.hpp"

#include "msfem/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <lapacke.h>

#include <cmath>
#include <sstream>
#include <vector>

namespace msfem {

namespace {

// Phi^T X_m Phi for several fine matrices sharing one pass over Phi. Only
// the lower triangle is accumulated and then mirrored, so the products are
// exactly symmetric.
std::vector<SparseMatrix> galerkin_products(const SparseMatrix& Phi, const std::vector<const SparseMatrix*>& X)
{
    const Eigen::Index nf = Phi.rows();
    const Eigen::Index nx = Phi.cols();
    const std::size_t count = X.size();

    // Global bases fill Phi; dense BLAS products are then far faster.
    const double fill = static_cast<double>(Phi.nonZeros()) / (static_cast<double>(nf) * static_cast<double>(nx));
    if (fill > 0.25) {
        const Eigen::MatrixXd P(Phi);
        std::vector<SparseMatrix> out;
        for (const SparseMatrix* x : X) {
            const Eigen::MatrixXd right = *x * P;
            Eigen::MatrixXd product = P.transpose() * right;
            product = 0.5 * (product + product.transpose()).eval();
            out.push_back(product.sparseView());
            out.back().makeCompressed();
        }
        return out;
    }

    const SparseMatrix PhiT = Phi.transpose();
    std::vector<Eigen::VectorXd> fine_acc(count, Eigen::VectorXd::Zero(nf));
    std::vector<Eigen::VectorXd> coarse_acc(count, Eigen::VectorXd::Zero(nx));
    std::vector<char> fine_seen(static_cast<std::size_t>(nf), 0);
    std::vector<char> coarse_seen(static_cast<std::size_t>(nx), 0);
    std::vector<Eigen::Index> fine_rows;
    std::vector<Eigen::Index> coarse_rows;
    std::vector<std::vector<Eigen::Triplet<double>>> lower(count);

    for (Eigen::Index j = 0; j < nx; ++j) {
        fine_rows.clear();
        for (SparseMatrix::InnerIterator p(Phi, j); p; ++p)
            for (std::size_t m = 0; m < count; ++m)
                for (SparseMatrix::InnerIterator x(*X[m], p.index()); x; ++x) {
                    if (!fine_seen[static_cast<std::size_t>(x.index())]) {
                        fine_seen[static_cast<std::size_t>(x.index())] = 1;
                        fine_rows.push_back(x.index());
                    }
                    fine_acc[m][x.index()] += x.value() * p.value();
                }

        coarse_rows.clear();
        for (const Eigen::Index r : fine_rows) {
            for (SparseMatrix::InnerIterator q(PhiT, r); q; ++q) {
                const Eigen::Index i = q.index();
                if (i < j)
                    continue;
                if (!coarse_seen[static_cast<std::size_t>(i)]) {
                    coarse_seen[static_cast<std::size_t>(i)] = 1;
                    coarse_rows.push_back(i);
                }
                for (std::size_t m = 0; m < count; ++m)
                    coarse_acc[m][i] += q.value() * fine_acc[m][r];
            }
            fine_seen[static_cast<std::size_t>(r)] = 0;
            for (std::size_t m = 0; m < count; ++m)
                fine_acc[m][r] = 0.0;
        }

        for (const Eigen::Index i : coarse_rows) {
            for (std::size_t m = 0; m < count; ++m) {
                lower[m].emplace_back(i, j, coarse_acc[m][i]);
                if (i != j)
                    lower[m].emplace_back(j, i, coarse_acc[m][i]);
                coarse_acc[m][i] = 0.0;
            }
            coarse_seen[static_cast<std::size_t>(i)] = 0;
        }
    }

    std::vector<SparseMatrix> out(count, SparseMatrix(nx, nx));
    for (std::size_t m = 0; m < count; ++m) {
        out[m].setFromTriplets(lower[m].begin(), lower[m].end());
        out[m].makeCompressed();
    }
    return out;
}

void require_positive_definite(const SparseMatrix& M)
{
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(M);
    const bool factored = ldlt.info() == Eigen::Success;
    const double smallest_pivot = factored ? ldlt.vectorD().minCoeff() : 0.0;
    if (factored && smallest_pivot > 0.0)
        return;

    std::ostringstream msg;
    msg << "reduced mass matrix is not positive definite";
    if (M.rows() <= 2000) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(M), Eigen::EigenvaluesOnly);
        msg << " (smallest eigenvalue " << eig.eigenvalues()[0] << ")";
    } else {
        msg << " (smallest LDL^T pivot " << smallest_pivot << ")";
    }
    throw ReductionError(msg.str());
}

void normalize_signs(Eigen::MatrixXd& P)
{
    for (Eigen::Index k = 0; k < P.cols(); ++k) {
        const double largest = P.col(k).cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < P.rows(); ++r) {
            if (std::abs(P(r, k)) > 1e-8 * largest) {
                if (P(r, k) < 0.0)
                    P.col(k) *= -1.0;
                break;
            }
        }
    }
}

} // namespace

ReducedSystem reduce(const FineSystem& system, const SparseMatrix& Phi)
{
    if (Phi.rows() != system.M.rows())
        throw InvalidInput("reduce: basis rows do not match the fine system");
    ReducedSystem reduced;
    reduced.eps = system.eps;
    auto products = galerkin_products(Phi, {&system.M, &system.S, &system.V});
    reduced.M = std::move(products[0]);
    reduced.S = std::move(products[1]);
    reduced.V = std::move(products[2]);
    reduced.A = (0.5 * system.eps * system.eps) * reduced.S + reduced.V;
    require_positive_definite(reduced.M);
    return reduced;
}

ReducedSystem reduce(const FineSystem& system, const MultiscaleBasis& basis)
{
    return reduce(system, basis.Phi);
}

CoefficientState project_initial(const ReducedSystem& reduced, const FineSystem& system,
                                 const MultiscaleBasis& basis, const WaveField& psi_in)
{
    if (psi_in.size() != basis.Phi.rows())
        throw InvalidInput("project_initial: initial field does not match the fine mesh");
    const Eigen::VectorXcd load = multiply(basis.Phi.transpose(), multiply(system.M, psi_in.values));

    Eigen::SimplicialLDLT<SparseMatrix> ldlt(reduced.M);
    if (ldlt.info() != Eigen::Success)
        throw ReductionError("project_initial: reduced mass matrix could not be factorized");
    CoefficientState state;
    state.c.resize(load.size());
    state.c.real() = ldlt.solve(Eigen::VectorXd(load.real()));
    state.c.imag() = ldlt.solve(Eigen::VectorXd(load.imag()));
    state.t = 0.0;
    return state;
}

CoefficientState project_initial(const FineSystem& system, const MultiscaleBasis& basis, const WaveField& psi_in)
{
    return project_initial(reduce(system, basis), system, basis, psi_in);
}

Propagator decompose(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M, double eps)
{
    const Eigen::Index n = A.rows();
    if (A.cols() != n || M.rows() != n || M.cols() != n)
        throw InvalidInput("decompose: A and M must be square and of equal size");

    Propagator prop;
    prop.eps = eps;
    prop.P = A;
    Eigen::MatrixXd B = M;
    prop.Lambda.resize(n);
    const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', static_cast<lapack_int>(n),
                                           prop.P.data(), static_cast<lapack_int>(n), B.data(),
                                           static_cast<lapack_int>(n), prop.Lambda.data());
    if (info != 0) {
        std::ostringstream msg;
        if (info > n)
            msg << "mass matrix is not positive definite (leading minor " << info - n << ")";
        else if (info > 0)
            msg << "generalized eigensolver did not converge (" << info << " off-diagonal elements)";
        else
            msg << "generalized eigensolver rejected argument " << -info;
        throw DecompositionError(msg.str());
    }
    normalize_signs(prop.P);
    prop.M = M.sparseView();
    return prop;
}

Propagator decompose(const ReducedSystem& reduced)
{
    Propagator prop = decompose(Eigen::MatrixXd(reduced.A), Eigen::MatrixXd(reduced.M), reduced.eps);
    prop.M = reduced.M;
    return prop;
}

CoefficientState propagate(const Propagator& prop, const CoefficientState& state0, double t)
{
    if (state0.c.size() != prop.size())
        throw InvalidInput("propagate: state size does not match the propagator");
    const double dt = t - state0.t;
    const Eigen::VectorXcd mc = multiply(prop.M, state0.c);
    Eigen::VectorXcd modal(prop.size());
    modal.real() = prop.P.transpose() * mc.real();
    modal.imag() = prop.P.transpose() * mc.imag();
    for (Eigen::Index k = 0; k < prop.size(); ++k)
        modal[k] *= std::polar(1.0, -prop.Lambda[k] * dt / prop.eps);

    CoefficientState out;
    out.t = t;
    out.c.resize(prop.size());
    out.c.real() = prop.P * modal.real();
    out.c.imag() = prop.P * modal.imag();
    return out;
}

Eigen::MatrixXcd propagation_matrix(const Propagator& prop, double dt)
{
    Eigen::VectorXcd phase(prop.size());
    for (Eigen::Index k = 0; k < prop.size(); ++k)
        phase[k] = std::polar(1.0, -prop.Lambda[k] * dt / prop.eps);
    const Eigen::MatrixXd PtM = (prop.M.transpose() * prop.P).transpose();
    return prop.P.cast<Complex>() * phase.asDiagonal() * PtM.cast<Complex>();
}

double mass(const ReducedSystem& reduced, const CoefficientState& state)
{
    if (state.c.size() != reduced.size())
        throw InvalidInput("mass: state size does not match the reduced system");
    return hermitian_form(reduced.M, state.c);
}

double energy(const ReducedSystem& reduced, const CoefficientState& state)
{
    if (state.c.size() != reduced.size())
        throw InvalidInput("energy: state size does not match the reduced system");
    return 0.5 * hermitian_form(reduced.A, state.c);
}

WaveField reconstruct(const MultiscaleBasis& basis, const CoefficientState& state)
{
    if (state.c.size() != basis.Phi.cols())
        throw InvalidInput("reconstruct: state size does not match the basis");
    return WaveField{multiply(basis.Phi, state.c)};
}

double gauge_shift_check(const ReducedSystem& reduced, const CoefficientState& state0, double omega, double t)
{
    ReducedSystem shifted = reduced;
    shifted.A = reduced.A + omega * reduced.M;
    const CoefficientState plain = propagate(decompose(reduced), state0, t);
    const CoefficientState gauged = propagate(decompose(shifted), state0, t);
    const Complex phase = std::polar(1.0, -omega * (t - state0.t) / reduced.eps);
    return (gauged.c - phase * plain.c).cwiseAbs().maxCoeff();
}

} // namespace msfem

#pragma once

#include "msfem/fem.hpp"
#include "msfem/msbasis.hpp"

#include <Eigen/Dense>

namespace msfem {

/// Galerkin matrices of the multiscale basis. Stored sparse: a localized
/// basis gives banded triple products, a global one simply fills them in.
struct ReducedSystem
{
    SparseMatrix M; ///< Phi^T M_h Phi
    SparseMatrix S; ///< Phi^T S_h Phi
    SparseMatrix V; ///< Phi^T V_h Phi
    SparseMatrix A; ///< (eps^2 / 2) S + V
    double eps = 1.0;

    Eigen::Index size() const { return M.rows(); }
};

/// Coefficient vector c(t) of psi(t) = sum_i c_i(t) phi_i.
struct CoefficientState
{
    Eigen::VectorXcd c;
    double t = 0.0;
};

/// Throws ReductionError when M is not positive definite.
ReducedSystem reduce(const FineSystem& system, const MultiscaleBasis& basis);
ReducedSystem reduce(const FineSystem& system, const SparseMatrix& Phi);

/// Solves M c = Phi^T M_h psi_in.
CoefficientState project_initial(const ReducedSystem& reduced, const FineSystem& system,
                                 const MultiscaleBasis& basis, const WaveField& psi_in);
CoefficientState project_initial(const FineSystem& system, const MultiscaleBasis& basis, const WaveField& psi_in);

/// Solution of the generalized symmetric-definite eigenproblem A P = M P diag(Lambda)
/// with P^T M P = I, eigenvalues ascending, each column's first significant
/// entry positive.
struct Propagator
{
    Eigen::VectorXd Lambda;
    Eigen::MatrixXd P;
    SparseMatrix M;
    double eps = 1.0;

    Eigen::Index size() const { return Lambda.size(); }
};

Propagator decompose(const ReducedSystem& reduced);

/// Dense variant used by tests on hand-built pencils.
Propagator decompose(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M, double eps);

/// c(t) = P exp(Lambda (t - t0) / (i eps)) P^T M c(t0). Exact in time; t may
/// lie before t0.
CoefficientState propagate(const Propagator& prop, const CoefficientState& state0, double t);

/// Dense propagation matrix U(dt) = P exp(Lambda dt / (i eps)) P^T M.
Eigen::MatrixXcd propagation_matrix(const Propagator& prop, double dt);

/// c^* M c
double mass(const ReducedSystem& reduced, const CoefficientState& state);
/// (1/2) c^* A c
double energy(const ReducedSystem& reduced, const CoefficientState& state);

/// Phi c on the fine vertices.
WaveField reconstruct(const MultiscaleBasis& basis, const CoefficientState& state);

/// Propagates with A and with A + omega M on the same basis and returns
/// max_i |c'_i(t) - exp(-i omega t / eps) c_i(t)|.
double gauge_shift_check(const ReducedSystem& reduced, const CoefficientState& state0, double omega, double t);

} // namespace msfem

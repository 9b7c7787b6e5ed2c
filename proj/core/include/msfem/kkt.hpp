#pragma once

#include "msfem/fem.hpp"

#include <memory>
#include <vector>

namespace msfem {

/// Assembles the symmetric indefinite saddle-point matrix [[A, C^T], [C, 0]].
SparseMatrix kkt_matrix(const SparseMatrix& A, const SparseMatrix& C);

/// Sparse direct solver for KKT systems. The symbolic analysis is kept and
/// reused as long as consecutive matrices share one sparsity pattern.
class SaddlePointSolver
{
public:
    SaddlePointSolver();
    ~SaddlePointSolver();
    SaddlePointSolver(SaddlePointSolver&&) noexcept;
    SaddlePointSolver& operator=(SaddlePointSolver&&) noexcept;

    /// Throws IllPosedBasis when the factorization hits a zero pivot.
    void factorize(const SparseMatrix& A, const SparseMatrix& C);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

    Eigen::Index primal_size() const { return primal_; }
    Eigen::Index dual_size() const { return dual_; }

    /// Number of factorizations that reused a cached symbolic analysis.
    std::size_t pattern_reuses() const { return reuses_; }

private:
    struct Factor;
    std::unique_ptr<Factor> lu_;
    std::vector<int> outer_;
    std::vector<int> inner_;
    bool analyzed_ = false;
    std::size_t reuses_ = 0;
    Eigen::Index primal_ = 0;
    Eigen::Index dual_ = 0;
};

} // namespace msfem

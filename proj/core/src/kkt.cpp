#include "msfem/kkt.hpp"

#include "msfem/error.hpp"

#include <Eigen/UmfPackSupport>

#include <algorithm>
#include <span>
#include <sstream>

namespace msfem {

SparseMatrix kkt_matrix(const SparseMatrix& A, const SparseMatrix& C)
{
    if (A.rows() != A.cols() || C.cols() != A.cols())
        throw InvalidInput("kkt_matrix: incompatible blocks");
    const Eigen::Index n = A.rows();
    const Eigen::Index m = C.rows();

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * C.nonZeros()));
    for (Eigen::Index k = 0; k < A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
            entries.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index k = 0; k < C.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(C, k); it; ++it) {
            entries.emplace_back(n + it.row(), it.col(), it.value());
            entries.emplace_back(it.col(), n + it.row(), it.value());
        }
    SparseMatrix K(n + m, n + m);
    K.setFromTriplets(entries.begin(), entries.end());
    K.makeCompressed();
    return K;
}

struct SaddlePointSolver::Factor
{
    SparseMatrix K; // UmfPackLU solves read the factored matrix's arrays
    Eigen::UmfPackLU<SparseMatrix> lu;
};

SaddlePointSolver::SaddlePointSolver() : lu_(std::make_unique<Factor>()) {}
SaddlePointSolver::~SaddlePointSolver() = default;
SaddlePointSolver::SaddlePointSolver(SaddlePointSolver&&) noexcept = default;
SaddlePointSolver& SaddlePointSolver::operator=(SaddlePointSolver&&) noexcept = default;

void SaddlePointSolver::factorize(const SparseMatrix& A, const SparseMatrix& C)
{
    lu_->K = kkt_matrix(A, C);
    const SparseMatrix& K = lu_->K;
    primal_ = A.rows();
    dual_ = C.rows();

    const std::span<const int> outer(K.outerIndexPtr(), static_cast<std::size_t>(K.outerSize() + 1));
    const std::span<const int> inner(K.innerIndexPtr(), static_cast<std::size_t>(K.nonZeros()));
    const bool same = analyzed_ && std::equal(outer.begin(), outer.end(), outer_.begin(), outer_.end()) &&
                      std::equal(inner.begin(), inner.end(), inner_.begin(), inner_.end());
    if (same) {
        ++reuses_;
    } else {
        lu_->lu.analyzePattern(K);
        outer_.assign(outer.begin(), outer.end());
        inner_.assign(inner.begin(), inner.end());
        analyzed_ = true;
    }
    lu_->lu.factorize(K);
    if (lu_->lu.info() != Eigen::Success) {
        analyzed_ = false;
        std::ostringstream msg;
        msg << "KKT factorization failed (singular saddle-point matrix); the constrained energy minimisation admits a unique solution only when the potential is "
               "bounded below and the fine mesh is fine enough";
        throw IllPosedBasis(msg.str());
    }
}

Eigen::VectorXd SaddlePointSolver::solve(const Eigen::VectorXd& rhs) const
{
    Eigen::VectorXd x = lu_->lu.solve(rhs);
    if (!x.allFinite())
        throw IllPosedBasis("KKT solve produced non-finite values; the saddle-point matrix is singular");
    return x;
}

Eigen::MatrixXd SaddlePointSolver::solve(const Eigen::MatrixXd& rhs) const
{
    Eigen::MatrixXd x = lu_->lu.solve(rhs);
    if (!x.allFinite())
        throw IllPosedBasis("KKT solve produced non-finite values; the saddle-point matrix is singular");
    return x;
}

} // namespace msfem

#include "msfem/chebyshev.hpp"

#include "msfem/error.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace msfem {

struct ChebyshevPropagator::MassSolver
{
    Eigen::CholmodSupernodalLLT<SparseMatrix> llt;
};

ChebyshevPropagator::ChebyshevPropagator(const ReducedSystem& reduced, ChebyshevOptions options)
    : reduced_(&reduced), options_(options), mass_(std::make_unique<MassSolver>())
{
    if (options_.lanczos_steps < 2)
        throw InvalidInput("ChebyshevPropagator: need at least two Lanczos steps");
    mass_->llt.compute(reduced.M);
    if (mass_->llt.info() != Eigen::Success)
        throw ReductionError("ChebyshevPropagator: reduced mass matrix is not positive definite");
    bounds_ = estimate_bounds();
}

ChebyshevPropagator::~ChebyshevPropagator() = default;
ChebyshevPropagator::ChebyshevPropagator(ChebyshevPropagator&&) noexcept = default;
ChebyshevPropagator& ChebyshevPropagator::operator=(ChebyshevPropagator&&) noexcept = default;

Eigen::MatrixXd ChebyshevPropagator::apply(const Eigen::MatrixXd& X) const
{
    ++applications_;
    const Eigen::MatrixXd AX = reduced_->A * X;
    return mass_->llt.solve(AX);
}

SpectralBounds ChebyshevPropagator::estimate_bounds() const
{
    const SparseMatrix& M = reduced_->M;
    const Eigen::Index n = M.rows();
    const int steps = static_cast<int>(std::min<Eigen::Index>(options_.lanczos_steps, n));

    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = normal(rng);
    v /= std::sqrt(v.dot(M * v));

    Eigen::MatrixXd Q(n, steps);
    std::vector<double> alpha;
    std::vector<double> beta;
    Q.col(0) = v;
    for (int j = 0; j < steps; ++j) {
        Eigen::VectorXd w = apply(Q.col(j));
        alpha.push_back(Q.col(j).dot(reduced_->A * Q.col(j)));
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd Mw = M * w;
            w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * Mw);
        }
        const double b = std::sqrt(std::max(0.0, w.dot(M * w)));
        beta.push_back(b);
        if (j + 1 == steps || b <= 1e-13 * std::abs(alpha.back()))
            break;
        Q.col(j + 1) = w / b;
    }

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        T(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m)
            T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
    // Ritz residuals beta_m |s_m| widen each end before the relative margin.
    const double last_beta = beta.back();
    const double low_residual = last_beta * std::abs(eig.eigenvectors()(m - 1, 0));
    const double high_residual = last_beta * std::abs(eig.eigenvectors()(m - 1, m - 1));
    double lower = eig.eigenvalues()[0] - low_residual;
    double upper = eig.eigenvalues()[m - 1] + high_residual;
    const double width = std::max(upper - lower, 1e-12 * std::max(1.0, std::abs(upper)));
    lower -= options_.margin * width;
    upper += options_.margin * width;
    return {lower, upper};
}

Eigen::VectorXd bessel_j_sequence(double x, double tolerance)
{
    if (x < 0.0)
        throw InvalidInput("bessel_j_sequence: argument must be nonnegative");
    if (x == 0.0)
        return Eigen::VectorXd::Ones(1);

    const auto start = static_cast<Eigen::Index>(std::ceil(x + 20.0 * std::cbrt(x) + 40.0));
    Eigen::VectorXd J(start + 1);
    double next = 0.0;
    double current = 1e-300;
    for (Eigen::Index k = start; k >= 0; --k) {
        J[k] = current;
        const double previous = 2.0 * static_cast<double>(k) / x * current - next;
        next = current;
        current = previous;
        if (std::abs(current) > 1e250) {
            J.segment(k, start - k + 1) *= 1e-250;
            next *= 1e-250;
            current *= 1e-250;
        }
    }
    // J_0 + 2 (J_2 + J_4 + ...) = 1.
    double sum = J[0];
    for (Eigen::Index k = 2; k <= start; k += 2)
        sum += 2.0 * J[k];
    J /= sum;

    Eigen::Index last = start;
    while (last > 0 && std::abs(J[last]) < tolerance)
        --last;
    return J.head(last + 1);
}

CoefficientState ChebyshevPropagator::propagate(const CoefficientState& state0, double t) const
{
    const SparseMatrix& M = reduced_->M;
    if (state0.c.size() != M.rows())
        throw InvalidInput("propagate: state size does not match the reduced system");
    const double tau = t - state0.t;
    if (tau == 0.0 || state0.c.isZero(0.0))
        return CoefficientState{state0.c, t};

    const double mass0 = hermitian_form(M, state0.c);
    SpectralBounds bounds = bounds_;
    for (int attempt = 0; attempt < 4; ++attempt) {
        const double center = 0.5 * (bounds.upper + bounds.lower);
        const double half_width = 0.5 * (bounds.upper - bounds.lower);
        const double eps = reduced_->eps;
        const Eigen::VectorXd J = bessel_j_sequence(std::abs(tau) * half_width / eps, options_.tolerance);

        // exp(-i tau x / eps) = exp(-i tau c / eps) sum_k (2 - delta_k0) (-i s)^k J_k(|tau| w / eps) T_k(y)
        // with x = c + w y and s = sign(tau). The recurrence runs on [Re, Im] columns.
        const Complex rotation = tau > 0.0 ? Complex(0.0, -1.0) : Complex(0.0, 1.0);
        auto scaled = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd { return (apply(X) - center * X) / half_width; };
        auto as_complex = [](const Eigen::MatrixXd& X) -> Eigen::VectorXcd {
            return X.col(0).cast<Complex>() + Complex(0.0, 1.0) * X.col(1).cast<Complex>();
        };
        Eigen::MatrixXd previous(M.rows(), 2);
        previous.col(0) = state0.c.real();
        previous.col(1) = state0.c.imag();
        Eigen::VectorXcd sum = J[0] * state0.c;
        Eigen::MatrixXd current;
        Complex weight(1.0, 0.0);
        for (Eigen::Index k = 1; k < J.size(); ++k) {
            Eigen::MatrixXd next = k == 1 ? scaled(previous) : Eigen::MatrixXd(2.0 * scaled(current) - previous);
            if (k > 1)
                previous = std::move(current);
            current = std::move(next);
            weight *= rotation;
            sum += (2.0 * J[k] * weight) * as_complex(current);
        }
        sum *= std::polar(1.0, -tau * center / eps);

        const double drift = std::abs(hermitian_form(M, sum) - mass0) / mass0;
        if (drift <= 1e-9)
            return CoefficientState{sum, t};
        // A spectral component escaped the interval and grew; widen and retry.
        bounds.lower = center - 1.5 * half_width;
        bounds.upper = center + 1.5 * half_width;
    }
    throw DecompositionError("Chebyshev propagation did not conserve mass; the spectral bound estimate failed");
}

Evolver::Evolver(const ReducedSystem& reduced, Eigen::Index dense_limit)
{
    if (reduced.size() <= dense_limit)
        dense_ = decompose(reduced);
    else
        chebyshev_.emplace(reduced);
}

CoefficientState Evolver::propagate(const CoefficientState& state0, double t) const
{
    return dense_ ? msfem::propagate(*dense_, state0, t) : chebyshev_->propagate(state0, t);
}

} // namespace msfem

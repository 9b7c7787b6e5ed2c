#pragma once

#include "msfem/evolution.hpp"

#include <memory>
#include <optional>

namespace msfem {

/// Interval containing the spectrum of M^{-1} A.
struct SpectralBounds
{
    double lower = 0.0;
    double upper = 0.0;
};

struct ChebyshevOptions
{
    int lanczos_steps = 80;  ///< for the spectral bound estimate
    double margin = 0.05;    ///< relative widening of the estimated interval
    double tolerance = 1e-13; ///< Bessel coefficients below this end the series
};

/// exp(-i t M^{-1} A / eps) applied through a Chebyshev expansion on an
/// interval enclosing the spectrum. The cost is one mass solve per degree,
/// and the degree grows like |t| (upper - lower) / (2 eps). Holds a reference
/// to `reduced`, which must outlive the propagator.
class ChebyshevPropagator
{
public:
    explicit ChebyshevPropagator(const ReducedSystem& reduced, ChebyshevOptions options = {});
    ~ChebyshevPropagator();
    ChebyshevPropagator(ChebyshevPropagator&&) noexcept;
    ChebyshevPropagator& operator=(ChebyshevPropagator&&) noexcept;

    CoefficientState propagate(const CoefficientState& state0, double t) const;

    const SpectralBounds& bounds() const { return bounds_; }

    /// Mass solves performed so far, including the bound estimate.
    long applications() const { return applications_; }

private:
    struct MassSolver;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const; // M^{-1} A X
    SpectralBounds estimate_bounds() const;

    const ReducedSystem* reduced_;
    ChebyshevOptions options_;
    std::unique_ptr<MassSolver> mass_;
    SpectralBounds bounds_;
    mutable long applications_ = 0;
};

/// Values J_0(x), ..., J_n(x) for x >= 0, computed by Miller's backward
/// recurrence. Trailing entries below `tolerance` are dropped.
Eigen::VectorXd bessel_j_sequence(double x, double tolerance);

/// Dense one-shot eigendecomposition up to `dense_limit` coarse unknowns,
/// Chebyshev propagation beyond.
class Evolver
{
public:
    Evolver(const ReducedSystem& reduced, Eigen::Index dense_limit = 4096);

    CoefficientState propagate(const CoefficientState& state0, double t) const;

    bool is_dense() const { return dense_.has_value(); }
    const Propagator& dense() const { return *dense_; }

private:
    std::optional<Propagator> dense_;
    std::optional<ChebyshevPropagator> chebyshev_;
};

} // namespace msfem

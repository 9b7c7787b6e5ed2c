#pragma once

#include <msfem/fem.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace testing {

inline double max_abs(const Eigen::MatrixXd& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double dense_asymmetry(const msfem::SparseMatrix& K)
{
    const Eigen::MatrixXd D(K);
    return max_abs(D - D.transpose()) / std::max(max_abs(D), 1e-300);
}

inline Eigen::VectorXcd random_complex(Eigen::Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = {g(rng), g(rng)};
    return v;
}

inline Eigen::VectorXd random_real(Eigen::Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = g(rng);
    return v;
}

} // namespace testing

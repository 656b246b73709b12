#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace rsft::test {

inline std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    std::vector<double> x(n);
    for (auto& v : x) v = normal(gen);
    return x;
}

/// Independent draws from N(0, cov) through the Cholesky factor.
inline std::vector<std::vector<double>> gaussian_samples(const Eigen::MatrixXd& cov,
                                                         std::size_t count, std::uint64_t seed) {
    const Eigen::MatrixXd l = cov.llt().matrixL();
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    const auto n = cov.rows();
    std::vector<std::vector<double>> out(count, std::vector<double>(n));
    Eigen::VectorXd z(n);
    for (auto& phi : out) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(gen);
        const Eigen::VectorXd x = l * z;
        for (Eigen::Index i = 0; i < n; ++i) phi[i] = x(i);
    }
    return out;
}

/// Dense inverse of beta * Hessian of the matter action, computed numerically.
inline Eigen::MatrixXd inverse_hessian(bool collective, std::size_t n, double beta) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    if (collective) h.array() += 1.0;
    return (beta * h).inverse();
}

} // namespace rsft::test

#pragma once

#include <Eigen/Core>
#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <wvap/operators.hpp>
#include <wvap/statevector.hpp>

namespace testutil {

inline wvap::Statevector random_state(int num_qubits, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<wvap::Complex> amps(std::size_t{1} << num_qubits);
    for (auto& a : amps) a = wvap::Complex(gauss(rng), gauss(rng));
    wvap::Statevector s = wvap::make_state(num_qubits, std::move(amps));
    const double scale = 1.0 / std::sqrt(wvap::squared_norm(s));
    for (auto& a : s.amps) a *= scale;
    return s;
}

inline wvap::Matrix random_matrix(std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    wvap::Matrix m(dim);
    for (auto& v : m.a) v = wvap::Complex(gauss(rng), gauss(rng));
    return m;
}

inline wvap::Matrix random_hermitian(std::size_t dim, std::uint64_t seed) {
    const wvap::Matrix m = random_matrix(dim, seed);
    wvap::Matrix h(dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return h;
}

inline wvap::Matrix random_unitary(std::size_t dim, std::uint64_t seed) {
    const wvap::Matrix m = random_matrix(dim, seed);
    Eigen::MatrixXcd em(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) em(i, j) = m(i, j);
    const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(em).householderQ();
    wvap::Matrix u(dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) u(i, j) = q(i, j);
    return u;
}

} // namespace testutil

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wvap/errors.hpp"

namespace wvap {

using Complex = std::complex<double>;

// States accepted or produced as "normalized" must satisfy |<s|s> - 1| <= kNormTol.
inline constexpr double kNormTol = 1e-10;

// Widest register this library will allocate: a joint state of two 14-qubit
// registers is 2^28 amplitudes (4 GiB). Anything larger is refused up front.
inline constexpr int kMaxQubits = 28;

namespace detail {

// Balanced-tree reduction of term(lo), ..., term(hi - 1), pairing adjacent
// indices first. Reductions over the +-u amplitude patterns this library
// produces stay exact under this order (every partial sum is a power-of-two
// multiple of u or an exact cancellation), which left-to-right accumulation
// does not achieve. It is also a single fixed order, independent of chunking.
template <typename F>
auto pairwise_map_sum(std::size_t lo, std::size_t hi, const F& term)
    -> decltype(term(lo)) {
    switch (hi - lo) {
    case 0: return decltype(term(lo)){};
    case 1: return term(lo);
    case 2: return term(lo) + term(lo + 1);
    case 3: return term(lo) + (term(lo + 1) + term(lo + 2));
    case 4: return (term(lo) + term(lo + 1)) + (term(lo + 2) + term(lo + 3));
    default: {
        const std::size_t mid = lo + (hi - lo) / 2;
        return pairwise_map_sum(lo, mid, term) + pairwise_map_sum(mid, hi, term);
    }
    }
}

inline bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

} // namespace detail

struct Statevector {
    int num_qubits = 0;
    std::vector<Complex> amps;  // basis index x, bit 0 least significant

    std::size_t dim() const { return amps.size(); }
};

inline void check_qubit_count(int num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits)
        throw InvalidSize("qubit count must be in [1, " + std::to_string(kMaxQubits) +
                          "], got " + std::to_string(num_qubits));
}

inline Statevector make_state(int num_qubits, std::vector<Complex> amps) {
    check_qubit_count(num_qubits);
    if (amps.size() != (std::size_t{1} << num_qubits))
        throw InvalidSize("amplitude vector has " + std::to_string(amps.size()) +
                          " entries, expected 2^" + std::to_string(num_qubits));
    return Statevector{num_qubits, std::move(amps)};
}

inline Statevector make_basis_state(int num_qubits, std::uint64_t index) {
    check_qubit_count(num_qubits);
    const std::size_t dim = std::size_t{1} << num_qubits;
    if (index >= dim)
        throw IndexOutOfRange("basis index " + std::to_string(index) +
                              " out of range for " + std::to_string(num_qubits) + " qubits");
    Statevector s{num_qubits, std::vector<Complex>(dim)};
    s.amps[index] = 1.0;
    return s;
}

// In-place H on every qubit: one butterfly pass per qubit.
inline void hadamard_all_in_place(std::vector<Complex>& amps, int num_qubits) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (int q = 0; q < num_qubits; ++q) {
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
            for (std::size_t k = base; k < base + stride; ++k) {
                const Complex a = amps[k];
                const Complex b = amps[k + stride];
                amps[k] = (a + b) * inv_sqrt2;
                amps[k + stride] = (a - b) * inv_sqrt2;
            }
        }
    }
}

inline Statevector apply_hadamard_all(Statevector s) {
    hadamard_all_in_place(s.amps, s.num_qubits);
    return s;
}

inline Complex inner_product(const Statevector& bra, const Statevector& ket) {
    if (bra.dim() != ket.dim())
        throw DimensionMismatch("inner product between states of dimension " +
                                std::to_string(bra.dim()) + " and " + std::to_string(ket.dim()));
    const Complex* a = bra.amps.data();
    const Complex* b = ket.amps.data();
    return detail::pairwise_map_sum(0, bra.dim(),
                                    [a, b](std::size_t x) { return std::conj(a[x]) * b[x]; });
}

inline double squared_norm(const Statevector& s) {
    const Complex* a = s.amps.data();
    return detail::pairwise_map_sum(0, s.dim(), [a](std::size_t x) { return std::norm(a[x]); });
}

inline bool is_normalized(const Statevector& s, double tol = kNormTol) {
    return std::abs(squared_norm(s) - 1.0) <= tol;
}

inline double fidelity(const Statevector& a, const Statevector& b) {
    return std::norm(inner_product(a, b));
}

// Kronecker product; `high` supplies the high-order bits of the joint index.
inline Statevector tensor_product(const Statevector& high, const Statevector& low) {
    if (high.num_qubits + low.num_qubits > kMaxQubits)
        throw InvalidSize("tensor product of " + std::to_string(high.num_qubits) + " + " +
                          std::to_string(low.num_qubits) + " qubits exceeds " +
                          std::to_string(kMaxQubits));
    Statevector out{high.num_qubits + low.num_qubits,
                    std::vector<Complex>(high.dim() * low.dim())};
    for (std::size_t xa = 0; xa < high.dim(); ++xa) {
        const Complex va = high.amps[xa];
        const std::size_t base = xa * low.dim();
        for (std::size_t xb = 0; xb < low.dim(); ++xb)
            out.amps[base + xb] = va * low.amps[xb];
    }
    return out;
}

} // namespace wvap

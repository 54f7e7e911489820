#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wvap/errors.hpp"
#include "wvap/statevector.hpp"

namespace wvap {

// Operators are kept in structured form wherever possible; materializing to a
// dense matrix is allowed only up to this dimension (a two-register joint of
// 2^6 x 2^6 is the largest thing the dense paths are meant for).
inline constexpr std::size_t kMaxDenseDim = 4096;

inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kHermitianTol = 1e-12;

// Small row-major complex matrix. Used for dense operator payloads, for the
// spectral work in the pre/postselection module, and as the reference
// implementation the structured kernels are tested against.
struct Matrix {
    std::size_t dim = 0;
    std::vector<Complex> a;

    Matrix() = default;
    explicit Matrix(std::size_t d) : dim(d), a(d * d) {}

    Complex& operator()(std::size_t i, std::size_t j) { return a[i * dim + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return a[i * dim + j]; }

    static Matrix identity(std::size_t d) {
        Matrix m(d);
        for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline void check_same_dim(const Matrix& x, const Matrix& y, const char* what) {
    if (x.dim != y.dim)
        throw DimensionMismatch(std::string(what) + ": dimensions " + std::to_string(x.dim) +
                                " and " + std::to_string(y.dim));
}

inline Matrix operator+(const Matrix& x, const Matrix& y) {
    check_same_dim(x, y, "matrix sum");
    Matrix out = x;
    for (std::size_t k = 0; k < out.a.size(); ++k) out.a[k] += y.a[k];
    return out;
}

inline Matrix operator-(const Matrix& x, const Matrix& y) {
    check_same_dim(x, y, "matrix difference");
    Matrix out = x;
    for (std::size_t k = 0; k < out.a.size(); ++k) out.a[k] -= y.a[k];
    return out;
}

inline Matrix operator*(Complex c, const Matrix& m) {
    Matrix out = m;
    for (auto& v : out.a) v *= c;
    return out;
}

inline Matrix matmul(const Matrix& x, const Matrix& y) {
    check_same_dim(x, y, "matrix product");
    const std::size_t d = x.dim;
    Matrix out(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const Complex c = x(i, k);
            if (c == 0.0) continue;
            const Complex* yrow = &y.a[k * d];
            Complex* orow = &out.a[i * d];
            for (std::size_t j = 0; j < d; ++j) orow[j] += c * yrow[j];
        }
    return out;
}

inline std::vector<Complex> matvec(const Matrix& m, std::span<const Complex> v) {
    if (v.size() != m.dim)
        throw DimensionMismatch("matvec: matrix dim " + std::to_string(m.dim) +
                                ", vector dim " + std::to_string(v.size()));
    std::vector<Complex> out(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i) {
        const Complex* row = &m.a[i * m.dim];
        out[i] = detail::pairwise_map_sum(
            0, m.dim, [row, &v](std::size_t j) { return row[j] * v[j]; });
    }
    return out;
}

inline Matrix adjoint(const Matrix& m) {
    Matrix out(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i)
        for (std::size_t j = 0; j < m.dim; ++j) out(j, i) = std::conj(m(i, j));
    return out;
}

inline Matrix kron(const Matrix& x, const Matrix& y) {
    Matrix out(x.dim * y.dim);
    for (std::size_t i = 0; i < x.dim; ++i)
        for (std::size_t j = 0; j < x.dim; ++j) {
            const Complex c = x(i, j);
            if (c == 0.0) continue;
            for (std::size_t k = 0; k < y.dim; ++k)
                for (std::size_t l = 0; l < y.dim; ++l)
                    out(i * y.dim + k, j * y.dim + l) = c * y(k, l);
        }
    return out;
}

inline double max_abs_diff(const Matrix& x, const Matrix& y) {
    check_same_dim(x, y, "matrix comparison");
    double worst = 0.0;
    for (std::size_t k = 0; k < x.a.size(); ++k)
        worst = std::max(worst, std::abs(x.a[k] - y.a[k]));
    return worst;
}

inline bool matrix_is_hermitian(const Matrix& m, double tol = kHermitianTol) {
    for (std::size_t i = 0; i < m.dim; ++i)
        for (std::size_t j = i; j < m.dim; ++j)
            if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) return false;
    return true;
}

inline bool matrix_is_unitary(const Matrix& m, double tol = kUnitaryTol) {
    return max_abs_diff(matmul(adjoint(m), m), Matrix::identity(m.dim)) <= tol;
}

// An operator on one register, in one of a handful of structured forms. The
// structured forms apply in O(dim) without ever building a matrix, which is
// what keeps 14-qubit registers (and their 2^28 joints) workable.
class LinearOperator {
public:
    enum class Form { Dense, Reflection, PhaseLayer, HadamardLayer, Projector, Composite };

    // I - 2|m><m| : flips the sign of one basis amplitude.
    static LinearOperator reflection(int num_qubits, std::uint64_t index) {
        return indexed(Form::Reflection, num_qubits, index);
    }

    // diag((-1)^popcount(x)) : sigma_z on every qubit.
    static LinearOperator phase_layer(int num_qubits) {
        return indexed(Form::PhaseLayer, num_qubits, 0);
    }

    // H on every qubit.
    static LinearOperator hadamard_layer(int num_qubits) {
        return indexed(Form::HadamardLayer, num_qubits, 0);
    }

    // |m><m| : keeps one basis amplitude.
    static LinearOperator projector(int num_qubits, std::uint64_t index) {
        return indexed(Form::Projector, num_qubits, index);
    }

    static LinearOperator dense(Matrix m) {
        if (!detail::is_power_of_two(m.dim))
            throw InvalidSize("dense operator dimension " + std::to_string(m.dim) +
                              " is not a power of two");
        if (m.dim > kMaxDenseDim)
            throw DimensionTooLarge("dense operator dimension " + std::to_string(m.dim) +
                                    " exceeds " + std::to_string(kMaxDenseDim));
        LinearOperator op;
        op.form_ = Form::Dense;
        op.num_qubits_ = std::countr_zero(m.dim);
        op.dense_ = std::make_shared<const Matrix>(std::move(m));
        return op;
    }

    // Product of factors, leftmost applied last (matrix order).
    static LinearOperator composite(std::vector<LinearOperator> factors) {
        if (factors.empty())
            throw InvalidSize("composite of zero factors needs an explicit dimension; "
                              "use identity()");
        for (const auto& f : factors)
            if (f.dim() != factors.front().dim())
                throw DimensionMismatch("composite factors of dimension " +
                                        std::to_string(factors.front().dim()) + " and " +
                                        std::to_string(f.dim()));
        LinearOperator op;
        op.form_ = Form::Composite;
        op.num_qubits_ = factors.front().num_qubits_;
        op.factors_ = std::move(factors);
        return op;
    }

    // Empty composite: applying it performs no arithmetic at all.
    static LinearOperator identity(int num_qubits) {
        check_qubit_count(num_qubits);
        LinearOperator op;
        op.form_ = Form::Composite;
        op.num_qubits_ = num_qubits;
        return op;
    }

    Form form() const { return form_; }
    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return std::size_t{1} << num_qubits_; }
    std::uint64_t index() const { return index_; }
    const std::vector<LinearOperator>& factors() const { return factors_; }

    void apply_in_place(std::span<Complex> amps) const {
        if (amps.size() != dim())
            throw DimensionMismatch("operator of dimension " + std::to_string(dim()) +
                                    " applied to state of dimension " +
                                    std::to_string(amps.size()));
        switch (form_) {
        case Form::Reflection:
            amps[index_] = -amps[index_];
            break;
        case Form::PhaseLayer:
            for (std::size_t x = 0; x < amps.size(); ++x)
                if (std::popcount(x) & 1) amps[x] = -amps[x];
            break;
        case Form::HadamardLayer: {
            constexpr double inv_sqrt2 = 0.70710678118654752440;
            for (int q = 0; q < num_qubits_; ++q) {
                const std::size_t stride = std::size_t{1} << q;
                for (std::size_t base = 0; base < amps.size(); base += 2 * stride)
                    for (std::size_t k = base; k < base + stride; ++k) {
                        const Complex a = amps[k];
                        const Complex b = amps[k + stride];
                        amps[k] = (a + b) * inv_sqrt2;
                        amps[k + stride] = (a - b) * inv_sqrt2;
                    }
            }
            break;
        }
        case Form::Projector:
            for (std::size_t x = 0; x < amps.size(); ++x)
                if (x != index_) amps[x] = 0.0;
            break;
        case Form::Dense: {
            const std::vector<Complex> out = matvec(*dense_, amps);
            std::copy(out.begin(), out.end(), amps.begin());
            break;
        }
        case Form::Composite:
            for (auto it = factors_.rbegin(); it != factors_.rend(); ++it)
                it->apply_in_place(amps);
            break;
        }
    }

    Matrix materialize() const {
        if (dim() > kMaxDenseDim)
            throw DimensionTooLarge("materializing a " + std::to_string(dim()) +
                                    "-dimensional operator (cap " +
                                    std::to_string(kMaxDenseDim) + ")");
        switch (form_) {
        case Form::Dense:
            return *dense_;
        case Form::Reflection: {
            Matrix m = Matrix::identity(dim());
            m(index_, index_) = -1.0;
            return m;
        }
        case Form::PhaseLayer: {
            Matrix m(dim());
            for (std::size_t x = 0; x < dim(); ++x)
                m(x, x) = (std::popcount(x) & 1) ? -1.0 : 1.0;
            return m;
        }
        case Form::HadamardLayer: {
            double scale = std::ldexp(1.0, -(num_qubits_ / 2));
            if (num_qubits_ & 1) scale *= 0.70710678118654752440;
            Matrix m(dim());
            for (std::size_t i = 0; i < dim(); ++i)
                for (std::size_t j = 0; j < dim(); ++j)
                    m(i, j) = (std::popcount(i & j) & 1) ? -scale : scale;
            return m;
        }
        case Form::Projector: {
            Matrix m(dim());
            m(index_, index_) = 1.0;
            return m;
        }
        case Form::Composite: {
            Matrix m = Matrix::identity(dim());
            for (const auto& f : factors_) m = (&f == &factors_.front())
                                                   ? f.materialize()
                                                   : matmul(m, f.materialize());
            return m;
        }
        }
        throw Error("unreachable operator form");
    }

private:
    static LinearOperator indexed(Form form, int num_qubits, std::uint64_t index) {
        check_qubit_count(num_qubits);
        if (index >= (std::uint64_t{1} << num_qubits))
            throw IndexOutOfRange("operator index " + std::to_string(index) +
                                  " out of range for " + std::to_string(num_qubits) + " qubits");
        LinearOperator op;
        op.form_ = form;
        op.num_qubits_ = num_qubits;
        op.index_ = index;
        return op;
    }

    Form form_ = Form::Composite;
    int num_qubits_ = 1;
    std::uint64_t index_ = 0;
    std::shared_ptr<const Matrix> dense_;
    std::vector<LinearOperator> factors_;
};

inline Statevector apply_operator(const LinearOperator& op, Statevector s) {
    op.apply_in_place(s.amps);
    return s;
}

// Applies `op` to the low register on the slice where the high register holds
// the control projector's basis index. Everything outside the slice is
// untouched, so the joint state never gets copied.
inline Statevector apply_controlled(const LinearOperator& control, const LinearOperator& op,
                                    Statevector joint) {
    if (control.form() != LinearOperator::Form::Projector)
        throw Error("apply_controlled requires a basis projector control");
    if (control.dim() * op.dim() != joint.dim())
        throw DimensionMismatch("control dim " + std::to_string(control.dim()) +
                                " x op dim " + std::to_string(op.dim()) +
                                " does not match joint dim " + std::to_string(joint.dim()));
    std::span<Complex> slice(joint.amps.data() + control.index() * op.dim(), op.dim());
    op.apply_in_place(slice);
    return joint;
}

inline bool is_unitary(const LinearOperator& op, double tol = kUnitaryTol) {
    using Form = LinearOperator::Form;
    switch (op.form()) {
    case Form::Reflection:
    case Form::PhaseLayer:
    case Form::HadamardLayer:
        return true;
    case Form::Projector:
        return false;
    case Form::Composite: {
        bool all = true;
        for (const auto& f : op.factors()) all = all && is_unitary(f, tol);
        if (all) return true;
        break;  // a product of non-unitaries can still be unitary; check numerically
    }
    case Form::Dense:
        break;
    }
    return matrix_is_unitary(op.materialize(), tol);
}

inline bool is_hermitian(const LinearOperator& op, double tol = kHermitianTol) {
    using Form = LinearOperator::Form;
    switch (op.form()) {
    case Form::Reflection:
    case Form::PhaseLayer:
    case Form::HadamardLayer:
    case Form::Projector:
        return true;
    default:
        return matrix_is_hermitian(op.materialize(), tol);
    }
}

} // namespace wvap

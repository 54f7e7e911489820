#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wvap/errors.hpp"
#include "wvap/operators.hpp"
#include "wvap/statevector.hpp"

namespace wvap {

// Spectral (eigendecomposition) paths are meant for small registers.
inline constexpr std::size_t kMaxCoupledDim = 64;

// Below this overlap magnitude a selection pair counts as orthogonal.
inline constexpr double kOverlapFloor = 1e-12;
// Below this probability a postselection outcome counts as impossible
// (the amplitude floor above, squared).
inline constexpr double kProbabilityFloor = 1e-24;

struct PrePostSelection {
    Statevector pre;   // state the run starts from
    Statevector post;  // state selected for at the end
};

inline void validate(const PrePostSelection& sel) {
    if (sel.pre.dim() != sel.post.dim())
        throw DimensionMismatch("pre and post selection states of dimension " +
                                std::to_string(sel.pre.dim()) + " and " +
                                std::to_string(sel.post.dim()));
    if (!is_normalized(sel.pre)) throw Error("preselection state is not normalized");
    if (!is_normalized(sel.post)) throw Error("postselection state is not normalized");
}

// System observable O, probe observable A, coupling strength g for the
// impulsive interaction exp(-i g O x A).
struct CoupledSystem {
    LinearOperator system_obs;
    LinearOperator probe_obs;
    double coupling = 0.0;
};

struct Eigensystem {
    std::vector<double> values;
    Matrix vectors;  // column j holds the eigenvector for values[j]
};

inline Eigensystem hermitian_eigensystem(const Matrix& m) {
    using EMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
    EMat em(m.dim, m.dim);
    for (std::size_t i = 0; i < m.dim; ++i)
        for (std::size_t j = 0; j < m.dim; ++j) em(i, j) = m(i, j);
    Eigen::SelfAdjointEigenSolver<EMat> solver(em);
    if (solver.info() != Eigen::Success)
        throw Error("hermitian eigendecomposition did not converge");
    Eigensystem out;
    out.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + m.dim);
    out.vectors = Matrix(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i)
        for (std::size_t j = 0; j < m.dim; ++j) out.vectors(i, j) = solver.eigenvectors()(i, j);
    return out;
}

// exp(scale * H) for Hermitian H, via the spectral theorem. `scale` may be
// complex (the weak-limit path uses -i g <A>_W with complex <A>_W).
inline Matrix hermitian_exp(const Matrix& h, Complex scale) {
    const Eigensystem eig = hermitian_eigensystem(h);
    Matrix out(h.dim);
    for (std::size_t j = 0; j < h.dim; ++j) {
        const Complex f = std::exp(scale * eig.values[j]);
        for (std::size_t i = 0; i < h.dim; ++i) {
            const Complex col = f * eig.vectors(i, j);
            for (std::size_t k = 0; k < h.dim; ++k)
                out(i, k) += col * std::conj(eig.vectors(k, j));
        }
    }
    return out;
}

namespace detail {

inline Matrix coupled_observable(const LinearOperator& obs, std::size_t state_dim,
                                 const char* which) {
    if (obs.dim() != state_dim)
        throw DimensionMismatch(std::string(which) + " observable dim " +
                                std::to_string(obs.dim()) + " vs state dim " +
                                std::to_string(state_dim));
    if (obs.dim() > kMaxCoupledDim)
        throw DimensionTooLarge(std::string(which) + " observable dim " +
                                std::to_string(obs.dim()) + " exceeds spectral cap " +
                                std::to_string(kMaxCoupledDim));
    Matrix m = obs.materialize();
    if (!matrix_is_hermitian(m))
        throw NotHermitian(std::string(which) + " observable is not Hermitian");
    return m;
}

// Coordinates of `state` in the eigenbasis (columns of eig.vectors).
inline std::vector<Complex> to_eigenbasis(const Eigensystem& eig,
                                          std::span<const Complex> state) {
    std::vector<Complex> out(eig.vectors.dim);
    for (std::size_t j = 0; j < out.size(); ++j) {
        const Matrix& v = eig.vectors;
        out[j] = pairwise_map_sum(0, v.dim, [&v, j, &state](std::size_t x) {
            return std::conj(v(x, j)) * state[x];
        });
    }
    return out;
}

} // namespace detail

// exp(-i g O x A) applied to system_state x probe_state, exactly (spectral
// decomposition of both observables, no Trotterization).
inline Statevector coupled_evolve(const CoupledSystem& cs, const Statevector& system_state,
                                  const Statevector& probe_state) {
    const Matrix o = detail::coupled_observable(cs.system_obs, system_state.dim(), "system");
    const Matrix a = detail::coupled_observable(cs.probe_obs, probe_state.dim(), "probe");
    if (!is_normalized(system_state)) throw Error("system state is not normalized");
    if (!is_normalized(probe_state)) throw Error("probe state is not normalized");
    if (cs.coupling == 0.0) return tensor_product(system_state, probe_state);

    const Eigensystem so = hermitian_eigensystem(o);
    const Eigensystem sa = hermitian_eigensystem(a);
    const std::vector<Complex> c = detail::to_eigenbasis(so, system_state.amps);
    const std::vector<Complex> d = detail::to_eigenbasis(sa, probe_state.amps);
    const std::size_t da = system_state.dim();
    const std::size_t db = probe_state.dim();

    Statevector joint{system_state.num_qubits + probe_state.num_qubits,
                      std::vector<Complex>(da * db)};
    std::vector<Complex> probe_j(db);
    for (std::size_t j = 0; j < da; ++j) {
        for (std::size_t x = 0; x < db; ++x) probe_j[x] = 0.0;
        for (std::size_t m = 0; m < db; ++m) {
            const Complex w = std::exp(Complex(0.0, -cs.coupling * so.values[j] * sa.values[m])) * d[m];
            for (std::size_t x = 0; x < db; ++x) probe_j[x] += w * sa.vectors(x, m);
        }
        for (std::size_t x1 = 0; x1 < da; ++x1) {
            const Complex f = c[j] * so.vectors(x1, j);
            if (f == 0.0) continue;
            Complex* row = joint.amps.data() + x1 * db;
            for (std::size_t x2 = 0; x2 < db; ++x2) row[x2] += f * probe_j[x2];
        }
    }
    return joint;
}

struct PostselectionOutcome {
    Statevector conditional_state;
    double probability = 0.0;
};

// Projects the low register of `joint` onto `post` and renormalizes what is
// left on the high register. Streams the joint state; allocates only the
// conditional state.
inline PostselectionOutcome postselect(const Statevector& joint, const Statevector& post) {
    if (post.num_qubits >= joint.num_qubits)
        throw DimensionMismatch("postselection register of " + std::to_string(post.num_qubits) +
                                " qubits inside a joint of " +
                                std::to_string(joint.num_qubits));
    if (!is_normalized(post)) throw Error("postselection state is not normalized");
    const std::size_t db = post.dim();
    const std::size_t da = joint.dim() / db;
    Statevector cond{joint.num_qubits - post.num_qubits, std::vector<Complex>(da)};
    const Complex* j = joint.amps.data();
    const Complex* p = post.amps.data();
    for (std::size_t xa = 0; xa < da; ++xa) {
        const Complex* row = j + xa * db;
        cond.amps[xa] = detail::pairwise_map_sum(
            0, db, [row, p](std::size_t xb) { return std::conj(p[xb]) * row[xb]; });
    }
    const double prob = squared_norm(cond);
    if (prob <= kProbabilityFloor)
        throw ImpossibleOutcome("postselection outcome has probability " + std::to_string(prob));
    const double scale = 1.0 / std::sqrt(prob);
    for (auto& v : cond.amps) v *= scale;
    return PostselectionOutcome{std::move(cond), prob};
}

// <post| Op |pre> / <post|pre>
inline Complex weak_value(const LinearOperator& obs, const PrePostSelection& sel) {
    validate(sel);
    const Complex denom = inner_product(sel.post, sel.pre);
    if (std::abs(denom) <= kOverlapFloor)
        throw OrthogonalSelection("pre/post overlap magnitude " + std::to_string(std::abs(denom)));
    return inner_product(sel.post, apply_operator(obs, sel.pre)) / denom;
}

// Same quotient for a unitary in place of the observable.
inline Complex modular_value(const LinearOperator& unitary, const PrePostSelection& sel) {
    if (!is_unitary(unitary))
        throw NotUnitary("modular value of a non-unitary operator");
    return weak_value(unitary, sel);
}

// Per-basis-label conditional values of the coupled evolution: value_k is the
// amplitude the postselected system keeps on |k>, divided by the bare overlap.
struct PotentValueSet {
    std::vector<Complex> values;

    // N with N^2 * sum_k |value_k|^2 = 1.
    double norm_factor() const {
        const Complex* v = values.data();
        const double s = detail::pairwise_map_sum(
            0, values.size(), [v](std::size_t k) { return std::norm(v[k]); });
        return 1.0 / std::sqrt(s);
    }
};

inline PotentValueSet potent_values(const CoupledSystem& cs, const Statevector& system_state,
                                    const PrePostSelection& sel) {
    validate(sel);
    const Matrix o = detail::coupled_observable(cs.system_obs, system_state.dim(), "system");
    const Matrix a = detail::coupled_observable(cs.probe_obs, sel.pre.dim(), "probe");
    if (!is_normalized(system_state)) throw Error("system state is not normalized");
    const Complex denom = inner_product(sel.post, sel.pre);
    if (std::abs(denom) <= kOverlapFloor)
        throw OrthogonalSelection("pre/post overlap magnitude " + std::to_string(std::abs(denom)));

    const Eigensystem so = hermitian_eigensystem(o);
    const Eigensystem sa = hermitian_eigensystem(a);
    const std::vector<Complex> c = detail::to_eigenbasis(so, system_state.amps);
    const std::vector<Complex> f = detail::to_eigenbasis(sa, sel.pre.amps);
    const std::vector<Complex> h = detail::to_eigenbasis(sa, sel.post.amps);
    const std::size_t da = system_state.dim();
    const std::size_t db = sel.pre.dim();

    // t_j = <post| exp(-i g lambda_j A) |pre>, evaluated in A's eigenbasis
    std::vector<Complex> t(da);
    for (std::size_t j = 0; j < da; ++j) {
        t[j] = detail::pairwise_map_sum(0, db, [&](std::size_t m) {
            return std::conj(h[m]) *
                   std::exp(Complex(0.0, -cs.coupling * so.values[j] * sa.values[m])) * f[m];
        });
    }
    PotentValueSet out;
    out.values.resize(da);
    for (std::size_t k = 0; k < da; ++k) {
        out.values[k] = detail::pairwise_map_sum(0, da, [&](std::size_t j) {
            return so.vectors(k, j) * c[j] * t[j];
        }) / denom;
    }
    return out;
}

// One branch of a conditional unitary: apply `unitary` to the probe wherever
// the system lies in the range of `projector`.
struct ConditionalBlock {
    LinearOperator projector;
    LinearOperator unitary;
};

// Applies sum_k P_k x V_k to system_state x pre, postselects the probe on
// post, and returns the renormalized system state with its success
// probability. The projectors must resolve the identity.
inline PostselectionOutcome potent_operator_apply(std::span<const ConditionalBlock> blocks,
                                                  const PrePostSelection& sel,
                                                  const Statevector& system_state) {
    validate(sel);
    if (blocks.empty()) throw IncompleteProjectors("no conditional blocks given");
    if (!is_normalized(system_state)) throw Error("system state is not normalized");

    std::vector<Matrix> proj;
    proj.reserve(blocks.size());
    for (const auto& b : blocks) {
        if (b.projector.dim() != system_state.dim())
            throw DimensionMismatch("block projector dim " + std::to_string(b.projector.dim()) +
                                    " vs system dim " + std::to_string(system_state.dim()));
        if (b.unitary.dim() != sel.pre.dim())
            throw DimensionMismatch("block unitary dim " + std::to_string(b.unitary.dim()) +
                                    " vs probe dim " + std::to_string(sel.pre.dim()));
        if (!is_unitary(b.unitary))
            throw NotUnitary("conditional block unitary is not unitary");
        proj.push_back(b.projector.materialize());
    }
    for (std::size_t i = 0; i < proj.size(); ++i) {
        if (!matrix_is_hermitian(proj[i]))
            throw IncompleteProjectors("block projector " + std::to_string(i) +
                                       " is not Hermitian");
        if (max_abs_diff(matmul(proj[i], proj[i]), proj[i]) > kHermitianTol)
            throw IncompleteProjectors("block projector " + std::to_string(i) +
                                       " is not idempotent");
        for (std::size_t k = i + 1; k < proj.size(); ++k)
            if (max_abs_diff(matmul(proj[i], proj[k]), Matrix(proj[i].dim)) > kHermitianTol)
                throw IncompleteProjectors("block projectors " + std::to_string(i) + " and " +
                                           std::to_string(k) + " are not orthogonal");
    }
    Matrix sum(proj.front().dim);
    for (const auto& p : proj) sum = sum + p;
    if (max_abs_diff(sum, Matrix::identity(sum.dim)) > kHermitianTol)
        throw IncompleteProjectors("block projectors do not sum to the identity");

    // Postselecting the probe first collapses each branch to the bare
    // amplitude <post|V_k|pre>; the system keeps sum_k a_k P_k |system>.
    Statevector acc{system_state.num_qubits, std::vector<Complex>(system_state.dim())};
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const Complex a_k =
            inner_product(sel.post, apply_operator(blocks[k].unitary, sel.pre));
        const std::vector<Complex> px = matvec(proj[k], system_state.amps);
        for (std::size_t x = 0; x < acc.dim(); ++x) acc.amps[x] += a_k * px[x];
    }
    const double prob = squared_norm(acc);
    if (prob <= kProbabilityFloor)
        throw OrthogonalSelection("conditional evolution postselects to amplitude " +
                                  std::to_string(std::sqrt(prob)));
    const double scale = 1.0 / std::sqrt(prob);
    for (auto& v : acc.amps) v *= scale;
    return PostselectionOutcome{std::move(acc), prob};
}

struct WeakLimitRow {
    double coupling = 0.0;
    double deviation = 0.0;
};

namespace detail {

// Distance between unit vectors modulo global phase: || a - <b|a> b ||.
// Equals sqrt(1 - |<b|a>|^2) algebraically, but stays first-order accurate
// for nearly parallel states, where the fidelity form loses to cancellation.
inline double phase_free_distance(const Statevector& a, const Statevector& b) {
    const Complex z = inner_product(b, a);
    Statevector r = a;
    for (std::size_t x = 0; x < r.dim(); ++x) r.amps[x] -= z * b.amps[x];
    return std::sqrt(squared_norm(r));
}

} // namespace detail

// Compares the exact postselected evolution against the first-order picture
// exp(-i g <A>_W O) |system> over a descending ladder of couplings.
inline std::vector<WeakLimitRow> weak_limit_check(const CoupledSystem& cs,
                                                  const Statevector& system_state,
                                                  const PrePostSelection& sel,
                                                  std::span<const double> couplings) {
    if (couplings.empty()) throw Error("empty coupling ladder");
    for (std::size_t i = 0; i < couplings.size(); ++i) {
        if (couplings[i] < 0.0) throw Error("coupling ladder contains a negative entry");
        if (i > 0 && couplings[i] >= couplings[i - 1])
            throw Error("coupling ladder is not strictly descending");
    }
    if (couplings.front() >= 0.5) throw Error("coupling ladder starts at 0.5 or above");

    const Complex a_w = weak_value(cs.probe_obs, sel);
    const Matrix o = detail::coupled_observable(cs.system_obs, system_state.dim(), "system");
    const Eigensystem so = hermitian_eigensystem(o);
    const std::vector<Complex> c = detail::to_eigenbasis(so, system_state.amps);

    std::vector<WeakLimitRow> rows;
    rows.reserve(couplings.size());
    for (const double g : couplings) {
        CoupledSystem step = cs;
        step.coupling = g;
        const Statevector joint = coupled_evolve(step, system_state, sel.pre);
        const Statevector exact = postselect(joint, sel.post).conditional_state;

        Statevector approx{system_state.num_qubits, std::vector<Complex>(system_state.dim())};
        for (std::size_t j = 0; j < c.size(); ++j) {
            const Complex f = std::exp(Complex(0.0, -g) * a_w * so.values[j]) * c[j];
            for (std::size_t x = 0; x < approx.dim(); ++x)
                approx.amps[x] += f * so.vectors(x, j);
        }
        const double scale = 1.0 / std::sqrt(squared_norm(approx));
        for (auto& v : approx.amps) v *= scale;

        rows.push_back(WeakLimitRow{g, detail::phase_free_distance(exact, approx)});
    }
    return rows;
}

} // namespace wvap

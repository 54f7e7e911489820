#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wvap/errors.hpp"
#include "wvap/operators.hpp"
#include "wvap/prepost.hpp"
#include "wvap/statevector.hpp"

namespace wvap {

// The joint of two n-qubit registers costs 2^(2n+4) bytes; n = 14 is 4 GiB.
inline constexpr int kMaxSearchQubits = 14;

struct SearchConfig {
    int num_qubits = 2;           // register width n, database size N = 2^n
    std::uint64_t target = 0;     // marked item y
    std::uint64_t reflection = 0; // ancilla reflection index w, even popcount
    std::uint64_t seed = 42;
    std::uint64_t trials = 0;     // Monte Carlo trials; 0 disables sampling
};

inline void validate(const SearchConfig& cfg) {
    if (cfg.num_qubits < 1 || cfg.num_qubits > kMaxSearchQubits)
        throw InvalidSize("n must be in [1, " + std::to_string(kMaxSearchQubits) + "], got " +
                          std::to_string(cfg.num_qubits));
    const std::uint64_t dim = std::uint64_t{1} << cfg.num_qubits;
    if (cfg.target >= dim)
        throw IndexOutOfRange("target out of range: " + std::to_string(cfg.target) +
                              " with N = " + std::to_string(dim));
    if (cfg.reflection >= dim)
        throw IndexOutOfRange("w out of range: " + std::to_string(cfg.reflection) +
                              " with N = " + std::to_string(dim));
    if (std::popcount(cfg.reflection) & 1)
        throw OddParityW("w must have even popcount, got " + std::to_string(cfg.reflection));
}

// Closed forms for an n-qubit run.
struct AnalyticPrediction {
    double target_probability = 0.0; // N^2 / (N^2 + 4(N-1))
    double overlap_sq = 0.0;         // 4 / N^2
    double weak_value_mod_sq = 0.0;  // N^2 / 4
    double postsel_prob = 0.0;       // (N^2 + 4(N-1)) / N^3
    double end_to_end = 0.0;         // 1 / N
};

inline AnalyticPrediction analytic_predictions(int n) {
    if (n < 1 || n > kMaxSearchQubits)
        throw InvalidSize("n must be in [1, " + std::to_string(kMaxSearchQubits) + "], got " +
                          std::to_string(n));
    const double N = double(std::uint64_t{1} << n);
    AnalyticPrediction p;
    p.target_probability = N * N / (N * N + 4.0 * (N - 1.0));
    p.overlap_sq = 4.0 / (N * N);
    p.weak_value_mod_sq = N * N / 4.0;
    p.postsel_prob = (N * N + 4.0 * (N - 1.0)) / (N * N * N);
    p.end_to_end = 1.0 / N;
    return p;
}

// Uniform superposition with the sign flipped on the reflection index:
// the state the ancilla register starts in.
inline Statevector build_preselection(int n, std::uint64_t reflection) {
    Statevector s = apply_hadamard_all(make_basis_state(n, 0));
    return apply_operator(LinearOperator::reflection(n, reflection), std::move(s));
}

// |-> on every qubit: amplitudes (-1)^popcount(x) / sqrt(N).
inline Statevector build_postselection(int n) {
    check_qubit_count(n);
    const std::size_t dim = std::size_t{1} << n;
    const double b = 1.0 / std::sqrt(double(dim));
    Statevector s{n, std::vector<Complex>(dim)};
    for (std::size_t x = 0; x < dim; ++x)
        s.amps[x] = (std::popcount(x) & 1) ? -b : b;
    return s;
}

// V = sigma_z^(x)n * I_w. Even popcount makes sigma_z^(x)n |w> = +|w>, which
// keeps V Hermitian and maps the preselection exactly onto the postselection.
inline LinearOperator build_v(int n, std::uint64_t reflection) {
    check_qubit_count(n);
    if (reflection >= (std::uint64_t{1} << n))
        throw IndexOutOfRange("w out of range: " + std::to_string(reflection));
    if (std::popcount(reflection) & 1)
        throw OddParityW("w must have even popcount, got " + std::to_string(reflection));
    return LinearOperator::composite(
        {LinearOperator::phase_layer(n), LinearOperator::reflection(n, reflection)});
}

// U = (I - |y><y|) x I + |y><y| x V on the computer (x) ancilla joint.
struct ConditionalUnitary {
    int register_qubits = 1;
    std::uint64_t control = 0;
    LinearOperator ancilla_op = LinearOperator::identity(1);
};

inline ConditionalUnitary build_u(int n, std::uint64_t target, std::uint64_t reflection) {
    if (target >= (std::uint64_t{1} << n))
        throw IndexOutOfRange("target out of range: " + std::to_string(target));
    return ConditionalUnitary{n, target, build_v(n, reflection)};
}

// Everything that touches the marked item goes through here, so a run's
// query count is just the number of calls.
class Oracle {
public:
    Oracle(int num_qubits, std::uint64_t target) : n_(num_qubits), target_(target) {
        check_qubit_count(num_qubits);
        if (target >= (std::uint64_t{1} << num_qubits))
            throw IndexOutOfRange("target out of range: " + std::to_string(target));
    }

    std::uint64_t target() const { return target_; }
    std::uint64_t query_count() const { return queries_; }

    // Phase oracle I_y on a bare register.
    Statevector apply_phase_flip(Statevector s) {
        if (s.num_qubits != n_)
            throw DimensionMismatch("phase oracle on " + std::to_string(n_) +
                                    " qubits applied to " + std::to_string(s.num_qubits));
        ++queries_;
        s.amps[target_] = -s.amps[target_];
        return s;
    }

    // Conditional-unitary oracle U on a joint state; touches only the
    // ancilla slice addressed by the target.
    Statevector apply_conditional(const ConditionalUnitary& u, Statevector joint) {
        if (u.register_qubits != n_ || u.control != target_)
            throw Error("conditional unitary was built for a different oracle");
        ++queries_;
        return apply_controlled(LinearOperator::projector(n_, target_), u.ancilla_op,
                                std::move(joint));
    }

private:
    int n_;
    std::uint64_t target_;
    std::uint64_t queries_ = 0;
};

struct MonteCarloTally {
    std::uint64_t postsel_successes = 0;
    std::uint64_t target_hits = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Top 53 bits of a draw; identical on every standard library, unlike the
// std:: distributions.
inline double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

// Each trial gets its own generator keyed by (seed, trial), so tallies do not
// depend on how the trial loop is chunked.
inline MonteCarloTally mc_sample(const Statevector& conditional, double postsel_prob,
                                 std::uint64_t target, std::uint64_t trials,
                                 std::uint64_t seed) {
    std::vector<double> cdf(conditional.dim());
    double acc = 0.0;
    for (std::size_t x = 0; x < cdf.size(); ++x) {
        acc += std::norm(conditional.amps[x]);
        cdf[x] = acc;
    }
    const double total = cdf.back();
    const std::uint64_t stream = splitmix64(seed);
    MonteCarloTally tally;
    for (std::uint64_t i = 0; i < trials; ++i) {
        std::mt19937_64 rng(splitmix64(stream + i));
        if (uniform01(rng) >= postsel_prob) continue;
        ++tally.postsel_successes;
        const double u = uniform01(rng) * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t x = (it == cdf.end()) ? cdf.size() - 1 : std::size_t(it - cdf.begin());
        if (x == target) ++tally.target_hits;
    }
    return tally;
}

// Prepare both registers, apply U once, postselect the ancilla. The joint
// state lives only inside this call.
inline PostselectionOutcome wvap_conditional(int n, std::uint64_t target,
                                             std::uint64_t reflection, Oracle& oracle) {
    Statevector joint = tensor_product(apply_hadamard_all(make_basis_state(n, 0)),
                                       build_preselection(n, reflection));
    joint = oracle.apply_conditional(build_u(n, target, reflection), std::move(joint));
    return postselect(joint, build_postselection(n));
}

} // namespace detail

struct SearchReport {
    SearchConfig config;
    double p_analytic = 0.0;
    double p_sim = 0.0;          // |<y|conditional>|^2
    double overlap_sq = 0.0;     // |<post|pre>|^2
    double postsel_prob = 0.0;
    double end_to_end_prob = 0.0;
    Complex weak_value{};        // <post|V|pre> / <post|pre>
    std::uint64_t oracle_queries = 0;
    MonteCarloTally mc;          // zeros unless trials > 0
};

inline SearchReport run_wvap(const SearchConfig& cfg) {
    validate(cfg);
    const int n = cfg.num_qubits;
    Oracle oracle(n, cfg.target);
    const PostselectionOutcome outcome =
        detail::wvap_conditional(n, cfg.target, cfg.reflection, oracle);

    const Statevector pre = build_preselection(n, cfg.reflection);
    const Statevector post = build_postselection(n);

    SearchReport r;
    r.config = cfg;
    r.p_analytic = analytic_predictions(n).target_probability;
    r.p_sim = std::norm(outcome.conditional_state.amps[cfg.target]);
    r.overlap_sq = std::norm(inner_product(post, pre));
    r.postsel_prob = outcome.probability;
    r.end_to_end_prob = outcome.probability * r.p_sim;
    r.weak_value = modular_value(build_v(n, cfg.reflection), PrePostSelection{pre, post});
    r.oracle_queries = oracle.query_count();
    if (cfg.trials > 0)
        r.mc = detail::mc_sample(outcome.conditional_state, outcome.probability, cfg.target,
                                 cfg.trials, cfg.seed);
    return r;
}

inline MonteCarloTally run_wvap_montecarlo(const SearchConfig& cfg) {
    validate(cfg);
    if (cfg.trials == 0) throw InvalidSize("Monte Carlo sampling needs trials >= 1");
    Oracle oracle(cfg.num_qubits, cfg.target);
    const PostselectionOutcome outcome =
        detail::wvap_conditional(cfg.num_qubits, cfg.target, cfg.reflection, oracle);
    return detail::mc_sample(outcome.conditional_state, outcome.probability, cfg.target,
                             cfg.trials, cfg.seed);
}

inline std::uint64_t grover_default_iterations(int n) {
    check_qubit_count(n);
    const double N = double(std::uint64_t{1} << n);
    return std::uint64_t(std::floor(std::numbers::pi / 4.0 * std::sqrt(N)));
}

// sin^2((2k+1) asin(1/sqrt(N))): where the amplitude lands after k iterations.
inline double grover_success_probability(int n, std::uint64_t iterations) {
    const double theta = std::asin(1.0 / std::sqrt(double(std::uint64_t{1} << n)));
    const double s = std::sin(double(2 * iterations + 1) * theta);
    return s * s;
}

struct GroverResult {
    std::uint64_t iterations = 0;
    std::uint64_t oracle_queries = 0;
    double success_probability = 0.0;
};

inline GroverResult run_grover(int n, std::uint64_t target,
                               std::optional<std::uint64_t> iterations = std::nullopt) {
    if (n < 1 || n > kMaxSearchQubits)
        throw InvalidSize("n must be in [1, " + std::to_string(kMaxSearchQubits) + "], got " +
                          std::to_string(n));
    if (!iterations && n < 2)
        throw InvalidSize("the default iteration schedule needs n >= 2");
    const std::uint64_t iters = iterations ? *iterations : grover_default_iterations(n);

    Oracle oracle(n, target);
    Statevector s = apply_hadamard_all(make_basis_state(n, 0));
    const double inv_dim = 1.0 / double(s.dim());
    for (std::uint64_t k = 0; k < iters; ++k) {
        s = oracle.apply_phase_flip(std::move(s));
        const Complex* a = s.amps.data();
        const Complex mean =
            detail::pairwise_map_sum(0, s.dim(), [a](std::size_t x) { return a[x]; }) * inv_dim;
        for (auto& v : s.amps) v = 2.0 * mean - v;
    }
    return GroverResult{iters, oracle.query_count(), std::norm(s.amps[target])};
}

} // namespace wvap

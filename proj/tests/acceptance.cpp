// Acceptance gate for the library: ten checks, one printed line each, exit 0
// only if every line is a pass. Runs the same public API the CLI uses.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <wvap/wvap.hpp>

#include "helpers.hpp"

namespace fs = std::filesystem;
using namespace wvap;

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

std::string fixed(double v, int places) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

void report(int id, bool pass, const std::string& detail) {
    std::printf("[%s] %02d %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Five random (target, even-parity reflection) pairs per width, shared by the
// closed-form criteria below.
struct GridPoint {
    int n = 0;
    std::uint64_t y = 0;
    std::uint64_t w = 0;
    SearchReport rep;
    double map_sq = 0.0; // |<post| V |pre>|^2
};

constexpr std::size_t kGridWidths = 12;
constexpr std::size_t kGridPairs = 5;
constexpr std::size_t kGridSize = kGridWidths * kGridPairs;

bool criterion1(std::vector<GridPoint>& grid) {
    bool pass = false;
    std::string detail;
    try {
        std::mt19937_64 rng(20260816);
        const auto t0 = std::chrono::steady_clock::now();
        double max_err = 0.0;
        for (int n = 1; n <= int(kGridWidths); ++n) {
            const std::uint64_t dim = std::uint64_t{1} << n;
            for (std::size_t k = 0; k < kGridPairs; ++k) {
                GridPoint pt;
                pt.n = n;
                pt.y = rng() % dim;
                pt.w = rng() % dim;
                if (std::popcount(pt.w) & 1) pt.w ^= 1;

                SearchConfig cfg;
                cfg.num_qubits = n;
                cfg.target = pt.y;
                cfg.reflection = pt.w;
                pt.rep = run_wvap(cfg);
                pt.map_sq = std::norm(inner_product(
                    build_postselection(n),
                    apply_operator(build_v(n, pt.w), build_preselection(n, pt.w))));

                const double N = double(dim);
                const double closed = N * N / (N * N + 4.0 * (N - 1.0));
                max_err = std::max(max_err, std::abs(pt.rep.p_sim - closed));
                grid.push_back(std::move(pt));
            }
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        pass = grid.size() == kGridSize && max_err <= 1e-12 && secs < 30.0;
        detail = "conditional target probability: max closed-form error " + sci(max_err) +
                 " over " + std::to_string(grid.size()) + " runs, n = 1..12, in " +
                 fixed(secs, 1) + " s";
    } catch (const std::exception& e) {
        detail = std::string("conditional target probability: ") + e.what();
    }
    report(1, pass, detail);
    return pass;
}

bool criterion2(const std::vector<GridPoint>& grid) {
    bool pass = false;
    std::string detail;
    try {
        double max_err = 0.0;
        for (const auto& pt : grid) {
            const double N = double(std::uint64_t{1} << pt.n);
            max_err = std::max(max_err, std::abs(pt.rep.overlap_sq - 4.0 / (N * N)));
        }
        bool signs_ok = true;
        for (int n = 1; n <= int(kGridWidths); ++n) {
            const Statevector post = build_postselection(n);
            for (std::size_t x = 0; x < post.dim(); ++x) {
                const bool negative = post.amps[x].real() < 0.0;
                if (negative != bool(std::popcount(x) & 1)) signs_ok = false;
            }
        }
        pass = grid.size() == kGridSize && max_err <= 1e-12 && signs_ok;
        detail = "selection overlap: max |overlap^2 - 4/N^2| = " + sci(max_err) +
                 (signs_ok ? std::string("; amplitude signs follow popcount parity")
                           : std::string("; amplitude sign pattern broken"));
    } catch (const std::exception& e) {
        detail = std::string("selection overlap: ") + e.what();
    }
    report(2, pass, detail);
    return pass;
}

bool criterion3(const std::vector<GridPoint>& grid) {
    bool pass = false;
    std::string detail;
    try {
        double max_wv = 0.0;
        double max_map = 0.0;
        for (const auto& pt : grid) {
            const double N = double(std::uint64_t{1} << pt.n);
            max_wv =
                std::max(max_wv, std::abs(std::norm(pt.rep.weak_value) - N * N / 4.0));
            max_map = std::max(max_map, std::abs(pt.map_sq - 1.0));
        }
        pass = grid.size() == kGridSize && max_wv <= 1e-12 && max_map <= 1e-12;
        detail = "weak value magnitude: max ||wv|^2 - N^2/4| = " + sci(max_wv) +
                 ", max ||<post|V|pre>|^2 - 1| = " + sci(max_map);
    } catch (const std::exception& e) {
        detail = std::string("weak value magnitude: ") + e.what();
    }
    report(3, pass, detail);
    return pass;
}

bool criterion4(std::vector<RunRecord>& sweep) {
    bool pass = false;
    std::string detail;
    try {
        sweep = sweep_records(8, 14, 0, 7);
        double lo = 1e300;
        double hi = -1e300;
        for (const auto& r : sweep) {
            const double N = double(r.N);
            for (const double p : {r.p_analytic, r.p_sim}) {
                const double deficit = (1.0 - p) * N;
                lo = std::min(lo, deficit);
                hi = std::max(hi, deficit);
            }
        }
        pass = sweep.size() == 7 && lo >= 3.5 && hi <= 4.0;
        detail = "amplified probability deficit: (1 - p) N in [" + fixed(lo, 3) + ", " +
                 fixed(hi, 3) + "] for n = 8..14";
    } catch (const std::exception& e) {
        detail = std::string("amplified probability deficit: ") + e.what();
    }
    report(4, pass, detail);
    return pass;
}

bool criterion5() {
    bool pass = false;
    std::string detail;
    try {
        std::mt19937_64 rng(555);
        double dev_herm = 0.0;
        double dev_unit = 0.0;
        double dev_proj = 0.0;
        double dev_decomp = 0.0;
        double dev_kernel = 0.0;
        for (int n = 1; n <= 5; ++n) {
            const std::size_t dim = std::size_t{1} << n;
            const Matrix ident = Matrix::identity(dim);
            for (int k = 0; k < 3; ++k) {
                const std::uint64_t y = rng() % dim;
                std::uint64_t w = rng() % dim;
                if (std::popcount(w) & 1) w ^= 1;

                const Matrix v = build_v(n, w).materialize();
                dev_herm = std::max(dev_herm, max_abs_diff(v, adjoint(v)));
                dev_unit = std::max(dev_unit, max_abs_diff(matmul(adjoint(v), v), ident));

                const Matrix p1 = Complex(0.5) * (ident + v);
                const Matrix p2 = Complex(0.5) * (ident - v);
                for (const Matrix* p : {&p1, &p2}) {
                    dev_proj = std::max(dev_proj, max_abs_diff(*p, adjoint(*p)));
                    dev_proj = std::max(dev_proj, max_abs_diff(matmul(*p, *p), *p));
                }
                dev_proj = std::max(dev_proj, max_abs_diff(matmul(p1, p2), Matrix(dim)));
                dev_proj = std::max(dev_proj, max_abs_diff(p1 + p2, ident));

                Matrix proj_y(dim);
                proj_y(y, y) = 1.0;
                const Matrix u12 =
                    kron(ident - proj_y, ident) + kron(proj_y, v);
                const Matrix u20 =
                    kron(ident, p1) +
                    kron(LinearOperator::reflection(n, y).materialize(), p2);
                dev_decomp = std::max(dev_decomp, max_abs_diff(u12, u20));

                if (n <= 3) {
                    for (std::uint64_t col = 0; col < dim * dim; ++col) {
                        const Statevector joint =
                            apply_controlled(LinearOperator::projector(n, y), build_v(n, w),
                                             make_basis_state(2 * n, col));
                        for (std::size_t row = 0; row < dim * dim; ++row)
                            dev_kernel = std::max(
                                dev_kernel, std::abs(joint.amps[row] - u12(row, col)));
                    }
                }
            }
        }
        const double dev_alg = std::max({dev_herm, dev_unit, dev_proj});
        pass = dev_alg <= 1e-12 && dev_decomp <= 1e-12 && dev_kernel <= 1e-12;
        detail = "projector decomposition: V Hermitian/unitary and P1, P2 resolve the "
                 "identity to " +
                 sci(dev_alg) + "; the two conditional forms agree to " + sci(dev_decomp) +
                 ", streaming kernel to " + sci(dev_kernel);
    } catch (const std::exception& e) {
        detail = std::string("projector decomposition: ") + e.what();
    }
    report(5, pass, detail);
    return pass;
}

bool criterion6(const std::vector<GridPoint>& grid, const std::vector<RunRecord>& sweep) {
    bool pass = false;
    std::string detail;
    try {
        bool single_query = grid.size() == kGridSize && sweep.size() == 7;
        for (const auto& pt : grid)
            if (pt.rep.oracle_queries != 1) single_query = false;
        for (const auto& r : sweep)
            if (r.oracle_queries != 1) single_query = false;

        bool schedule_ok = true;
        double max_err = 0.0;
        for (int n = 2; n <= kMaxSearchQubits; ++n) {
            const double N = double(std::uint64_t{1} << n);
            const GroverResult g = run_grover(n, (std::uint64_t{1} << n) - 1);
            const auto expected =
                std::uint64_t(std::floor(std::numbers::pi / 4.0 * std::sqrt(N)));
            if (g.oracle_queries != expected || g.iterations != expected)
                schedule_ok = false;
            const double s = std::sin(double(2 * g.iterations + 1) * std::asin(1.0 / std::sqrt(N)));
            max_err = std::max(max_err, std::abs(g.success_probability - s * s));
        }
        pass = single_query && schedule_ok && max_err <= 1e-9;
        detail = std::string("query accounting: ") +
                 (single_query ? "every run used exactly 1 oracle query"
                               : "a run used more than 1 oracle query") +
                 "; baseline schedule " + (schedule_ok ? "correct" : "wrong") +
                 " with success error " + sci(max_err) + " for n = 2..14";
    } catch (const std::exception& e) {
        detail = std::string("query accounting: ") + e.what();
    }
    report(6, pass, detail);
    return pass;
}

bool criterion7(const std::vector<GridPoint>& grid, const std::vector<RunRecord>& sweep) {
    bool pass = false;
    std::string detail;
    try {
        double max_post = 0.0;
        double max_end = 0.0;
        for (const auto& pt : grid) {
            const double N = double(std::uint64_t{1} << pt.n);
            const double closed = (N * N + 4.0 * (N - 1.0)) / (N * N * N);
            max_post = std::max(max_post, std::abs(pt.rep.postsel_prob - closed));
            max_end = std::max(max_end,
                               std::abs(pt.rep.postsel_prob * pt.rep.p_sim - 1.0 / N));
            max_end = std::max(max_end, std::abs(pt.rep.end_to_end_prob - 1.0 / N));
        }
        for (const auto& r : sweep) {
            const double N = double(r.N);
            const double closed = (N * N + 4.0 * (N - 1.0)) / (N * N * N);
            max_post = std::max(max_post, std::abs(r.postsel_prob - closed));
            max_end = std::max(max_end, std::abs(r.postsel_prob * r.p_sim - 1.0 / N));
            max_end = std::max(max_end, std::abs(r.end_to_end_prob - 1.0 / N));
        }
        pass = grid.size() == kGridSize && sweep.size() == 7 && max_post <= 1e-12 &&
               max_end <= 1e-12;
        detail = "postselection bookkeeping: max probability error " + sci(max_post) +
                 ", max |postsel x target - 1/N| = " + sci(max_end);
    } catch (const std::exception& e) {
        detail = std::string("postselection bookkeeping: ") + e.what();
    }
    report(7, pass, detail);
    return pass;
}

bool criterion8() {
    bool pass = false;
    std::string detail;
    try {
        // Reconstruction: the per-label conditional values must rebuild the
        // postselected system state.
        double min_fid = 1.0;
        std::size_t done = 0;
        for (int i = 0; i < 50; ++i) {
            const std::uint64_t s = 9000 + 97 * std::uint64_t(i);
            const int sys_qubits = 1 + (i & 1);
            const int probe_qubits = 1 + ((i >> 1) & 1);
            const std::size_t sys_dim = std::size_t{1} << sys_qubits;
            const std::size_t probe_dim = std::size_t{1} << probe_qubits;

            const CoupledSystem cs{
                LinearOperator::dense(testutil::random_hermitian(sys_dim, s)),
                LinearOperator::dense(testutil::random_hermitian(probe_dim, s + 1)),
                0.3 + 0.02 * double(i)};
            const Statevector system = testutil::random_state(sys_qubits, s + 2);
            const Statevector pre = testutil::random_state(probe_qubits, s + 3);
            Statevector post = testutil::random_state(probe_qubits, s + 4);
            std::uint64_t bump = s + 4;
            while (std::abs(inner_product(post, pre)) <= 1e-3)
                post = testutil::random_state(probe_qubits, ++bump);
            const PrePostSelection sel{pre, post};

            const PostselectionOutcome exact =
                postselect(coupled_evolve(cs, system, pre), post);
            const PotentValueSet pv = potent_values(cs, system, sel);
            const double nf = pv.norm_factor();
            Statevector recon{sys_qubits, std::vector<Complex>(sys_dim)};
            for (std::size_t k = 0; k < sys_dim; ++k) recon.amps[k] = pv.values[k] * nf;
            min_fid = std::min(min_fid, fidelity(exact.conditional_state, recon));
            ++done;
        }

        // For a unitary that is also Hermitian, the modular value must equal
        // the weak value computed through the spectral decomposition.
        double max_mv = 0.0;
        for (int i = 0; i < 20; ++i) {
            const std::uint64_t s = 40000 + 31 * std::uint64_t(i);
            const int nq = 1 + (i & 1);
            const std::size_t dim = std::size_t{1} << nq;
            const Statevector r = testutil::random_state(nq, s);
            Matrix v = Matrix::identity(dim);
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = 0; b < dim; ++b)
                    v(a, b) -= 2.0 * r.amps[a] * std::conj(r.amps[b]);

            const Statevector pre = testutil::random_state(nq, s + 1);
            Statevector post = testutil::random_state(nq, s + 2);
            std::uint64_t bump = s + 2;
            while (std::abs(inner_product(post, pre)) <= 1e-3)
                post = testutil::random_state(nq, ++bump);
            const PrePostSelection sel{pre, post};

            const Complex mv = modular_value(LinearOperator::dense(v), sel);
            const Eigensystem eig = hermitian_eigensystem(v);
            Complex acc = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                Complex fv = 0.0;
                Complex vi = 0.0;
                for (std::size_t x = 0; x < dim; ++x) {
                    fv += std::conj(post.amps[x]) * eig.vectors(x, j);
                    vi += std::conj(eig.vectors(x, j)) * pre.amps[x];
                }
                acc += eig.values[j] * fv * vi;
            }
            const Complex wv = acc / inner_product(post, pre);
            max_mv = std::max(max_mv, std::abs(mv - wv));
        }

        // Weak-coupling limit: the first-order picture's residual shrinks
        // roughly quadratically down the ladder. The system observable's
        // eigenvalue squares must differ, or renormalization hides the
        // second-order term.
        Matrix occ(2);
        occ(0, 0) = 1.0;
        Matrix sx(2);
        sx(0, 1) = 1.0;
        sx(1, 0) = 1.0;
        const CoupledSystem cs{LinearOperator::dense(occ), LinearOperator::dense(sx), 0.0};
        const Statevector system = apply_hadamard_all(make_basis_state(1, 0));
        const PrePostSelection sel{make_basis_state(1, 0),
                                   make_state(1, {Complex(0.6), Complex(0.8)})};
        const std::vector<double> ladder{0.1, 0.05, 0.025};
        const std::vector<WeakLimitRow> rows = weak_limit_check(cs, system, sel, ladder);
        bool ratios_ok = rows.size() == 3;
        double ratio_lo = 1e300;
        double ratio_hi = -1e300;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double ratio = rows[i].deviation / rows[i - 1].deviation;
            ratio_lo = std::min(ratio_lo, ratio);
            ratio_hi = std::max(ratio_hi, ratio);
            if (ratio < 0.15 || ratio > 0.35) ratios_ok = false;
        }

        pass = done == 50 && min_fid >= 1.0 - 1e-12 && max_mv <= 1e-12 && ratios_ok;
        detail = "framework consistency: reconstruction fidelity >= " + sci(min_fid) +
                 " on 50 instances, modular vs spectral weak value " + sci(max_mv) +
                 ", halving ratios in [" + fixed(ratio_lo, 3) + ", " + fixed(ratio_hi, 3) +
                 "]";
    } catch (const std::exception& e) {
        detail = std::string("framework consistency: ") + e.what();
    }
    report(8, pass, detail);
    return pass;
}

bool criterion9() {
    bool pass = false;
    std::string detail;
    try {
        SearchConfig cfg;
        cfg.num_qubits = 2;
        cfg.target = 3;
        cfg.seed = 42;
        cfg.trials = 100000;
        const MonteCarloTally t = run_wvap_montecarlo(cfg);
        const MonteCarloTally t2 = run_wvap_montecarlo(cfg);

        const double trials = double(cfg.trials);
        const double p_post = 0.4375;
        const double sig_post = std::sqrt(p_post * (1.0 - p_post) / trials);
        const double f_post = double(t.postsel_successes) / trials;

        const double p_hit = 4.0 / 7.0;
        const double successes = double(t.postsel_successes);
        const double sig_hit = std::sqrt(p_hit * (1.0 - p_hit) / successes);
        const double f_hit = double(t.target_hits) / successes;

        const bool repro = t.postsel_successes == t2.postsel_successes &&
                           t.target_hits == t2.target_hits;
        pass = std::abs(f_post - p_post) <= 3.0 * sig_post &&
               std::abs(f_hit - p_hit) <= 3.0 * sig_hit && repro;
        detail = "monte carlo sanity: postselect frequency " + fixed(f_post, 5) +
                 " (exact 0.43750), conditional hit frequency " + fixed(f_hit, 5) +
                 " (exact " + fixed(p_hit, 5) + "), tallies " +
                 (repro ? "reproducible" : "NOT reproducible");
    } catch (const std::exception& e) {
        detail = std::string("monte carlo sanity: ") + e.what();
    }
    report(9, pass, detail);
    return pass;
}

bool criterion10() {
    bool pass = false;
    std::string detail;
    try {
        std::random_device rd;
        const fs::path dir =
            fs::temp_directory_path() / ("wvap-acceptance-" + std::to_string(rd()));
        fs::create_directories(dir);
        const fs::path f1 = dir / "a.csv";
        const fs::path f2 = dir / "b.csv";
        int codes[2] = {-1, -1};
        const fs::path* outs[2] = {&f1, &f2};
        for (int i = 0; i < 2; ++i) {
            const std::string cmd = std::string("\"") + WVAP_CLI_PATH +
                                    "\" sweep --n-min 1 --n-max 10 --seed 7 --out \"" +
                                    outs[i]->string() + "\" >/dev/null 2>&1";
            const int raw = std::system(cmd.c_str());
            codes[i] = (raw != -1 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
        }
        const std::string c1 = slurp(f1);
        const std::string c2 = slurp(f2);
        const std::size_t rows = parse_csv(c1).size();
        pass = codes[0] == 0 && codes[1] == 0 && !c1.empty() && c1 == c2 && rows == 10;
        detail = "output determinism: two sweep invocations wrote " +
                 std::to_string(c1.size()) + " and " + std::to_string(c2.size()) +
                 " bytes, " + (c1 == c2 ? "byte-identical" : "DIFFERENT") + ", " +
                 std::to_string(rows) + " rows";
        fs::remove_all(dir);
    } catch (const std::exception& e) {
        detail = std::string("output determinism: ") + e.what();
    }
    report(10, pass, detail);
    return pass;
}

} // namespace

int main() {
    bool ok = true;
    std::vector<GridPoint> grid;
    std::vector<RunRecord> sweep;
    ok &= criterion1(grid);
    ok &= criterion2(grid);
    ok &= criterion3(grid);
    ok &= criterion4(sweep);
    ok &= criterion5();
    ok &= criterion6(grid, sweep);
    ok &= criterion7(grid, sweep);
    ok &= criterion8();
    ok &= criterion9();
    ok &= criterion10();
    return ok ? 0 : 1;
}

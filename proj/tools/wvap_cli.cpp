#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <wvap/wvap.hpp>

namespace {

int do_run(const wvap::SearchConfig& cfg, const std::string& format) {
    const wvap::RunRecord rec = wvap::make_run_record(cfg);
    if (format == "csv")
        std::cout << wvap::render_csv({&rec, 1});
    else
        std::cout << wvap::to_json(rec) << '\n';
    return 0;
}

int do_sweep(int n_min, int n_max, std::uint64_t trials, std::uint64_t seed,
             const std::string& out_path) {
    const std::vector<wvap::RunRecord> records = wvap::sweep_records(n_min, n_max, trials, seed);
    const std::string csv = wvap::render_csv(records);
    if (out_path.empty()) {
        std::cout << csv;
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) {
        std::cerr << "cannot write to " << out_path << '\n';
        return 2;
    }
    f << csv;
    f.close();
    if (!f) {
        std::cerr << "error while writing " << out_path << '\n';
        return 1;
    }
    return 0;
}

// Weak limit of a qubit pair: O = |0><0| on the system (eigenvalues 1 and 0,
// whose distinct squares keep the second-order residual visible after
// renormalization), A = sigma_x on the probe, probe preselected in |0> and
// postselected in (3|0> + 4|1>)/5, so <A>_W = 4/3. The deviation rows shrink
// ~quadratically down the ladder.
int demo_weak_limit() {
    using namespace wvap;
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
    const Complex aw = weak_value(cs.probe_obs, sel);

    JsonWriter w;
    w.begin_object();
    w.key("demo");
    w.value_string("weak-limit");
    w.key("weak_value_re");
    w.value(aw.real());
    w.key("weak_value_im");
    w.value(aw.imag());
    w.key("rows");
    w.begin_array();
    for (const auto& row : rows) {
        w.begin_object();
        w.key("coupling");
        w.value(row.coupling);
        w.key("deviation");
        w.value(row.deviation);
        w.end_object();
    }
    w.end_array();
    w.key("ratios");
    w.begin_array();
    for (std::size_t i = 1; i < rows.size(); ++i)
        w.value(rows[i].deviation / rows[i - 1].deviation);
    w.end_array();
    w.end_object();
    std::cout << w.str() << '\n';
    return 0;
}

// Smallest conditional unitary: flip the probe iff the system reads 1, then
// postselect the probe on |+>. Both branch amplitudes come out equal, the
// system is left in |+>, and the modular value of the flip is exactly 1.
int demo_conditional_unitary() {
    using namespace wvap;
    Matrix sx(2);
    sx(0, 1) = 1.0;
    sx(1, 0) = 1.0;
    const std::vector<ConditionalBlock> blocks{
        {LinearOperator::projector(1, 0), LinearOperator::identity(1)},
        {LinearOperator::projector(1, 1), LinearOperator::dense(sx)}};
    const Statevector system = apply_hadamard_all(make_basis_state(1, 0));
    const PrePostSelection sel{make_basis_state(1, 0),
                               apply_hadamard_all(make_basis_state(1, 0))};
    const PostselectionOutcome outcome = potent_operator_apply(blocks, sel, system);
    const Complex m0 = modular_value(blocks[0].unitary, sel);
    const Complex m1 = modular_value(blocks[1].unitary, sel);

    JsonWriter w;
    w.begin_object();
    w.key("demo");
    w.value_string("conditional-unitary");
    w.key("success_probability");
    w.value(outcome.probability);
    w.key("conditional_state_re");
    w.begin_array();
    for (const auto& a : outcome.conditional_state.amps) w.value(a.real());
    w.end_array();
    w.key("conditional_state_im");
    w.begin_array();
    for (const auto& a : outcome.conditional_state.amps) w.value(a.imag());
    w.end_array();
    w.key("modular_value_identity_re");
    w.value(m0.real());
    w.key("modular_value_identity_im");
    w.value(m0.imag());
    w.key("modular_value_flip_re");
    w.value(m1.real());
    w.key("modular_value_flip_im");
    w.value(m1.imag());
    w.end_object();
    std::cout << w.str() << '\n';
    return 0;
}

// The search step is one conditional unitary, so the same run can be driven
// three ways: the oracle pipeline, a two-block conditional evolution, and
// exp(-i pi P_y x P2) with P2 = (I - V)/2. All three must agree.
int demo_search_equivalence() {
    using namespace wvap;
    const int n = 3;
    const std::uint64_t y = 5;
    const std::uint64_t w_idx = 0;
    const std::size_t dim = 8;

    const Statevector computer = apply_hadamard_all(make_basis_state(n, 0));
    const Statevector pre = build_preselection(n, w_idx);
    const Statevector post = build_postselection(n);
    const PrePostSelection sel{pre, post};

    Oracle oracle(n, y);
    Statevector joint = tensor_product(computer, pre);
    joint = oracle.apply_conditional(build_u(n, y, w_idx), std::move(joint));
    const PostselectionOutcome direct = postselect(joint, post);

    Matrix pibar = Matrix::identity(dim);
    pibar(y, y) = 0.0;
    const std::vector<ConditionalBlock> blocks{
        {LinearOperator::dense(pibar), LinearOperator::identity(n)},
        {LinearOperator::projector(n, y), build_v(n, w_idx)}};
    const PostselectionOutcome via_blocks = potent_operator_apply(blocks, sel, computer);

    const Matrix v = build_v(n, w_idx).materialize();
    const Matrix p2 = Complex(0.5) * (Matrix::identity(dim) - v);
    const CoupledSystem cs{LinearOperator::projector(n, y), LinearOperator::dense(p2),
                           std::numbers::pi};
    const Statevector joint2 = coupled_evolve(cs, computer, pre);
    const PostselectionOutcome via_evolve = postselect(joint2, post);

    JsonWriter w;
    w.begin_object();
    w.key("demo");
    w.value_string("search-equivalence");
    w.key("n");
    w.value(n);
    w.key("y");
    w.value(y);
    w.key("w");
    w.value(w_idx);
    w.key("direct_probability");
    w.value(direct.probability);
    w.key("blocks_probability");
    w.value(via_blocks.probability);
    w.key("evolve_probability");
    w.value(via_evolve.probability);
    w.key("blocks_fidelity");
    w.value(fidelity(direct.conditional_state, via_blocks.conditional_state));
    w.key("evolve_fidelity");
    w.value(fidelity(direct.conditional_state, via_evolve.conditional_state));
    w.end_object();
    std::cout << w.str() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"postselected weak-value search simulator"};
    app.require_subcommand(1);

    wvap::SearchConfig cfg;
    std::string format = "json";
    auto* run = app.add_subcommand("run", "simulate one search instance");
    run->add_option("--n", cfg.num_qubits, "register width n (database size 2^n)")->required();
    run->add_option("--target", cfg.target, "marked item y")->required();
    run->add_option("--w", cfg.reflection, "ancilla reflection index (even popcount)");
    run->add_option("--trials", cfg.trials, "Monte Carlo trials (0 = none)");
    run->add_option("--seed", cfg.seed, "sampling seed");
    run->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    int n_min = 1;
    int n_max = 1;
    std::uint64_t sweep_trials = 0;
    std::uint64_t sweep_seed = 42;
    std::string out_path;
    auto* sweep = app.add_subcommand("sweep", "one record per width, y = N-1, w = 0");
    sweep->add_option("--n-min", n_min, "smallest register width")->required();
    sweep->add_option("--n-max", n_max, "largest register width")->required();
    sweep->add_option("--trials", sweep_trials, "Monte Carlo trials per width (0 = none)");
    sweep->add_option("--seed", sweep_seed, "sampling seed");
    sweep->add_option("--out", out_path, "write CSV to this file instead of stdout");

    std::string demo;
    auto* potent = app.add_subcommand("potent", "pre/postselection framework demos");
    potent->add_option("--demo", demo, "which demo to run")
        ->required()
        ->check(CLI::IsMember({"weak-limit", "conditional-unitary", "search-equivalence"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << e.what() << '\n';
        return 2;
    }

    try {
        if (app.got_subcommand(run)) return do_run(cfg, format);
        if (app.got_subcommand(sweep))
            return do_sweep(n_min, n_max, sweep_trials, sweep_seed, out_path);
        if (demo == "weak-limit") return demo_weak_limit();
        if (demo == "conditional-unitary") return demo_conditional_unitary();
        return demo_search_equivalence();
    } catch (const wvap::InvalidSize& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const wvap::IndexOutOfRange& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const wvap::OddParityW& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
}

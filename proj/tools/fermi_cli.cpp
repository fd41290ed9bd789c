// fermi: shadow experiments, Gaussian-unitary compilation, Hamiltonian
// partitioning and dense-oracle verification from the command line.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "fermi/io.hpp"
#include "fermi/verify.hpp"

namespace fs = std::filesystem;
using namespace fermi;
using io::json;

namespace {

constexpr const char* threads_env = "FERMI_THREADS";

int default_threads() {
    if (const char* v = std::getenv(threads_env)) {
        try {
            const int t = std::stoi(v);
            if (t >= 1) return t;
        } catch (const std::exception&) {
        }
        throw Error("E_ARGS", std::string(threads_env) + " must be a positive integer");
    }
    return 1;
}

void require_readable(const std::string& path) {
    if (!fs::is_regular_file(path)) throw Error("E_IO", "input file '" + path + "' does not exist");
}

void require_writable_parent(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty() && !fs::is_directory(parent)) throw Error("E_IO", "output directory '" + parent.string() + "' does not exist");
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") std::cout << text;
    else io::write_text(path, text);
}

// ---- shadow-sim

struct ShadowArgs {
    int modes = 0;
    int eta = -1;
    std::string state;
    std::uint64_t samples = 0;
    std::string group = "b";
    std::string noise = "none";
    int kmax = 2;
    std::uint64_t seed = 0;
    std::string out;
    bool save_samples = false;
    std::vector<std::uint64_t> checkpoints;
};

std::vector<std::uint64_t> default_checkpoints(std::uint64_t T) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t t = shadow_chunk; t < T; t *= 10) out.push_back(t);
    out.push_back(T);
    return out;
}

int cmd_shadow_sim(const ShadowArgs& a, int threads) {
    if (a.modes < 1) throw Error("E_ARGS", "modes must be >= 1");
    if (a.samples < 1) throw Error("E_ARGS", "samples must be >= 1");
    if (a.kmax < 1 || a.kmax > a.modes) throw Error("E_ARGS", "kmax must lie in [1, modes]");
    if ((a.eta >= 0) == !a.state.empty()) throw Error("E_ARGS", "give exactly one of --eta (random Slater state) or --state (covariance file)");
    if (a.eta > a.modes) throw Error("E_ARGS", "eta must lie in [0, modes]");
    if (!a.state.empty()) require_readable(a.state);
    if (a.out.empty()) throw Error("E_ARGS", "--out is required");
    ShadowRun cfg;
    cfg.k_max = a.kmax;
    cfg.group = parse_group(a.group);
    cfg.noise = NoiseModel::parse(a.noise);
    cfg.seed = a.seed;
    cfg.threads = threads;
    std::vector<std::uint64_t> marks = a.checkpoints.empty() ? default_checkpoints(a.samples) : a.checkpoints;
    for (auto c : marks)
        if (c < 1 || c > a.samples || (c % shadow_chunk != 0 && c != a.samples))
            throw Error("E_ARGS", "checkpoints must be multiples of 1000 not exceeding the sample count, or equal to it");
    fs::create_directories(a.out);

    // Stream (seed, 0) prepares the state; streams (seed, 1 + chunk) drive the snapshots.
    Covariance g;
    std::optional<MatrixXcd> d1;
    std::optional<SymmetrySpec> spec;
    if (a.eta >= 0) {
        Rng rng = make_stream(a.seed, 0);
        SlaterDeterminant s = random_slater(a.modes, a.eta, rng);
        d1 = one_rdm(s);
        g = slater_covariance(s);
        spec = symmetry_spec(a.modes, a.eta, true);
        if (spec->ancilla_added) g = with_ancilla(g);
    } else {
        g = Covariance::make(io::matrix_from_json(io::read_json(a.state), "covariance"));
        if (g.n_modes != a.modes) throw Error("E_ARGS", "state file has " + std::to_string(g.n_modes) + " modes, --modes says " + std::to_string(a.modes));
    }

    std::vector<io::ErrorPoint> curve;
    const bool want_curve = d1 && a.kmax >= 2 && a.modes >= 2;
    auto on_mark = [&](const ShadowAccumulator& acc) {
        if (!want_curve) return;
        Estimates e = acc.estimates();
        const MatrixXcd exact = two_rdm_exact(*d1);
        const double raw = spectral_norm_hermitian(two_rdm(e, a.modes) - exact);
        const double mit = spectral_norm_hermitian(two_rdm(mitigate(e, *spec), a.modes) - exact);
        curve.push_back({acc.count(), raw, mit});
    };
    std::vector<ShadowSample> record;
    ShadowAccumulator acc = run_shadows(g, a.samples, cfg, marks, on_mark, a.save_samples ? &record : nullptr);
    Estimates est = acc.estimates();

    const fs::path dir(a.out);
    io::write_text((dir / "state.json").string(), io::dump(io::matrix_to_json(g.M, "covariance")));
    io::write_text((dir / "estimates.json").string(), io::dump(io::to_json(est)));
    if (spec) io::write_text((dir / "estimates_mitigated.json").string(), io::dump(io::to_json(mitigate(est, *spec))));
    if (a.save_samples) io::write_text((dir / "samples.csv").string(), io::samples_csv(record));
    if (want_curve) io::write_text((dir / "error_curve.csv").string(), io::error_curve_csv(curve));

    json summary{{"modes", a.modes},
                 {"simulated_modes", g.n_modes},
                 {"samples", a.samples},
                 {"group", a.group},
                 {"noise", cfg.noise.name()},
                 {"kmax", a.kmax},
                 {"seed", a.seed}};
    if (a.eta >= 0) summary["eta"] = a.eta;
    if (spec) {
        MitigationRatios r = symmetry_ratios(est, *spec);
        summary["ancilla"] = spec->ancilla_added;
        summary["ratio_2"] = r.r2;
        summary["ratio_4"] = r.r4;
    }
    if (!curve.empty()) {
        summary["final_error_unmitigated"] = curve.back().raw;
        summary["final_error_mitigated"] = curve.back().mitigated;
    }
    io::write_text((dir / "run.json").string(), io::dump(summary));
    std::cout << io::dump(summary);
    return 0;
}

// ---- compile

int cmd_compile(const std::string& input, const std::string& scheme, const std::string& out, bool stats) {
    require_readable(input);
    require_writable_parent(out);
    if (scheme != "naive" && scheme != "blocked") throw Error("E_ARGS", "scheme must be 'naive' or 'blocked'");
    const MatrixXd Q = io::matrix_from_json(io::read_json(input));
    const GateProgram p = scheme == "naive" ? compile_naive(Q) : compile_blocked(Q);
    emit(out, io::dump(io::to_json(p)));
    if (stats) {
        const double err = (program_to_orthogonal(p) - Q).cwiseAbs().maxCoeff();
        std::cout << io::dump(json{{"scheme", scheme}, {"n_qubits", p.n_qubits}, {"stats", io::to_json(program_stats(p))}, {"recompose_error", err}});
    }
    return 0;
}

// ---- partition

int cmd_partition(const std::string& input, int n, const std::string& method, const std::string& report) {
    if (method != "greedy" && method != "analytic") throw Error("E_ARGS", "method must be 'greedy' or 'analytic'");
    require_writable_parent(report);
    if (input.empty()) {
        // Template only: which index sets share a set, without coefficients.
        if (method != "analytic") throw Error("E_ARGS", "--n without --input is only meaningful for --method analytic");
        if (n < 2) throw Error("E_ARGS", "--n must be >= 2");
        PartitionTemplate t = analytic_partition(n);
        json sets = json::array();
        for (const auto& s : t.sets) sets.push_back({{"members", s}});
        emit(report, io::dump(json{{"method", method}, {"n_modes", n}, {"quartic_sets", t.quartic_sets}, {"set_count", t.sets.size()}, {"sets", sets}}));
        return 0;
    }
    require_readable(input);
    const ElectronicIntegrals ints = io::integrals_from_json(io::read_json(input));
    if (n > 0 && n != ints.n) throw Error("E_ARGS", "--n disagrees with the integrals file");
    const MajoranaPolynomial poly = majorana_form(ints);
    if (method == "greedy") {
        emit(report, io::dump(io::partition_report(method, poly, greedy_partition(poly))));
    } else {
        const PartitionTemplate t = analytic_partition(ints.n);
        emit(report, io::dump(io::partition_report(method, poly, apply_template(poly, t), t.quartic_sets)));
    }
    return 0;
}

// ---- verify

int cmd_verify(int modes, std::uint64_t seed) {
    const auto checks = verify::run_all(modes, seed);
    bool ok = true;
    std::printf("%-52s %-6s %-12s %s\n", "check", "result", "worst", "limit");
    for (const auto& c : checks) {
        std::printf("%-52s %-6s %-12.3e %.0e\n", c.name.c_str(), c.passed ? "pass" : "FAIL", c.worst, c.limit);
        ok = ok && c.passed;
    }
    std::printf("%s (%d modes)\n", ok ? "all checks passed" : "some checks failed", modes);
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free-fermion simulation, shadow tomography, circuit compilation and Hamiltonian partitioning"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, std::string("worker threads (default: $") + threads_env + " or 1)")->check(CLI::PositiveNumber);

    ShadowArgs sa;
    auto* shadow = app.add_subcommand("shadow-sim", "run a matchgate-shadow experiment");
    shadow->add_option("--modes", sa.modes, "number of fermionic modes")->required();
    shadow->add_option("--eta", sa.eta, "particle number of a random Slater determinant (enables mitigation and the error curve)");
    shadow->add_option("--state", sa.state, "covariance JSON file instead of a random Slater state");
    shadow->add_option("--samples", sa.samples, "number of snapshots T")->required();
    shadow->add_option("--group", sa.group, "ensemble: b or alt")->capture_default_str();
    shadow->add_option("--noise", sa.noise, "readout noise kind:p (none, bit_flip, depolarizing, amplitude_damping)")->capture_default_str();
    shadow->add_option("--kmax", sa.kmax, "largest estimated degree / 2")->capture_default_str();
    shadow->add_option("--seed", sa.seed, "master seed")->capture_default_str();
    shadow->add_option("--out", sa.out, "output directory (required)");
    shadow->add_option("--checkpoints", sa.checkpoints, "sample counts at which the error curve is evaluated");
    shadow->add_flag("--save-samples", sa.save_samples, "also write samples.csv");

    std::string c_in, c_scheme = "naive", c_out;
    bool c_stats = false;
    auto* compile = app.add_subcommand("compile", "compile an orthogonal matrix into a matchgate circuit");
    compile->add_option("--input", c_in, "JSON matrix {n_modes, data}")->required();
    compile->add_option("--scheme", c_scheme, "naive or blocked")->capture_default_str();
    compile->add_option("--out", c_out, "program JSON path (default: stdout)");
    compile->add_flag("--stats", c_stats, "print gate counts and depth");

    std::string p_in, p_method = "greedy", p_report;
    int p_n = 0;
    auto* partition = app.add_subcommand("partition", "partition an electronic Hamiltonian into anticommuting sets");
    partition->add_option("--input", p_in, "integrals JSON {n, h1, h2}");
    partition->add_option("--n", p_n, "mode count (analytic template without integrals)");
    partition->add_option("--method", p_method, "greedy or analytic")->capture_default_str();
    partition->add_option("--report", p_report, "report JSON path (default: stdout)");

    int v_modes = 3;
    std::uint64_t v_seed = 1;
    auto* verify_cmd = app.add_subcommand("verify", "check every fast path against the dense oracle");
    verify_cmd->add_option("--modes", v_modes, "mode count (1 to 6)")->capture_default_str();
    verify_cmd->add_option("--seed", v_seed, "seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error[E_ARGS]: %s\n", e.what());
        return 2;
    }

    try {
        const int t = threads > 0 ? threads : default_threads();
        if (*shadow) return cmd_shadow_sim(sa, t);
        if (*compile) return cmd_compile(c_in, c_scheme, c_out, c_stats);
        if (*partition) return cmd_partition(p_in, p_n, p_method, p_report);
        if (*verify_cmd) return cmd_verify(v_modes, v_seed);
    } catch (const Error& e) {
        std::fprintf(stderr, "error[%s]: %s\n", e.code().c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[E_INTERNAL]: %s\n", e.what());
        return 3;
    }
    return 0;
}

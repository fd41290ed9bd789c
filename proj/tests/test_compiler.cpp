#include <catch_amalgamated.hpp>

#include "fermi/compiler.hpp"
#include "fermi/dense.hpp"
#include "helpers.hpp"

#include <numeric>

using namespace fermi;
using dense::Matrix;

namespace {

double diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Dense unitary of a program, built gate by gate from closed forms.
Matrix program_unitary(const GateProgram& p) {
    Matrix U = dense::identity(p.n_qubits);
    for (const auto& g : p.gates) {
        Matrix G = g.kind == Gate::Pauli ? dense::pauli_matrix(PauliString{g.letters, 0})
                                         : dense::plane_rotation(p.n_qubits, g.axis(), g.theta);
        U = (G * U).eval();
    }
    return U;
}

// Largest deviation of U gamma_mu U^dagger from sum_nu Q_{nu mu} gamma_nu.
double conjugation_error(const Matrix& U, const Eigen::MatrixXd& Q) {
    const int n = static_cast<int>(Q.rows()) / 2;
    double worst = 0.0;
    for (int mu = 0; mu < 2 * n; ++mu) {
        Matrix rhs = Matrix::Zero(U.rows(), U.cols());
        for (int nu = 0; nu < 2 * n; ++nu) rhs += Q(nu, mu) * dense::build_majorana(n, nu);
        worst = std::max(worst, testutil::max_abs(U * dense::build_majorana(n, mu) * U.adjoint() - rhs));
    }
    return worst;
}

int pauli_layers(const GateProgram& p) {
    int k = 0;
    for (const auto& g : p.gates) k += g.kind == Gate::Pauli;
    return k;
}

Eigen::MatrixXd with_det_minus(Eigen::MatrixXd Q) {
    if (Q.determinant() > 0) Q.col(0) *= -1.0;
    return Q;
}

} // namespace

TEST_CASE("identity compiles to an empty rotation list", "[compiler]") {
    for (int n = 1; n <= 4; ++n) {
        Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2 * n, 2 * n);
        for (const auto& p : {compile_naive(I), compile_blocked(I)}) {
            REQUIRE(p.gates.size() == 1);
            REQUIRE(p.gates[0].kind == Gate::Pauli);
            REQUIRE(p.gates[0].letters == std::string(n, 'I'));
            REQUIRE(program_stats(p).rotations == 0);
        }
    }
}

TEST_CASE("sign-diagonal inputs compile to a Pauli layer", "[compiler]") {
    const int n = 3;
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(6, 6);
    D(4, 4) = D(5, 5) = -1;
    GateProgram p = compile_naive(D);
    REQUIRE(p.gates.size() == 1);
    REQUIRE(p.gates[0].letters == "IIZ");

    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(6, 6);
    E(1, 1) = -1; // signs (1, -1) on qubit 0
    p = compile_naive(E);
    REQUIRE(p.gates.size() == 1);
    REQUIRE(p.gates[0].letters == "XZZ");
    E(1, 1) = 1;
    E(0, 0) = -1;
    REQUIRE(compile_naive(E).gates[0].letters == "YZZ");

    GateProgram z{n, {Gate{Gate::Pauli, 0, 0.0, "ZII"}}};
    Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(6, 6);
    expect(0, 0) = expect(1, 1) = -1;
    REQUIRE(diff(program_to_orthogonal(z), expect) == 0.0);
}

TEST_CASE("a single Z rotation maps to a plane rotation", "[compiler]") {
    const double th = 0.37;
    GateProgram p{2, {Gate{Gate::ZRot, 0, th, ""}}};
    Eigen::MatrixXd G = Eigen::MatrixXd::Identity(4, 4);
    G(0, 0) = G(1, 1) = std::cos(th);
    G(0, 1) = -std::sin(th);
    G(1, 0) = std::sin(th);
    REQUIRE(diff(program_to_orthogonal(p), G) < 1e-15);
    REQUIRE(conjugation_error(program_unitary(p), G) < 1e-12);

    GateProgram x{2, {Gate{Gate::XXRot, 0, th, ""}}};
    REQUIRE(conjugation_error(program_unitary(x), program_to_orthogonal(x)) < 1e-12);
    Matrix XX = dense::pauli_matrix(PauliString{"XX", 0});
    Matrix expect = std::cos(th / 2) * dense::identity(2) - dense::cplx(0, std::sin(th / 2)) * XX;
    REQUIRE(testutil::max_abs(program_unitary(x) - expect) < 1e-14);
}

TEST_CASE("compiled programs reproduce Q through the dense representation", "[compiler]") {
    Rng rng = make_stream(41, 0);
    for (int n = 1; n <= 5; ++n)
        for (int t = 0; t < 4; ++t) {
            Eigen::MatrixXd Q = testutil::random_orthogonal(2 * n, rng);
            if (t % 2) Q = with_det_minus(Q);
            for (const auto& p : {compile_naive(Q), compile_blocked(Q)}) {
                REQUIRE(pauli_layers(p) == 1);
                REQUIRE(conjugation_error(program_unitary(p), Q) < 1e-9);
            }
        }
}

TEST_CASE("round trip through program_to_orthogonal", "[compiler]") {
    Rng rng = make_stream(42, 0);
    for (int n = 2; n <= 8; ++n)
        for (int t = 0; t < 100; ++t) {
            Eigen::MatrixXd Q = testutil::random_orthogonal(2 * n, rng);
            if (t % 3 == 0) Q = with_det_minus(Q);
            GateProgram a = compile_naive(Q), b = compile_blocked(Q);
            REQUIRE(diff(program_to_orthogonal(a), Q) < 1e-9);
            REQUIRE(diff(program_to_orthogonal(b), Q) < 1e-9);
            REQUIRE(program_stats(a).rotations == n * (2 * n - 1));
        }
}

TEST_CASE("number-conserving rotations compile exactly", "[compiler]") {
    Rng rng = make_stream(43, 0);
    for (int n = 2; n <= 6; ++n) {
        Eigen::MatrixXd R = embed_unitary(testutil::random_unitary(n, rng));
        REQUIRE(diff(program_to_orthogonal(compile_naive(R)), R) < 1e-9);
        REQUIRE(diff(program_to_orthogonal(compile_blocked(R)), R) < 1e-9);
    }
}

TEST_CASE("invalid inputs are rejected", "[compiler]") {
    REQUIRE_THROWS_AS(compile_naive(Eigen::MatrixXd::Identity(3, 3)), Error);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(4, 4);
    bad(0, 1) = 1e-3;
    REQUIRE_THROWS_AS(compile_blocked(bad), Error);
    REQUIRE_THROWS_AS(program_to_orthogonal(GateProgram{2, {Gate{Gate::XXRot, 1, 0.1, ""}}}), Error);
    REQUIRE_THROWS_AS(program_to_orthogonal(GateProgram{2, {Gate{Gate::Pauli, 0, 0, "IX"}, Gate{Gate::Pauli, 0, 0, "IX"}}}), Error);
    REQUIRE_THROWS_AS(program_to_orthogonal(GateProgram{2, {Gate{Gate::Pauli, 0, 0, "IQ"}}}), Error);
    REQUIRE_THROWS_AS(program_to_orthogonal(GateProgram{2, {Gate{Gate::Pauli, 0, 0, "I"}}}), Error);
}

TEST_CASE("depth layering", "[compiler]") {
    GateProgram p{3,
                  {Gate{Gate::ZRot, 0, 0.1, ""}, Gate{Gate::ZRot, 2, 0.1, ""}, Gate{Gate::XXRot, 0, 0.1, ""},
                   Gate{Gate::XXRot, 1, 0.1, ""}, Gate{Gate::Pauli, 0, 0, "IZI"}}};
    GateStats s = program_stats(p);
    REQUIRE(s.rotations == 4);
    REQUIRE(s.two_qubit == 2);
    REQUIRE(s.one_qubit == 3);
    REQUIRE(s.depth == 4);
}

TEST_CASE("gate counts scale quadratically and depth linearly", "[compiler]") {
    Rng rng = make_stream(44, 0);
    std::vector<double> ln, lc_naive, lc_blocked, ld_naive, ld_blocked;
    for (int n : {4, 8, 16, 32}) {
        Eigen::MatrixXd Q = testutil::random_orthogonal(2 * n, rng);
        CompileComparison c = stats_compare(Q);
        REQUIRE(c.naive.rotations == n * (2 * n - 1));
        REQUIRE(c.blocked.rotations <= 3 * n * (n - 1) + n);
        ln.push_back(std::log(n));
        lc_naive.push_back(std::log(c.naive.rotations));
        lc_blocked.push_back(std::log(c.blocked.rotations));
        ld_naive.push_back(std::log(c.naive.depth));
        ld_blocked.push_back(std::log(c.blocked.depth));
    }
    auto slope = [&](const std::vector<double>& y) {
        const double mx = std::accumulate(ln.begin(), ln.end(), 0.0) / ln.size();
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            sxy += (ln[i] - mx) * (y[i] - my);
            sxx += (ln[i] - mx) * (ln[i] - mx);
        }
        return sxy / sxx;
    };
    REQUIRE(std::abs(slope(lc_naive) - 2.0) < 0.2);
    REQUIRE(std::abs(slope(lc_blocked) - 2.0) < 0.2);
    REQUIRE(std::abs(slope(ld_naive) - 1.0) < 0.2);
    REQUIRE(std::abs(slope(ld_blocked) - 1.0) < 0.2);
}

#pragma once

// Brute-force 2^n Fock-space reference. Only tests and the verify command use it.

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "majorana.hpp"

namespace fermi::dense {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr int max_modes = 12;

inline void guard(int n, int limit = max_modes) {
    if (n < 1 || n > limit)
        throw Error("E_GUARD", "dense oracle limited to 1 <= n <= " + std::to_string(limit) + ", got " + std::to_string(n));
}

// Basis index of a bitstring; mode 0 is the most significant tensor factor.
inline std::size_t basis_index(const Bits& b) {
    std::size_t idx = 0;
    for (auto bit : b) idx = (idx << 1) | bit;
    return idx;
}

inline Bits basis_bits(std::size_t idx, int n) {
    Bits b(n);
    for (int p = n - 1; p >= 0; --p, idx >>= 1) b[p] = static_cast<std::uint8_t>(idx & 1);
    return b;
}

inline Matrix pauli_matrix(const PauliString& ps) {
    const int n = static_cast<int>(ps.letters.size());
    guard(n);
    const std::size_t dim = std::size_t{1} << n;
    Matrix out = Matrix::Zero(dim, dim);
    std::size_t flip = 0;
    for (int q = 0; q < n; ++q)
        if (ps.letters[q] == 'X' || ps.letters[q] == 'Y') flip |= std::size_t{1} << (n - 1 - q);
    for (std::size_t x = 0; x < dim; ++x) {
        int ph = ps.phase;
        for (int q = 0; q < n; ++q) {
            bool one = (x >> (n - 1 - q)) & 1;
            switch (ps.letters[q]) {
                case 'Z': if (one) ph += 2; break;
                case 'Y': ph += one ? 3 : 1; break;
                default: break;
            }
        }
        out(x ^ flip, x) = i_pow(ph);
    }
    return out;
}

inline Matrix build_majorana(int n, int mu) {
    guard(n);
    if (mu < 0 || mu >= 2 * n) throw Error("E_INDEX", "Majorana index out of range");
    return pauli_matrix(majorana_pauli(n, mu));
}

inline Matrix build_monomial(const Monomial& m) {
    guard(m.n_modes);
    return pauli_matrix(to_pauli(m));
}

inline Matrix identity(int n) {
    guard(n);
    return Matrix::Identity(std::size_t{1} << n, std::size_t{1} << n);
}

inline Matrix build_polynomial(const MajoranaPolynomial& poly) {
    Matrix out = poly.constant * identity(poly.n_modes);
    for (const auto& [idx, c] : poly.terms) out += c * build_monomial(Monomial::make(poly.n_modes, idx));
    return out;
}

// Annihilation operator a_p = (gamma_2p + i gamma_2p+1) / 2.
inline Matrix annihilation(int n, int p) {
    return 0.5 * (build_majorana(n, 2 * p) + cplx(0, 1) * build_majorana(n, 2 * p + 1));
}

// H = (-i/4) sum A_{mu nu} gamma_mu gamma_nu.
inline Matrix quadratic_hamiltonian(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows()) / 2;
    guard(n);
    std::vector<Matrix> g;
    for (int mu = 0; mu < 2 * n; ++mu) g.push_back(build_majorana(n, mu));
    Matrix h = Matrix::Zero(g[0].rows(), g[0].cols());
    for (int mu = 0; mu < 2 * n; ++mu)
        for (int nu = 0; nu < 2 * n; ++nu)
            if (A(mu, nu) != 0.0) h += cplx(0, -0.25 * A(mu, nu)) * g[mu] * g[nu];
    return h;
}

inline Matrix one_body_hamiltonian(const Eigen::MatrixXcd& h1) {
    const int n = static_cast<int>(h1.rows());
    guard(n);
    std::vector<Matrix> a;
    for (int p = 0; p < n; ++p) a.push_back(annihilation(n, p));
    Matrix h = Matrix::Zero(a[0].rows(), a[0].cols());
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            if (h1(p, q) != cplx(0)) h += h1(p, q) * a[p].adjoint() * a[q];
    return h;
}

// e^{-i H} for Hermitian H (symmetrised before diagonalisation).
inline Matrix exp_minus_i(const Matrix& h) {
    Matrix herm = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    Vector ph = (es.eigenvalues().cast<cplx>() * cplx(0, -1)).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix exp_quadratic(const Eigen::MatrixXd& A) {
    guard(static_cast<int>(A.rows()) / 2, 10);
    return exp_minus_i(quadratic_hamiltonian(A));
}

inline Matrix exp_one_body(const Eigen::MatrixXcd& h1) {
    guard(static_cast<int>(h1.rows()), 10);
    return exp_minus_i(one_body_hamiltonian(h1));
}

// exp of a single plane rotation: U gamma_mu U^dagger = sum_nu G_{nu mu} gamma_nu where
// G rotates axes (mu, mu+1) by theta. Closed form of e^{-(theta/2) gamma_mu gamma_mu+1}.
inline Matrix plane_rotation(int n, int mu, double theta) {
    Matrix gg = build_majorana(n, mu) * build_majorana(n, mu + 1);
    return std::cos(theta / 2) * identity(n) - std::sin(theta / 2) * gg;
}

// Unitary flipping the sign of gamma_mu only: gamma_mu times the parity operator.
inline Matrix axis_reflection(int n, int mu) {
    std::vector<int> all(2 * n);
    std::iota(all.begin(), all.end(), 0);
    return build_majorana(n, mu) * build_monomial(Monomial::make(n, all));
}

// A unitary with U gamma_mu U^dagger = sum_nu Q_{nu mu} gamma_nu for any Q in O(2n).
// Q is reduced to a diagonal of signs by adjacent plane rotations (Q = G_1...G_L D)
// and each factor is realised by its closed form.
inline Matrix gaussian_unitary(const Eigen::MatrixXd& Q) {
    const int m = static_cast<int>(Q.rows());
    const int n = m / 2;
    guard(n, 10);
    if (Q.cols() != m || m % 2) throw Error("E_DIM", "Q must be 2n x 2n");
    Eigen::MatrixXd W = Q;
    Matrix U = identity(n);
    for (int c = 0; c < m - 1; ++c)
        for (int r = m - 1; r > c; --r) {
            double th = std::atan2(W(r, c), W(r - 1, c));
            if (W(r, c) == 0.0) continue;
            double cs = std::cos(th), sn = std::sin(th);
            for (int j = 0; j < m; ++j) {
                double a = W(r - 1, j), b = W(r, j);
                W(r - 1, j) = cs * a + sn * b;
                W(r, j) = -sn * a + cs * b;
            }
            U = U * plane_rotation(n, r - 1, th);
        }
    for (int mu = 0; mu < m; ++mu)
        if (W(mu, mu) < 0) U = U * axis_reflection(n, mu);
    return U;
}

struct State {
    int n_modes = 0;
    Vector amp;
};

inline State basis_state(const Bits& b) {
    const int n = static_cast<int>(b.size());
    guard(n);
    Vector v = Vector::Zero(std::size_t{1} << n);
    v(basis_index(b)) = 1.0;
    return {n, v};
}

inline State vacuum(int n) { return basis_state(Bits(n, 0)); }

inline State apply(const Matrix& U, const State& s) {
    if (U.cols() != s.amp.size()) throw Error("E_DIM", "dimension mismatch");
    return {s.n_modes, U * s.amp};
}

inline cplx expectation(const State& s, const Matrix& op) {
    if (op.rows() != s.amp.size()) throw Error("E_DIM", "dimension mismatch");
    return s.amp.dot(op * s.amp);
}

inline cplx expectation(const Matrix& rho, const Matrix& op) {
    if (op.rows() != rho.rows()) throw Error("E_DIM", "dimension mismatch");
    return (op * rho).trace();
}

inline Eigen::VectorXd born_distribution(const State& s) { return s.amp.cwiseAbs2(); }

inline Matrix density(const State& s) { return s.amp * s.amp.adjoint(); }

} // namespace fermi::dense

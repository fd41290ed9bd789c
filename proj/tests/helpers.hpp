#pragma once

// Shared random-instance generators for the test binaries.

#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "fermi/dense.hpp"
#include "fermi/majorana.hpp"

namespace testutil {

using fermi::Monomial;

inline double normal(fermi::Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline Eigen::MatrixXd random_antisymmetric(int m, fermi::Rng& rng, double scale = 1.0) {
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = scale * normal(rng);
    return a - a.transpose();
}

// Haar-ish orthogonal matrix from QR of a Gaussian matrix (either determinant).
inline Eigen::MatrixXd random_orthogonal(int m, fermi::Rng& rng) {
    Eigen::MatrixXd g(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < m; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

inline Eigen::MatrixXcd random_unitary(int n, fermi::Rng& rng) {
    Eigen::MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = {normal(rng), normal(rng)};
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    return qr.householderQ();
}

inline Eigen::MatrixXd vacuum_m(int n) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int p = 0; p < n; ++p) {
        m(2 * p, 2 * p + 1) = 1;
        m(2 * p + 1, 2 * p) = -1;
    }
    return m;
}

// Random Gaussian state: covariance plus its dense density matrix.
// Pure states come from U_{e^A} = e^{+iH(A)} applied to |0> (optionally times X on the last qubit,
// flipping parity); mixed states add random occupations lambda_p.
struct GaussianInstance {
    Eigen::MatrixXd M;
    fermi::dense::Matrix rho;
};

inline GaussianInstance random_gaussian(int n, fermi::Rng& rng, bool odd = false, bool mixed = false) {
    Eigen::MatrixXd A = random_antisymmetric(2 * n, rng, 0.7);
    Eigen::MatrixXd Q = A.exp();
    fermi::dense::Matrix U = fermi::dense::exp_quadratic(-A);
    if (odd) {
        Q.col(2 * n - 1) *= -1.0;
        fermi::PauliString x{std::string(n, 'I'), 0};
        x.letters[n - 1] = 'X';
        U = U * fermi::dense::pauli_matrix(x);
    }
    Eigen::VectorXd lam = Eigen::VectorXd::Ones(n);
    if (mixed)
        for (int p = 0; p < n; ++p) lam(p) = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    fermi::dense::Matrix rho0 = fermi::dense::identity(n) / std::pow(2.0, n);
    for (int p = 0; p < n; ++p) {
        L(2 * p, 2 * p + 1) = lam(p);
        L(2 * p + 1, 2 * p) = -lam(p);
        Monomial z = Monomial::make(n, {2 * p, 2 * p + 1});
        rho0 = (rho0 + lam(p) * fermi::dense::build_monomial(z) * rho0).eval();
    }
    return {Q * L * Q.transpose(), U * rho0 * U.adjoint()};
}

// All ascending subsets of {0..m-1} with size in [lo, hi].
inline std::vector<std::vector<int>> subsets(int m, int lo, int hi) {
    std::vector<std::vector<int>> out;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        int c = __builtin_popcount(mask);
        if (c < lo || c > hi) continue;
        std::vector<int> s;
        for (int i = 0; i < m; ++i)
            if (mask >> i & 1) s.push_back(i);
        out.push_back(s);
    }
    return out;
}

inline Monomial random_monomial(int n, fermi::Rng& rng) {
    std::vector<int> idx;
    for (int mu = 0; mu < 2 * n; ++mu)
        if (rng() & 1) idx.push_back(mu);
    return Monomial::make(n, idx, static_cast<int>(rng() % 4));
}

inline fermi::SignedPermutation random_signed_perm(int n, fermi::Rng& rng) {
    std::vector<int> p(2 * n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    std::vector<int> s(2 * n);
    for (auto& v : s) v = (rng() & 1) ? 1 : -1;
    return fermi::SignedPermutation::make(n, p, s);
}

inline double max_abs(const fermi::dense::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace testutil

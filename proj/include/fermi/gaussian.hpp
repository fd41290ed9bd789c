#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "majorana.hpp"

namespace fermi {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

namespace detail {

inline double antisymmetry_defect(const MatrixXd& a) { return (a + a.transpose()).cwiseAbs().maxCoeff(); }

inline void require_square_even(const MatrixXd& a, const char* what) {
    if (a.rows() != a.cols() || a.rows() % 2 || a.rows() == 0)
        throw Error("E_DIM", std::string(what) + " must be a nonempty 2n x 2n matrix");
}

inline void require_orthogonal(const MatrixXd& q, double eps) {
    if (q.rows() != q.cols()) throw Error("E_DIM", "orthogonal matrix must be square");
    double d = (q * q.transpose() - MatrixXd::Identity(q.rows(), q.rows())).cwiseAbs().maxCoeff();
    if (!(d <= eps)) throw Error("E_ORTHOGONAL", "matrix is not orthogonal (max |QQ^T - I| = " + std::to_string(d) + ")");
}

} // namespace detail

// M_{mu nu} = -(i/2) tr([gamma_mu, gamma_nu] rho).
struct Covariance {
    int n_modes = 0;
    MatrixXd M;

    static Covariance make(const MatrixXd& m) {
        detail::require_square_even(m, "covariance");
        if (detail::antisymmetry_defect(m) > tol().antisymmetric) throw Error("E_ANTISYM", "covariance is not antisymmetric");
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(-(m * m));
        const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (lo < -tol().spectrum || hi > 1.0 + tol().spectrum)
            throw Error("E_STATE", "covariance eigenvalues of -M^2 outside [0,1]");
        return {static_cast<int>(m.rows()) / 2, m};
    }

    bool is_pure() const {
        return (M * M.transpose() - MatrixXd::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff() <= tol().pure;
    }
};

inline Covariance vacuum_covariance(int n) {
    if (n < 1) throw Error("E_MODES", "vacuum needs n >= 1");
    MatrixXd m = MatrixXd::Zero(2 * n, 2 * n);
    for (int p = 0; p < n; ++p) {
        m(2 * p, 2 * p + 1) = 1.0;
        m(2 * p + 1, 2 * p) = -1.0;
    }
    return {n, m};
}

// State after U_Q: M -> Q M Q^T.
inline Covariance evolve(const Covariance& g, const MatrixXd& Q) {
    if (Q.rows() != g.M.rows()) throw Error("E_MODES", "evolve: dimension mismatch");
    detail::require_orthogonal(Q, tol().orthogonal);
    MatrixXd out = Q * g.M * Q.transpose();
    return {g.n_modes, 0.5 * (out - out.transpose())};
}

// Same for a signed permutation, O(n^2): M'_{ab} = s_a s_b M_{pi(a) pi(b)}.
inline Covariance evolve(const Covariance& g, const SignedPermutation& q) {
    if (q.n_modes != g.n_modes) throw Error("E_MODES", "evolve: mode-count mismatch");
    const int m = 2 * g.n_modes;
    MatrixXd out(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) out(a, b) = q.signs[a] * q.signs[b] * g.M(q.perm[a], q.perm[b]);
    return {g.n_modes, out};
}

// H = (-i/4) gamma^T A gamma.
struct QuadraticHamiltonian {
    int n_modes = 0;
    MatrixXd A;

    static QuadraticHamiltonian make(const MatrixXd& a) {
        detail::require_square_even(a, "quadratic Hamiltonian");
        if (detail::antisymmetry_defect(a) > tol().validate) throw Error("E_ANTISYM", "A is not antisymmetric");
        return {static_cast<int>(a.rows()) / 2, a};
    }
};

// A = Q Lambda Q^T, Lambda = blocks [[0, eps_p], [-eps_p, 0]], eps descending, eps >= 0.
struct CanonicalForm {
    MatrixXd Q;
    std::vector<double> eps;
    int det_sign = 1;

    MatrixXd lambda() const {
        const int n = static_cast<int>(eps.size());
        MatrixXd l = MatrixXd::Zero(2 * n, 2 * n);
        for (int p = 0; p < n; ++p) {
            l(2 * p, 2 * p + 1) = eps[p];
            l(2 * p + 1, 2 * p) = -eps[p];
        }
        return l;
    }
};

inline CanonicalForm canonical_form(const QuadraticHamiltonian& h) {
    const int m = 2 * h.n_modes;
    Eigen::RealSchur<MatrixXd> rs(h.A);
    const MatrixXd& T = rs.matrixT();
    const MatrixXd& U = rs.matrixU();

    struct Pair { double eps; int a, b; };
    std::vector<Pair> pairs;
    std::vector<int> zeros;
    for (int i = 0; i < m;) {
        if (i + 1 < m && T(i + 1, i) != 0.0) {
            double e = 0.5 * (T(i, i + 1) - T(i + 1, i));
            if (e < 0) pairs.push_back({-e, i + 1, i});
            else pairs.push_back({e, i, i + 1});
            i += 2;
        } else {
            zeros.push_back(i);
            i += 1;
        }
    }
    for (std::size_t k = 0; k + 1 < zeros.size(); k += 2) pairs.push_back({0.0, zeros[k], zeros[k + 1]});
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.eps > y.eps; });

    CanonicalForm cf;
    cf.Q.resize(m, m);
    for (int p = 0; p < h.n_modes; ++p) {
        cf.Q.col(2 * p) = U.col(pairs[p].a);
        cf.Q.col(2 * p + 1) = U.col(pairs[p].b);
        cf.eps.push_back(pairs[p].eps);
    }
    cf.det_sign = cf.Q.determinant() < 0 ? -1 : 1;
    return cf;
}

// Eigenvalues of H: (1/2) sum_p (-1)^{b_p} eps_p over all b, ascending.
inline std::vector<double> spectrum(const QuadraticHamiltonian& h) {
    if (h.n_modes > 20) throw Error("E_GUARD", "spectrum materialisation limited to n <= 20");
    CanonicalForm cf = canonical_form(h);
    const int n = h.n_modes;
    std::vector<double> out(std::size_t{1} << n);
    for (std::size_t b = 0; b < out.size(); ++b) {
        double e = 0;
        for (int p = 0; p < n; ++p) e += ((b >> p) & 1 ? -0.5 : 0.5) * cf.eps[p];
        out[b] = e;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Parlett-Reid tridiagonalisation with partial pivoting.
inline double pfaffian(const MatrixXd& a_in) {
    if (a_in.rows() != a_in.cols()) throw Error("E_DIM", "pfaffian needs a square matrix");
    if (a_in.rows() == 0) return 1.0;
    const double scale = std::max(1.0, a_in.cwiseAbs().maxCoeff());
    if (detail::antisymmetry_defect(a_in) > tol().validate * scale) throw Error("E_ANTISYM", "pfaffian input is not antisymmetric");
    const int n = static_cast<int>(a_in.rows());
    if (n == 0) return 1.0;
    if (n % 2) return 0.0;
    MatrixXd A = a_in;
    double pf = 1.0;
    for (int k = 0; k < n - 1; k += 2) {
        Eigen::Index kp;
        A.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&kp);
        kp += k + 1;
        if (kp != k + 1) {
            A.row(k + 1).swap(A.row(kp));
            A.col(k + 1).swap(A.col(kp));
            pf = -pf;
        }
        if (A(k + 1, k) == 0.0) return 0.0;
        pf *= A(k, k + 1);
        if (k + 2 < n) {
            Eigen::VectorXd tau = A.row(k).tail(n - k - 2).transpose() / A(k, k + 1);
            Eigen::VectorXd col = A.col(k + 1).tail(n - k - 2);
            A.bottomRightCorner(n - k - 2, n - k - 2) += tau * col.transpose() - col * tau.transpose();
        }
    }
    return pf;
}

// tr(i^k Gamma_mu rho) = i^k Pf(M[mu, mu]); zero for odd degree.
inline std::complex<double> wick_expectation(const Covariance& g, const Monomial& m) {
    detail::check_modes(g.n_modes, m.n_modes);
    const int k = m.degree();
    if (k % 2) return 0.0;
    if (k == 0) return i_pow(m.phase);
    MatrixXd sub(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = g.M(m.indices[i], m.indices[j]);
    return i_pow(m.phase) * pfaffian(sub);
}

struct SlaterDeterminant {
    int n_modes = 0;
    int eta = 0;
    MatrixXcd V; // n x eta, orthonormal columns

    static SlaterDeterminant make(const MatrixXcd& v) {
        const int n = static_cast<int>(v.rows()), eta = static_cast<int>(v.cols());
        if (n < 1 || eta > n) throw Error("E_DIM", "Slater determinant needs 0 <= eta <= n");
        if (eta > 0) {
            double d = (v.adjoint() * v - MatrixXcd::Identity(eta, eta)).cwiseAbs().maxCoeff();
            if (d > tol().validate) throw Error("E_ISOMETRY", "V columns are not orthonormal");
        }
        return {n, eta, v};
    }
};

// Haar-random n x eta isometry (first columns of a QR-orthonormalised complex Gaussian matrix).
inline SlaterDeterminant random_slater(int n, int eta, Rng& rng) {
    if (n < 1 || eta < 0 || eta > n) throw Error("E_RANGE", "random Slater determinant needs 0 <= eta <= n");
    std::normal_distribution<double> nd(0.0, 1.0);
    MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = {nd(rng), nd(rng)};
    MatrixXcd q = Eigen::HouseholderQR<MatrixXcd>(g).householderQ();
    return SlaterDeterminant::make(q.leftCols(eta));
}

inline std::complex<double> slater_amplitude(const SlaterDeterminant& s, const std::vector<int>& occ) {
    if (static_cast<int>(occ.size()) != s.eta) throw Error("E_OCCUPATION", "occupation size must equal eta");
    for (std::size_t i = 0; i < occ.size(); ++i)
        if (occ[i] < 0 || occ[i] >= s.n_modes || (i && occ[i] <= occ[i - 1]))
            throw Error("E_OCCUPATION", "occupation must be ascending mode indices");
    if (s.eta == 0) return 1.0;
    MatrixXcd sub(s.eta, s.eta);
    for (int i = 0; i < s.eta; ++i) sub.row(i) = s.V.row(occ[i]);
    return sub.determinant();
}

// 1D_{pq} = <a_q^dagger a_p> = (V V^dagger)_{pq}.
inline MatrixXcd one_rdm(const SlaterDeterminant& s) { return s.V * s.V.adjoint(); }

// <a_{q1}^dagger ... a_{qk}^dagger a_{pk} ... a_{p1}> = det of 1D rows p, columns q.
inline std::complex<double> k_rdm_element(const MatrixXcd& d1, const std::vector<int>& p, const std::vector<int>& q) {
    if (p.size() != q.size()) throw Error("E_DIM", "k_rdm_element: index sets differ in size");
    const int k = static_cast<int>(p.size());
    if (k == 0) return 1.0;
    MatrixXcd sub(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = d1(p[i], q[j]);
    return sub.determinant();
}

// Covariance of a particle-conserving Gaussian state from its 1-RDM.
inline Covariance covariance_from_one_rdm(const MatrixXcd& d) {
    const int n = static_cast<int>(d.rows());
    MatrixXd m = MatrixXd::Zero(2 * n, 2 * n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            const double re = d(p, q).real(), im = d(p, q).imag(), delta = p == q ? 1.0 : 0.0;
            m(2 * p, 2 * q) = -2.0 * im;
            m(2 * p + 1, 2 * q + 1) = -2.0 * im;
            m(2 * p, 2 * q + 1) = delta - 2.0 * re;
            m(2 * p + 1, 2 * q) = 2.0 * re - delta;
        }
    return {n, 0.5 * (m - m.transpose())};
}

inline Covariance slater_covariance(const SlaterDeterminant& s) { return covariance_from_one_rdm(one_rdm(s)); }

inline MatrixXd embed_unitary(const MatrixXcd& u) {
    const int n = static_cast<int>(u.rows());
    if (u.cols() != n) throw Error("E_DIM", "embed_unitary needs a square matrix");
    if ((u.adjoint() * u - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() > tol().orthogonal)
        throw Error("E_UNITARY", "embed_unitary input is not unitary");
    MatrixXd r(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            r(2 * i, 2 * j) = u(i, j).real();
            r(2 * i, 2 * j + 1) = -u(i, j).imag();
            r(2 * i + 1, 2 * j) = u(i, j).imag();
            r(2 * i + 1, 2 * j + 1) = u(i, j).real();
        }
    return r;
}

namespace detail {

// Projects the state onto outcome `bit` of mode p (in place) and returns the
// probability of that outcome before projection.
inline double measure_mode(MatrixXd& M, int p, int bit) {
    const int m = static_cast<int>(M.rows());
    const int a = 2 * p, b = 2 * p + 1;
    const double s = bit ? -1.0 : 1.0;
    const double prob = std::clamp(0.5 * (1.0 + s * M(a, b)), 0.0, 1.0);
    const double denom = 1.0 + s * M(a, b);
    if (prob > tol().probability) {
        Eigen::VectorXd ca = M.col(a), cb = M.col(b);
        // M'_{xy} = M_xy - s (M_xa M_yb - M_xb M_ya) / (1 + s M_ab)
        M.noalias() -= (s / denom) * (ca * cb.transpose() - cb * ca.transpose());
    }
    M.row(a).setZero();
    M.row(b).setZero();
    M.col(a).setZero();
    M.col(b).setZero();
    M(a, b) = s;
    M(b, a) = -s;
    (void)m;
    return prob;
}

} // namespace detail

// Exact Born sample: modes measured in ascending order, each conditional
// probability read from the updated covariance.
inline Bits sample_measurement(const Covariance& g, Rng& rng) {
    MatrixXd M = g.M;
    Bits out(g.n_modes);
    for (int p = 0; p < g.n_modes; ++p) {
        double p0 = std::clamp(0.5 * (1.0 + M(2 * p, 2 * p + 1)), 0.0, 1.0);
        if (p0 < tol().probability) p0 = 0.0;
        if (p0 > 1.0 - tol().probability) p0 = 1.0;
        const int bit = uniform01(rng) < p0 ? 0 : 1;
        detail::measure_mode(M, p, bit);
        out[p] = static_cast<std::uint8_t>(bit);
    }
    return out;
}

// Exact probability of observing b.
inline double born_probability(const Covariance& g, const Bits& b) {
    if (static_cast<int>(b.size()) != g.n_modes) throw Error("E_LENGTH", "bitstring length mismatch");
    MatrixXd M = g.M;
    double prob = 1.0;
    for (int p = 0; p < g.n_modes && prob > 0.0; ++p) {
        double c = detail::measure_mode(M, p, b[p]);
        prob *= c <= tol().probability ? 0.0 : c;
    }
    return prob;
}

} // namespace fermi

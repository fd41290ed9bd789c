#pragma once

// Oracle-equivalence checks of every fast path against the dense reference,
// run at a single mode count. Used by `fermi verify`.

#include <functional>
#include <string>
#include <vector>

#include "compiler.hpp"
#include "dense.hpp"
#include "gaussian.hpp"
#include "partition.hpp"
#include "shadows.hpp"

namespace fermi::verify {

struct Check {
    std::string name;
    bool passed = false;
    double worst = 0.0; // largest observed deviation
    double limit = 0.0;
};

constexpr int max_modes = 6;

inline double gauss(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline MatrixXd random_orthogonal(int m, Rng& rng) {
    MatrixXd g(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ();
    for (int j = 0; j < m; ++j)
        if (qr.matrixQR()(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

inline MatrixXd random_antisymmetric(int m, Rng& rng) {
    MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = gauss(rng);
    return a - a.transpose();
}

inline std::vector<std::vector<int>> even_sets(int n, int max_degree) {
    std::vector<std::vector<int>> out;
    for (int k = 2; k <= std::min(max_degree, 2 * n); k += 2)
        for (auto& c : fermi::detail::combinations(2 * n, k)) out.push_back(std::move(c));
    return out;
}

// Random pure Gaussian state as a covariance and as a dense vector.
struct PureState {
    Covariance g;
    dense::State psi;
};

inline PureState random_pure(int n, Rng& rng) {
    MatrixXd Q = random_orthogonal(2 * n, rng);
    return {evolve(vacuum_covariance(n), Q), dense::apply(dense::gaussian_unitary(Q), dense::vacuum(n))};
}

inline Check wick_vs_dense(int n, Rng& rng) {
    Check c{"wick expectations (degree <= 6) vs dense", true, 0.0, 1e-9};
    const auto sets = even_sets(n, 6);
    for (int t = 0; t < 5; ++t) {
        PureState s = random_pure(n, rng);
        for (const auto& idx : sets) {
            Monomial m = Monomial::make(n, idx);
            const auto want = dense::expectation(s.psi, dense::build_monomial(m));
            c.worst = std::max(c.worst, std::abs(wick_expectation(s.g, m) - want));
        }
    }
    c.passed = c.worst <= c.limit;
    return c;
}

inline Check born_vs_dense(int n, Rng& rng) {
    Check c{"measurement probabilities vs dense Born rule", true, 0.0, 1e-10};
    for (int t = 0; t < 3; ++t) {
        PureState s = random_pure(n, rng);
        Eigen::VectorXd p = dense::born_distribution(s.psi);
        for (Eigen::Index x = 0; x < p.size(); ++x)
            c.worst = std::max(c.worst, std::abs(born_probability(s.g, dense::basis_bits(x, n)) - p(x)));
    }
    c.passed = c.worst <= c.limit;
    return c;
}

inline Check spectrum_vs_dense(int n, Rng& rng) {
    Check c{"free-fermion spectrum vs dense eigenvalues", true, 0.0, 1e-9};
    for (int t = 0; t < 10; ++t) {
        MatrixXd A = random_antisymmetric(2 * n, rng);
        auto fast = spectrum(QuadraticHamiltonian::make(A));
        Eigen::SelfAdjointEigenSolver<dense::Matrix> es(dense::quadratic_hamiltonian(A), Eigen::EigenvaluesOnly);
        for (std::size_t k = 0; k < fast.size(); ++k) c.worst = std::max(c.worst, std::abs(fast[k] - es.eigenvalues()(k)));
    }
    c.passed = c.worst <= c.limit;
    return c;
}

inline double conjugation_error(const GateProgram& p, const MatrixXd& Q) {
    const int n = p.n_qubits;
    dense::Matrix U = dense::identity(n);
    for (const auto& g : p.gates) {
        dense::Matrix G = g.kind == Gate::Pauli ? dense::pauli_matrix(PauliString{g.letters, 0}) : dense::plane_rotation(n, g.axis(), g.theta);
        U = (G * U).eval();
    }
    double worst = 0.0;
    for (int mu = 0; mu < 2 * n; ++mu) {
        dense::Matrix rhs = dense::Matrix::Zero(U.rows(), U.cols());
        for (int nu = 0; nu < 2 * n; ++nu) rhs += Q(nu, mu) * dense::build_majorana(n, nu);
        worst = std::max(worst, (U * dense::build_majorana(n, mu) * U.adjoint() - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

inline Check compiler_vs_dense(int n, Rng& rng) {
    Check c{"compiled programs vs dense conjugation", true, 0.0, 1e-8};
    for (int t = 0; t < 4; ++t) {
        MatrixXd Q = random_orthogonal(2 * n, rng);
        if (t % 2) Q.col(0) *= -1.0;
        for (const auto& p : {compile_naive(Q), compile_blocked(Q)}) {
            c.worst = std::max(c.worst, conjugation_error(p, Q));
            c.worst = std::max(c.worst, (program_to_orthogonal(p) - Q).cwiseAbs().maxCoeff());
        }
    }
    c.passed = c.worst <= c.limit;
    return c;
}

// Exhaustive ensemble average of the single-shot estimator for n <= 2; for larger n the
// accumulator is compared with the direct single-shot formula on random snapshots.
inline Check shadow_channel(int n, Rng& rng) {
    const auto sets = even_sets(n, 2 * n);
    if (n <= 2) {
        Check c{"exact shadow-channel identity over B(2n)", true, 0.0, 1e-12};
        PureState s = random_pure(n, rng);
        const auto elems = all_elements(n, Group::B);
        std::vector<double> avg(sets.size(), 0.0);
        for (const auto& q : elems) {
            Covariance gq = evolve(s.g, q);
            for (std::size_t x = 0; x < (std::size_t{1} << n); ++x) {
                const Bits b = dense::basis_bits(x, n);
                const double w = born_probability(gq, b) / elems.size();
                if (w == 0.0) continue;
                for (std::size_t k = 0; k < sets.size(); ++k) avg[k] += w * single_shot({q, b}, Monomial::make(n, sets[k]));
            }
        }
        for (std::size_t k = 0; k < sets.size(); ++k)
            c.worst = std::max(c.worst, std::abs(avg[k] - wick_expectation(s.g, Monomial::make(n, sets[k])).real()));
        c.passed = c.worst <= c.limit;
        return c;
    }
    Check c{"shadow accumulator vs single-shot estimator", true, 0.0, 1e-9};
    PureState s = random_pure(n, rng);
    const int k_max = std::min(n, 3);
    for (int t = 0; t < 20; ++t) {
        ShadowSample smp = acquire(s.g, sample_ensemble(n, rng, Group::B), NoiseModel{}, rng);
        ShadowAccumulator acc(n, k_max);
        acc.add(smp);
        Estimates e = acc.estimates();
        for (const auto& idx : sets) {
            if (static_cast<int>(idx.size()) > 2 * k_max) continue;
            c.worst = std::max(c.worst, std::abs(e.get(idx) - single_shot(smp, Monomial::make(n, idx))));
        }
    }
    c.passed = c.worst <= c.limit;
    return c;
}

inline ElectronicIntegrals random_integrals(int n, Rng& rng) {
    ElectronicIntegrals ints = ElectronicIntegrals::zeros(n);
    MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
    ints.h1 = g + g.transpose();
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s) {
                    auto orbit = symmetry_orbit(p, q, r, s);
                    if (orbit.front() != std::array<int, 4>{p, q, r, s}) continue;
                    const double v = gauss(rng);
                    for (const auto& [a, b, c, d] : orbit) ints.two(a, b, c, d) = v;
                }
    return ints;
}

inline dense::Matrix ladder_hamiltonian(const ElectronicIntegrals& ints) {
    const int n = ints.n;
    std::vector<dense::Matrix> a;
    for (int p = 0; p < n; ++p) a.push_back(dense::annihilation(n, p));
    dense::Matrix H = dense::Matrix::Zero(std::size_t{1} << n, std::size_t{1} << n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) H += ints.h1(p, q) * a[p].adjoint() * a[q];
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s)
                    if (ints.two(p, q, r, s) != 0.0) H += 0.5 * ints.two(p, q, r, s) * a[p].adjoint() * a[q].adjoint() * a[r] * a[s];
    return H;
}

inline Check majorana_form_vs_dense(int n, Rng& rng) {
    Check c{"Majorana form vs ladder-operator Hamiltonian", true, 0.0, 1e-9};
    for (int t = 0; t < 2; ++t) {
        ElectronicIntegrals ints = random_integrals(n, rng);
        c.worst = std::max(c.worst, (dense::build_polynomial(majorana_form(ints)) - ladder_hamiltonian(ints)).cwiseAbs().maxCoeff());
    }
    c.passed = c.worst <= c.limit;
    return c;
}

// Dense R_S with R_S H_S R_S^dag = sign * P_s.
inline dense::Matrix plan_unitary(int n, const RotationPlan& plan) {
    dense::Matrix R = dense::identity(n);
    const dense::Matrix Ps = dense::build_monomial(Monomial::make(n, plan.target()));
    for (const auto& [k, th] : plan.steps) {
        dense::Matrix X = dense::cplx(0, 1) * Ps * dense::build_monomial(Monomial::make(n, plan.members[k]));
        R = ((std::cos(th / 2) * dense::identity(n) - dense::cplx(0, std::sin(th / 2)) * X) * R).eval();
    }
    return R;
}

// Sum over sets of gamma * sign * R^dag P_s R, to be compared with the non-constant part of the polynomial.
inline double reassembly_error(const MajoranaPolynomial& poly, const AnticommutingPartition& part) {
    const int n = poly.n_modes;
    dense::Matrix H = dense::build_polynomial(poly) - poly.constant * dense::identity(n);
    dense::Matrix acc = dense::Matrix::Zero(H.rows(), H.cols());
    for (const auto& set : part.sets) {
        RotationPlan p = rotation_plan(set);
        dense::Matrix R = plan_unitary(n, p);
        acc += set.gamma * p.target_sign * R.adjoint() * dense::build_monomial(Monomial::make(n, p.target())) * R;
    }
    return (acc - H).cwiseAbs().maxCoeff();
}

inline bool all_pairs_anticommute(const AnticommutingPartition& part) {
    for (const auto& set : part.sets)
        for (std::size_t a = 0; a < set.members.size(); ++a)
            for (std::size_t b = a + 1; b < set.members.size(); ++b)
                if (!anticommutes(Monomial::make(part.n_modes, set.members[a]), Monomial::make(part.n_modes, set.members[b]))) return false;
    return true;
}

inline Check partition_vs_dense(int n, Rng& rng) {
    Check c{"partition sets anticommute and reassemble H", true, 0.0, 1e-8};
    MajoranaPolynomial poly = majorana_form(random_integrals(n, rng));
    std::vector<AnticommutingPartition> parts{greedy_partition(poly)};
    if (n >= 2) parts.push_back(apply_template(poly, analytic_partition(n)));
    for (const auto& part : parts) {
        if (!all_pairs_anticommute(part) || !norms_report(poly, part).bounds_ok) c.worst = std::max(c.worst, 1.0);
        c.worst = std::max(c.worst, reassembly_error(poly, part));
    }
    c.passed = c.worst <= c.limit;
    return c;
}

inline std::vector<Check> run_all(int n, std::uint64_t seed) {
    if (n < 1 || n > max_modes) throw Error("E_ARGS", "verify supports 1 <= modes <= " + std::to_string(max_modes));
    Rng rng = make_stream(seed, 0);
    std::vector<Check> out;
    out.push_back(wick_vs_dense(n, rng));
    out.push_back(born_vs_dense(n, rng));
    out.push_back(spectrum_vs_dense(n, rng));
    out.push_back(compiler_vs_dense(n, rng));
    out.push_back(shadow_channel(n, rng));
    out.push_back(majorana_form_vs_dense(n, rng));
    out.push_back(partition_vs_dense(n, rng));
    return out;
}

} // namespace fermi::verify

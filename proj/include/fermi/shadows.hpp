#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "gaussian.hpp"
#include "majorana.hpp"

namespace fermi {

enum class Group { B, Alt };

inline Group parse_group(const std::string& s) {
    if (s == "b" || s == "B") return Group::B;
    if (s == "alt" || s == "Alt") return Group::Alt;
    throw Error("E_ARGS", "group must be 'b' or 'alt', got '" + s + "'");
}

// Uniform element of B(2n) (random permutation, random signs) or of Alt(2n)
// (even permutation, all signs +1).
inline SignedPermutation sample_ensemble(int n, Rng& rng, Group group) {
    if (n < 1) throw Error("E_MODES", "ensemble needs n >= 1");
    const int m = 2 * n;
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = m - 1; i > 0; --i) {
        int j = static_cast<int>(std::uniform_int_distribution<int>(0, i)(rng));
        std::swap(perm[i], perm[j]);
    }
    std::vector<int> signs(m, 1);
    if (group == Group::B) {
        std::uint64_t bits = 0;
        for (int mu = 0; mu < m; ++mu) {
            if (mu % 64 == 0) bits = rng();
            signs[mu] = (bits >> (mu % 64)) & 1 ? -1 : 1;
        }
    } else {
        std::vector<int> tmp = perm;
        // Swapping two images is a bijection between odd and even permutations.
        if (detail::sort_with_parity(tmp)) std::swap(perm[0], perm[1]);
    }
    return SignedPermutation{n, std::move(perm), std::move(signs)};
}

// Every element of the group, for exhaustive checks at tiny n.
inline std::vector<SignedPermutation> all_elements(int n, Group group) {
    if (n < 1 || n > 3) throw Error("E_GUARD", "group enumeration limited to n <= 3");
    const int m = 2 * n;
    std::vector<SignedPermutation> out;
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        std::vector<int> tmp = perm;
        const bool odd = detail::sort_with_parity(tmp);
        if (group == Group::Alt) {
            if (!odd) out.push_back({n, perm, std::vector<int>(m, 1)});
            continue;
        }
        for (int mask = 0; mask < (1 << m); ++mask) {
            std::vector<int> s(m);
            for (int mu = 0; mu < m; ++mu) s[mu] = (mask >> mu) & 1 ? -1 : 1;
            out.push_back({n, perm, s});
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

// lambda_{n,k} = C(n,k) / C(2n,2k).
inline Rational channel_eigenvalue(int n, int k) {
    if (n < 1 || k < 0 || k > n) throw Error("E_RANGE", "channel eigenvalue needs 0 <= k <= n");
    return Rational::make(binomial(n, k), binomial(2 * n, 2 * k));
}

inline Rational shadow_norm_sq(int n, int k) { return channel_eigenvalue(n, k).inverse(); }

// Samples needed so that L mean estimates are all within epsilon with probability 1 - delta.
inline std::uint64_t sample_bound(double epsilon, double delta, std::uint64_t L, double max_sq_norm) {
    if (!(epsilon > 0 && epsilon < 1)) throw Error("E_RANGE", "epsilon must lie in (0,1)");
    if (!(delta > 0 && delta < 1)) throw Error("E_RANGE", "delta must lie in (0,1)");
    if (L < 1) throw Error("E_RANGE", "L must be >= 1");
    if (!(max_sq_norm >= 0) || !std::isfinite(max_sq_norm)) throw Error("E_RANGE", "norm must be finite and >= 0");
    const double m = (1.0 + epsilon / 3.0) * 2.0 * std::log(2.0 * static_cast<double>(L) / delta) / (epsilon * epsilon) * max_sq_norm;
    return static_cast<std::uint64_t>(std::ceil(m));
}

// Triangle-inequality bound on the shadow norm of a polynomial.
inline double observable_norm_bound(const MajoranaPolynomial& poly) {
    double total = 0;
    for (const auto& [idx, h] : poly.terms) {
        const int k = static_cast<int>(idx.size());
        if (k % 2) throw Error("E_DEGREE", "observable bound needs even-degree terms");
        total += std::sqrt(shadow_norm_sq(poly.n_modes, k / 2).value()) * std::abs(h);
    }
    return total;
}

enum class NoiseKind { None, BitFlip, Depolarizing, AmplitudeDamping };

// Readout noise acting right before the Z-basis measurement, reduced to its
// effect on the classical outcome.
struct NoiseModel {
    NoiseKind kind = NoiseKind::None;
    double p = 0.0;

    static NoiseModel make(NoiseKind kind, double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error("E_RANGE", "noise probability must lie in [0,1]");
        return {kind, p};
    }

    // "none", "bit_flip:0.2", "depolarizing:0.1", "amplitude_damping:0.05".
    static NoiseModel parse(const std::string& s) {
        if (s == "none" || s.empty()) return {};
        auto colon = s.find(':');
        if (colon == std::string::npos) throw Error("E_ARGS", "noise must be 'none' or kind:p, got '" + s + "'");
        const std::string name = s.substr(0, colon);
        double p;
        try {
            std::size_t used = 0;
            p = std::stod(s.substr(colon + 1), &used);
            if (used != s.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error("E_ARGS", "noise probability is not a number: '" + s + "'");
        }
        if (name == "bit_flip") return make(NoiseKind::BitFlip, p);
        if (name == "depolarizing") return make(NoiseKind::Depolarizing, p);
        if (name == "amplitude_damping") return make(NoiseKind::AmplitudeDamping, p);
        if (name == "none") return make(NoiseKind::None, p);
        throw Error("E_ARGS", "unknown noise kind '" + name + "'");
    }

    std::string name() const {
        switch (kind) {
            case NoiseKind::BitFlip: return "bit_flip";
            case NoiseKind::Depolarizing: return "depolarizing";
            case NoiseKind::AmplitudeDamping: return "amplitude_damping";
            default: return "none";
        }
    }

    void apply(Bits& b, Rng& rng) const {
        if (kind == NoiseKind::None || p == 0.0) return;
        for (auto& bit : b) {
            const double u = uniform01(rng);
            switch (kind) {
                case NoiseKind::BitFlip: if (u < p) bit ^= 1; break;
                case NoiseKind::Depolarizing: if (u < 0.5 * p) bit ^= 1; break;
                case NoiseKind::AmplitudeDamping: if (bit && u < p) bit = 0; break;
                default: break;
            }
        }
    }
};

struct ShadowSample {
    SignedPermutation q;
    Bits b;
};

inline ShadowSample acquire(const Covariance& g, const SignedPermutation& q, const NoiseModel& noise, Rng& rng) {
    Bits b = sample_measurement(evolve(g, q), rng);
    noise.apply(b, rng);
    return {q, std::move(b)};
}

// Single-shot estimate of tr(Gamma_m rho) from one snapshot: lambda^{-1} <b| U_Q Gamma_m U_Q^dagger |b>.
// Hermitian monomials only (phase 0 or 2).
inline double single_shot(const ShadowSample& s, const Monomial& m) {
    if (m.phase % 2) throw Error("E_PHASE", "single_shot needs a Hermitian monomial");
    if (m.degree() % 2) return 0.0;
    Monomial c = conjugate(s.q, m);
    if (!is_diagonal(c)) return 0.0;
    const auto v = diag_element(c, s.b);
    return v.real() / channel_eigenvalue(m.n_modes, m.degree() / 2).value();
}

namespace detail {

// All k-subsets of {0..n-1}, lexicographic.
inline std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> c(k);
    std::iota(c.begin(), c.end(), 0);
    while (true) {
        out.push_back(c);
        int i = k - 1;
        while (i >= 0 && c[i] == n - k + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

// Colexicographic rank of an ascending index set among sets of the same size.
inline std::size_t colex_rank(const std::vector<int>& idx) {
    std::size_t r = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) r += binomial(idx[i], static_cast<int>(i) + 1);
    return r;
}

inline std::vector<int> colex_unrank(std::size_t r, int k) {
    std::vector<int> idx(k);
    for (int i = k; i >= 1; --i) {
        int c = i - 1;
        while (binomial(c + 1, i) <= r) ++c;
        idx[i - 1] = c;
        r -= binomial(c, i);
    }
    return idx;
}

} // namespace detail

// Means of even-degree monomial estimates; values[j] holds degree 2j in colex order.
struct Estimates {
    int n_modes = 0;
    int k_max = 0;
    std::uint64_t count = 0;
    std::vector<std::vector<double>> values;

    bool has(const std::vector<int>& idx) const {
        const int k = static_cast<int>(idx.size());
        return k % 2 == 0 && k / 2 <= k_max;
    }

    double get(const std::vector<int>& idx) const {
        const int k = static_cast<int>(idx.size());
        if (k % 2) return 0.0;
        if (k / 2 > k_max) throw Error("E_MISSING", "no estimate stored for degree " + std::to_string(k));
        for (int v : idx)
            if (v < 0 || v >= 2 * n_modes) throw Error("E_INDEX", "estimate index out of range");
        return values[k / 2][detail::colex_rank(idx)];
    }

    double& at(const std::vector<int>& idx) {
        const int k = static_cast<int>(idx.size());
        if (k % 2 || k / 2 > k_max) throw Error("E_MISSING", "no estimate stored for degree " + std::to_string(k));
        return values[k / 2][detail::colex_rank(idx)];
    }
};

// Running sums of single-shot estimates over every even index set of degree <= 2 k_max.
class ShadowAccumulator {
  public:
    ShadowAccumulator(int n_modes, int k_max) : n_(n_modes), k_max_(k_max) {
        if (n_modes < 1) throw Error("E_MODES", "accumulator needs n >= 1");
        if (k_max < 1 || k_max > n_modes) throw Error("E_RANGE", "k_max must lie in [1, n]");
        sums_.resize(k_max + 1);
        diag_sets_.resize(k_max + 1);
        inv_lambda_.resize(k_max + 1);
        for (int j = 0; j <= k_max; ++j) {
            sums_[j].assign(binomial(2 * n_modes, 2 * j), 0.0);
            diag_sets_[j] = detail::combinations(n_modes, j);
            inv_lambda_[j] = shadow_norm_sq(n_modes, j).value();
        }
    }

    int n_modes() const { return n_; }
    int k_max() const { return k_max_; }
    std::uint64_t count() const { return count_; }

    // Each snapshot hits exactly C(n,j) index sets of degree 2j: the images of the diagonal sets.
    void add(const ShadowSample& s) {
        if (s.q.n_modes != n_ || static_cast<int>(s.b.size()) != n_) throw Error("E_MODES", "sample does not match accumulator");
        std::vector<int> img;
        for (int j = 0; j <= k_max_; ++j) {
            for (const auto& modes : diag_sets_[j]) {
                img.clear();
                int sign = 1;
                for (int p : modes) {
                    if (s.b[p]) sign = -sign;
                    for (int t : {2 * p, 2 * p + 1}) {
                        sign *= s.q.signs[t];
                        img.push_back(s.q.perm[t]);
                    }
                }
                if (detail::sort_with_parity(img)) sign = -sign;
                sums_[j][detail::colex_rank(img)] += sign * inv_lambda_[j];
            }
        }
        ++count_;
    }

    void merge(const ShadowAccumulator& other) {
        if (other.n_ != n_ || other.k_max_ != k_max_) throw Error("E_MODES", "cannot merge accumulators of different shape");
        for (int j = 0; j <= k_max_; ++j)
            for (std::size_t i = 0; i < sums_[j].size(); ++i) sums_[j][i] += other.sums_[j][i];
        count_ += other.count_;
    }

    Estimates estimates() const {
        if (count_ == 0) throw Error("E_EMPTY", "no samples accumulated");
        Estimates e{n_, k_max_, count_, sums_};
        for (auto& v : e.values)
            for (double& x : v) x /= static_cast<double>(count_);
        return e;
    }

  private:
    int n_, k_max_;
    std::uint64_t count_ = 0;
    std::vector<std::vector<double>> sums_;
    std::vector<std::vector<std::vector<int>>> diag_sets_;
    std::vector<double> inv_lambda_;
};

// Particle-number symmetry values used by the mitigation.
struct SymmetrySpec {
    int n_modes = 0;
    int eta = 0;
    double s2 = 0.0;
    double s4 = 0.0;
    bool ancilla_added = false;
};

inline SymmetrySpec symmetry_spec(int n, int eta, bool auto_ancilla) {
    if (n < 1 || eta < 0 || eta > n) throw Error("E_RANGE", "symmetry spec needs 0 <= eta <= n");
    auto values = [eta](int m) {
        return std::pair{eta - 0.5 * m, 0.5 * static_cast<double>(binomial(m, 2)) - static_cast<double>(eta) * (m - eta)};
    };
    auto [s2, s4] = values(n);
    SymmetrySpec out{n, eta, s2, s4, false};
    if (s2 == 0.0 || s4 == 0.0) {
        if (!auto_ancilla) throw Error("E_SYMMETRY", "symmetry value is zero for n=" + std::to_string(n) + ", eta=" + std::to_string(eta) + " and no ancilla allowed");
        auto [a2, a4] = values(n + 1);
        if (a2 == 0.0 || a4 == 0.0) throw Error("E_SYMMETRY", "symmetry value is zero even with an ancilla mode");
        out = {n + 1, eta, a2, a4, true};
    }
    return out;
}

// Appends one vacuum mode at the end (the ancilla).
inline Covariance with_ancilla(const Covariance& g) {
    const int m = 2 * g.n_modes;
    MatrixXd out = MatrixXd::Zero(m + 2, m + 2);
    out.topLeftCorner(m, m) = g.M;
    out(m, m + 1) = 1.0;
    out(m + 1, m) = -1.0;
    return {g.n_modes + 1, out};
}

struct MitigationRatios {
    double r2 = 1.0;
    double r4 = 1.0;
};

// Measured symmetry values over their ideal ones.
inline MitigationRatios symmetry_ratios(const Estimates& est, const SymmetrySpec& spec) {
    if (est.n_modes != spec.n_modes) throw Error("E_MODES", "estimates and symmetry spec disagree on n");
    MitigationRatios r;
    double s2 = 0;
    for (int p = 0; p < spec.n_modes; ++p) s2 += est.get({2 * p, 2 * p + 1});
    r.r2 = -0.5 * s2 / spec.s2;
    if (est.k_max >= 2) {
        double s4 = 0;
        for (int p = 0; p < spec.n_modes; ++p)
            for (int q = p + 1; q < spec.n_modes; ++q) s4 += est.get({2 * p, 2 * p + 1, 2 * q, 2 * q + 1});
        r.r4 = 0.5 * s4 / spec.s4;
    }
    return r;
}

// Divides degree-2 (degree-4) estimates by the measured/ideal ratio of S_2 (S_4).
inline Estimates mitigate(const Estimates& est, const SymmetrySpec& spec) {
    MitigationRatios r = symmetry_ratios(est, spec);
    if (std::abs(r.r2) < tol().mitigation)
        throw Error("E_MITIGATION", "degree-2 symmetry ratio " + std::to_string(r.r2) + " is too close to zero");
    if (est.k_max >= 2 && std::abs(r.r4) < tol().mitigation)
        throw Error("E_MITIGATION", "degree-4 symmetry ratio " + std::to_string(r.r4) + " is too close to zero");
    Estimates out = est;
    for (double& x : out.values[1]) x /= r.r2;
    if (est.k_max >= 2)
        for (double& x : out.values[2]) x /= r.r4;
    return out;
}

namespace detail {

struct LadderTerm {
    std::complex<double> coeff;
    std::vector<int> indices;
};

// a_p^dagger a_q^dagger a_s a_r expanded into canonical monomials.
inline std::vector<LadderTerm> expand_two_body(int n, int p, int q, int r, int s) {
    const std::complex<double> I(0, 1);
    struct Factor { int mode; bool dagger; };
    const Factor f[4] = {{p, true}, {q, true}, {s, false}, {r, false}};
    std::map<std::vector<int>, std::complex<double>> acc;
    for (int mask = 0; mask < 16; ++mask) {
        Monomial prod = Monomial::identity(n);
        std::complex<double> c = 1.0;
        for (int i = 0; i < 4; ++i) {
            const bool odd = (mask >> i) & 1;
            c *= odd ? (f[i].dagger ? -0.5 * I : 0.5 * I) : std::complex<double>(0.5);
            prod = multiply(prod, Monomial::make(n, {2 * f[i].mode + (odd ? 1 : 0)}));
        }
        acc[prod.indices] += c * i_pow(prod.phase);
    }
    std::vector<LadderTerm> out;
    for (auto& [idx, c] : acc)
        if (std::abs(c) > 1e-15) out.push_back({c, idx});
    return out;
}

} // namespace detail

inline std::vector<std::pair<int, int>> mode_pairs(int n) {
    std::vector<std::pair<int, int>> out;
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) out.emplace_back(p, q);
    return out;
}

// 2-RDM on modes {0..n_report-1}: T[(p,q),(r,s)] = <a_p^dagger a_q^dagger a_s a_r>, p<q, r<s.
inline MatrixXcd two_rdm(const Estimates& est, int n_report) {
    if (n_report < 2 || n_report > est.n_modes) throw Error("E_RANGE", "two_rdm needs 2 <= n_report <= n_modes");
    if (est.k_max < 2) throw Error("E_MISSING", "two_rdm needs estimates up to degree 4");
    const auto pairs = mode_pairs(n_report);
    const int d = static_cast<int>(pairs.size());
    MatrixXcd T(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            std::complex<double> v = 0;
            for (const auto& t : detail::expand_two_body(est.n_modes, pairs[a].first, pairs[a].second, pairs[b].first, pairs[b].second))
                v += t.coeff * (t.indices.empty() ? 1.0 : est.get(t.indices));
            T(a, b) = v;
        }
    return 0.5 * (T + T.adjoint());
}

// The same matrix for a Slater determinant, from Wick's theorem.
inline MatrixXcd two_rdm_exact(const MatrixXcd& d1) {
    const auto pairs = mode_pairs(static_cast<int>(d1.rows()));
    const int d = static_cast<int>(pairs.size());
    MatrixXcd T(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            T(a, b) = k_rdm_element(d1, {pairs[b].first, pairs[b].second}, {pairs[a].first, pairs[a].second});
    return T;
}

inline double spectral_norm_hermitian(const MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Estimates filled with exact Wick values, for noiseless reference data.
inline Estimates wick_estimates(const Covariance& g, int k_max) {
    if (k_max < 1 || k_max > g.n_modes) throw Error("E_RANGE", "k_max must lie in [1, n]");
    Estimates e{g.n_modes, k_max, 1, {}};
    for (int j = 0; j <= k_max; ++j) {
        std::vector<double> v(binomial(2 * g.n_modes, 2 * j));
        for (std::size_t r = 0; r < v.size(); ++r)
            v[r] = wick_expectation(g, Monomial::make(g.n_modes, detail::colex_unrank(r, 2 * j))).real();
        e.values.push_back(std::move(v));
    }
    return e;
}

struct ShadowRun {
    int k_max = 2;
    Group group = Group::B;
    NoiseModel noise{};
    std::uint64_t seed = 0;
    int threads = 1;
};

constexpr std::uint64_t shadow_chunk = 1000;

// Draws T snapshots in chunks of 1000; chunk c uses stream (seed, 1 + c) so the
// result is independent of the thread count. on_checkpoint fires whenever the
// merged count reaches an entry of `checkpoints` (each a multiple of the chunk
// size, or T itself). When `record` is set every snapshot is appended in order.
inline ShadowAccumulator run_shadows(const Covariance& g, std::uint64_t T, const ShadowRun& cfg,
                                     const std::vector<std::uint64_t>& checkpoints = {},
                                     const std::function<void(const ShadowAccumulator&)>& on_checkpoint = {},
                                     std::vector<ShadowSample>* record = nullptr) {
    if (T < 1) throw Error("E_ARGS", "samples must be >= 1");
    for (auto c : checkpoints)
        if (c > T || (c % shadow_chunk != 0 && c != T)) throw Error("E_ARGS", "checkpoints must be multiples of 1000 or equal to T");
    const int threads = std::max(1, cfg.threads);
    const std::uint64_t n_chunks = (T + shadow_chunk - 1) / shadow_chunk;

    struct Chunk {
        ShadowAccumulator acc;
        std::vector<ShadowSample> samples;
    };
    auto run_chunk = [&](std::uint64_t c) {
        Chunk out{ShadowAccumulator(g.n_modes, cfg.k_max), {}};
        Rng rng = make_stream(cfg.seed, 1 + c);
        const std::uint64_t len = std::min(shadow_chunk, T - c * shadow_chunk);
        for (std::uint64_t i = 0; i < len; ++i) {
            SignedPermutation q = sample_ensemble(g.n_modes, rng, cfg.group);
            ShadowSample s = acquire(g, q, cfg.noise, rng);
            out.acc.add(s);
            if (record) out.samples.push_back(std::move(s));
        }
        return out;
    };

    ShadowAccumulator total(g.n_modes, cfg.k_max);
    std::vector<std::uint64_t> marks = checkpoints;
    std::sort(marks.begin(), marks.end());
    std::size_t next_mark = 0;
    for (std::uint64_t start = 0; start < n_chunks; start += threads) {
        const std::uint64_t batch = std::min<std::uint64_t>(threads, n_chunks - start);
        std::vector<std::optional<Chunk>> results(batch);
        std::vector<std::exception_ptr> errors(batch);
        std::vector<std::thread> pool;
        for (std::uint64_t w = 1; w < batch; ++w)
            pool.emplace_back([&, w] {
                try {
                    results[w].emplace(run_chunk(start + w));
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        try {
            results[0].emplace(run_chunk(start));
        } catch (...) {
            errors[0] = std::current_exception();
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
        for (auto& r : results) {
            total.merge(r->acc);
            if (record) std::move(r->samples.begin(), r->samples.end(), std::back_inserter(*record));
            while (next_mark < marks.size() && marks[next_mark] == total.count()) {
                if (on_checkpoint) on_checkpoint(total);
                ++next_mark;
            }
        }
    }
    return total;
}

} // namespace fermi

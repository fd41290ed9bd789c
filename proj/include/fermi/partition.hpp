#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "majorana.hpp"

namespace fermi {

// H = sum_pq h1_pq a_p^dag a_q + 1/2 sum_pqrs h2_pqrs a_p^dag a_q^dag a_r a_s with real orbitals.
struct ElectronicIntegrals {
    int n = 0;
    Eigen::MatrixXd h1;
    std::vector<double> h2; // n^4 entries, index ((p n + q) n + r) n + s

    double& two(int p, int q, int r, int s) { return h2[((static_cast<std::size_t>(p) * n + q) * n + r) * n + s]; }
    double two(int p, int q, int r, int s) const { return h2[((static_cast<std::size_t>(p) * n + q) * n + r) * n + s]; }

    static ElectronicIntegrals zeros(int n) {
        if (n < 1) throw Error("E_DIM", "integrals need n >= 1");
        return ElectronicIntegrals{n, Eigen::MatrixXd::Zero(n, n), std::vector<double>(std::size_t(n) * n * n * n, 0.0)};
    }
    static ElectronicIntegrals make(Eigen::MatrixXd h1, std::vector<double> h2);
};

// Images of (p,q,r,s) under the eight index symmetries of real two-body integrals.
inline std::vector<std::array<int, 4>> symmetry_orbit(int p, int q, int r, int s) {
    std::set<std::array<int, 4>> seen{{p, q, r, s}};
    std::vector<std::array<int, 4>> todo{{p, q, r, s}};
    while (!todo.empty()) {
        auto [a, b, c, d] = todo.back();
        todo.pop_back();
        for (const auto& img : {std::array<int, 4>{d, b, c, a}, std::array<int, 4>{a, c, b, d}, std::array<int, 4>{b, a, d, c}})
            if (seen.insert(img).second) todo.push_back(img);
    }
    return {seen.begin(), seen.end()};
}

inline ElectronicIntegrals ElectronicIntegrals::make(Eigen::MatrixXd h1, std::vector<double> h2) {
    const int n = static_cast<int>(h1.rows());
    if (n < 1 || h1.cols() != n) throw Error("E_DIM", "h1 must be a nonempty square matrix");
    if (h2.size() != std::size_t(n) * n * n * n) throw Error("E_DIM", "h2 must have n^4 entries");
    if (!h1.allFinite() || !std::all_of(h2.begin(), h2.end(), [](double v) { return std::isfinite(v); }))
        throw Error("E_VALUE", "integrals must be finite");
    const double eps = tol().validate;
    if ((h1 - h1.transpose()).cwiseAbs().maxCoeff() > eps) throw Error("E_SYMMETRY", "h1 is not symmetric");
    ElectronicIntegrals out{n, std::move(h1), std::move(h2)};
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s)
                    for (const auto& [a, b, c, d] : symmetry_orbit(p, q, r, s))
                        if (std::abs(out.two(a, b, c, d) - out.two(p, q, r, s)) > eps)
                            throw Error("E_SYMMETRY", "h2 violates the eightfold symmetry at (" + std::to_string(p) + "," +
                                                          std::to_string(q) + "," + std::to_string(r) + "," + std::to_string(s) + ")");
    return out;
}

namespace detail {

// Adds coeff * i^extra_phase * gamma_{idx[0]} gamma_{idx[1]} ... in canonical form.
inline void add_product(MajoranaPolynomial& poly, double coeff, int extra_phase, const std::vector<int>& idx) {
    Monomial m = Monomial::identity(poly.n_modes);
    for (int a : idx) m = multiply(m, Monomial::make(poly.n_modes, {a}));
    const int ph = mod4(m.phase + extra_phase);
    if (ph % 2) throw Error("E_INTERNAL", "non-Hermitian term in Majorana form");
    poly.add(m.indices, ph == 0 ? coeff : -coeff);
}

inline void prune(MajoranaPolynomial& poly) {
    for (auto it = poly.terms.begin(); it != poly.terms.end();)
        it = std::abs(it->second) < tol().prune ? poly.terms.erase(it) : std::next(it);
}

} // namespace detail

// Exchange-type quadratic weight and quartic weight are both -1/4; checked against the
// ladder-operator Hamiltonian for integrals with the eightfold symmetry.
inline MajoranaPolynomial majorana_form(const ElectronicIntegrals& ints) {
    const int n = ints.n;
    MajoranaPolynomial poly{n, 0.0, {}};
    for (int p = 0; p < n; ++p) poly.constant += 0.5 * ints.h1(p, p);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            if (p != q) poly.constant += 0.125 * (ints.two(p, q, q, p) - ints.two(p, q, p, q));

    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            double c = 0.5 * ints.h1(p, q);
            for (int r = 0; r < n; ++r)
                if (r != p && r != q) c += 0.25 * ints.two(p, r, r, q) - 0.25 * ints.two(p, q, r, r);
            if (c != 0.0) detail::add_product(poly, c, 1, {2 * p, 2 * q + 1});
        }

    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            if (p == q) continue;
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s) {
                    if (r == s) continue;
                    const double h = ints.two(p, q, r, s);
                    if (h == 0.0) continue;
                    detail::add_product(poly, 0.5 * -0.25 * h, 0, {2 * p, 2 * q, 2 * r + 1, 2 * s + 1});
                }
        }
    detail::prune(poly);
    return poly;
}

struct AnticommutingSet {
    std::vector<std::vector<int>> members;
    std::vector<double> coeffs; // original coefficients, gamma * betas
    std::vector<double> betas;
    double gamma = 0.0;

    static AnticommutingSet make(std::vector<std::vector<int>> members, std::vector<double> coeffs) {
        AnticommutingSet s{std::move(members), std::move(coeffs), {}, 0.0};
        double sq = 0.0;
        for (double c : s.coeffs) sq += c * c;
        s.gamma = std::sqrt(sq);
        for (double c : s.coeffs) s.betas.push_back(s.gamma > 0 ? c / s.gamma : 0.0);
        return s;
    }
};

struct AnticommutingPartition {
    int n_modes = 0;
    std::vector<AnticommutingSet> sets;
    bool covers = false; // every polynomial term appears in exactly one set
};

namespace detail {

inline bool anticommutes_with_all(int n, const std::vector<int>& term, const std::vector<std::vector<int>>& members) {
    const Monomial t = Monomial::make(n, term);
    for (const auto& m : members)
        if (!anticommutes(t, Monomial::make(n, m))) return false;
    return true;
}

inline std::vector<std::pair<std::vector<int>, double>> pruned_terms(const MajoranaPolynomial& poly) {
    std::vector<std::pair<std::vector<int>, double>> out;
    for (const auto& [idx, c] : poly.terms)
        if (std::abs(c) >= tol().prune) out.emplace_back(idx, c);
    return out;
}

} // namespace detail

// First-fit colouring in order of descending |coefficient|, ties broken lexicographically.
inline AnticommutingPartition greedy_partition(const MajoranaPolynomial& poly) {
    auto terms = detail::pruned_terms(poly);
    std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        const double x = std::abs(a.second), y = std::abs(b.second);
        if (x != y) return x > y;
        return a.first < b.first;
    });
    std::vector<std::vector<std::vector<int>>> members;
    std::vector<std::vector<double>> coeffs;
    for (const auto& [idx, c] : terms) {
        std::size_t k = 0;
        while (k < members.size() && !detail::anticommutes_with_all(poly.n_modes, idx, members[k])) ++k;
        if (k == members.size()) {
            members.emplace_back();
            coeffs.emplace_back();
        }
        members[k].push_back(idx);
        coeffs[k].push_back(c);
    }
    AnticommutingPartition out{poly.n_modes, {}, true};
    for (std::size_t k = 0; k < members.size(); ++k) out.sets.push_back(AnticommutingSet::make(members[k], coeffs[k]));
    return out;
}

// Index sets only; every admissible quadratic {2p, 2q+1} and quartic {2p, 2q, 2r+1, 2s+1} appears once.
struct PartitionTemplate {
    int n_modes = 0;
    std::vector<std::vector<std::vector<int>>> sets;
    int quartic_sets = 0;
};

inline std::vector<int> quartic_index(int p, int q, int r, int s) {
    std::vector<int> v{2 * p, 2 * q, 2 * r + 1, 2 * s + 1};
    std::sort(v.begin(), v.end());
    return v;
}

inline std::vector<int> quadratic_index(int p, int q) {
    std::vector<int> v{2 * p, 2 * q + 1};
    std::sort(v.begin(), v.end());
    return v;
}

// Quartic sets share the even index 2q (q >= 3), plus one merged set for q in {1, 2}, for each odd pair (r, s).
// Quadratics with fixed even index 2p, p >= 3, join the set (q=p, r=0, s=1), apart from q in {0, 1}
// which go to (q=p, r=2, s=3). Remaining quadratics are placed first-fit.
inline PartitionTemplate analytic_partition(int n) {
    if (n < 2) throw Error("E_PARTITION", "analytic partition needs n >= 2");
    PartitionTemplate t{n, {}, 0};
    std::map<std::array<int, 3>, std::size_t> where; // (q, r, s) -> set index
    for (int r = 0; r < n; ++r)
        for (int s = r + 1; s < n; ++s)
            for (int q = 1; q < n; ++q) {
                if (q == 2) continue; // merged into q = 1
                std::vector<std::vector<int>> set;
                for (int qq : q == 1 ? std::vector<int>{1, 2} : std::vector<int>{q}) {
                    if (qq >= n) continue;
                    for (int p = 0; p < qq; ++p) set.push_back(quartic_index(p, qq, r, s));
                }
                where[{q, r, s}] = t.sets.size();
                t.sets.push_back(std::move(set));
            }
    t.quartic_sets = static_cast<int>(t.sets.size());

    std::vector<std::vector<int>> leftover;
    for (int p = 0; p < n; ++p) {
        if (p >= 3 && n >= 4) {
            auto& main = t.sets[where.at({p, 0, 1})];
            auto& side = t.sets[where.at({p, 2, 3})];
            for (int q = 0; q < n; ++q) (q <= 1 ? side : main).push_back(quadratic_index(p, q));
        } else {
            for (int q = 0; q < n; ++q) leftover.push_back(quadratic_index(p, q));
        }
    }
    for (const auto& idx : leftover) {
        std::size_t k = 0;
        while (k < t.sets.size() && !detail::anticommutes_with_all(n, idx, t.sets[k])) ++k;
        if (k == t.sets.size()) t.sets.emplace_back();
        t.sets[k].push_back(idx);
    }
    return t;
}

// Restricts a template to the support of a polynomial; empty sets are dropped.
inline AnticommutingPartition apply_template(const MajoranaPolynomial& poly, const PartitionTemplate& t) {
    if (poly.n_modes != t.n_modes) throw Error("E_MODES", "template and polynomial mode counts differ");
    std::map<std::vector<int>, std::size_t> slot;
    for (std::size_t k = 0; k < t.sets.size(); ++k)
        for (const auto& idx : t.sets[k]) slot[idx] = k;
    std::vector<std::vector<std::vector<int>>> members(t.sets.size());
    std::vector<std::vector<double>> coeffs(t.sets.size());
    for (const auto& [idx, c] : detail::pruned_terms(poly)) {
        auto it = slot.find(idx);
        if (it == slot.end()) throw Error("E_PARTITION", "term " + index_key(idx) + " is not a quadratic or quartic electronic term");
        members[it->second].push_back(idx);
        coeffs[it->second].push_back(c);
    }
    AnticommutingPartition out{poly.n_modes, {}, true};
    for (std::size_t k = 0; k < members.size(); ++k)
        if (!members[k].empty()) out.sets.push_back(AnticommutingSet::make(members[k], coeffs[k]));
    return out;
}

// R_S = R_{s,s-1} ... R_{s,1} with R_sk = exp(-i theta_k/2 * i P_s P_k); R_S H_S R_S^dag = sign * P_s.
struct RotationPlan {
    std::vector<std::vector<int>> members; // kept members; the last one is the target
    std::vector<double> betas;
    std::vector<std::pair<int, double>> steps; // (member index k, theta), first step applied first
    int target_sign = 1;                       // -1 only for a singleton with negative coefficient

    const std::vector<int>& target() const { return members.back(); }
};

inline RotationPlan rotation_plan(const AnticommutingSet& set) {
    if (set.members.size() != set.betas.size() || set.members.empty()) throw Error("E_PARTITION", "malformed anticommuting set");
    double sq = 0.0;
    for (double b : set.betas) sq += b * b;
    if (std::abs(sq - 1.0) > tol().probability) throw Error("E_PARTITION", "set betas are not normalised");
    RotationPlan plan;
    for (std::size_t j = 0; j < set.members.size(); ++j)
        if (std::abs(set.betas[j]) >= tol().prune) {
            plan.members.push_back(set.members[j]);
            plan.betas.push_back(set.betas[j]);
        }
    if (plan.members.empty()) throw Error("E_PARTITION", "all coefficients in the set are zero");
    const int s = static_cast<int>(plan.members.size());
    double c = plan.betas.back(); // current coefficient of P_s
    for (int k = 0; k + 1 < s; ++k) {
        const double th = std::atan2(plan.betas[k], c);
        plan.steps.emplace_back(k, th);
        c = std::hypot(plan.betas[k], c);
    }
    plan.target_sign = c < 0 ? -1 : 1;
    return plan;
}

struct NormsReport {
    double lambda = 0.0;   // sum of |coefficients|
    double lambda_c = 0.0; // sum of set norms
    int s_max = 0;
    bool bounds_ok = false;
};

inline NormsReport norms_report(const MajoranaPolynomial& poly, const AnticommutingPartition& part) {
    auto terms = detail::pruned_terms(poly);
    std::map<std::vector<int>, double> want(terms.begin(), terms.end());
    std::set<std::vector<int>> seen;
    NormsReport r;
    for (const auto& set : part.sets) {
        if (set.members.size() != set.coeffs.size()) throw Error("E_PARTITION", "malformed anticommuting set");
        r.lambda_c += set.gamma;
        r.s_max = std::max(r.s_max, static_cast<int>(set.members.size()));
        for (std::size_t j = 0; j < set.members.size(); ++j) {
            auto it = want.find(set.members[j]);
            if (it == want.end() || !seen.insert(set.members[j]).second)
                throw Error("E_PARTITION", "partition does not match the polynomial at " + index_key(set.members[j]));
            if (std::abs(it->second - set.gamma * set.betas[j]) > tol().validate * std::max(1.0, std::abs(it->second)))
                throw Error("E_PARTITION", "coefficient mismatch at " + index_key(set.members[j]));
        }
    }
    if (seen.size() != want.size()) throw Error("E_PARTITION", "partition does not cover the polynomial");
    for (const auto& [idx, c] : terms) r.lambda += std::abs(c);
    const double slack = 1e-12 * std::max(1.0, r.lambda);
    r.bounds_ok = r.s_max == 0 || (r.lambda / std::sqrt(r.s_max) <= r.lambda_c + slack && r.lambda_c <= r.lambda + slack);
    return r;
}

} // namespace fermi

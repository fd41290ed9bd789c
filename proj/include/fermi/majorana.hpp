#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"

namespace fermi {

inline int mod4(int k) { return ((k % 4) + 4) % 4; }

inline std::complex<double> i_pow(int k) {
    switch (mod4(k)) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

// i^phase * Gamma_indices, where Gamma_mu = (-i)^{C(|mu|,2)} gamma_mu1 ... gamma_muk
// is the Hermitian canonical monomial. Indices are strictly ascending.
struct Monomial {
    int n_modes = 0;
    std::vector<int> indices;
    int phase = 0;

    static Monomial make(int n_modes, std::vector<int> indices, int phase = 0) {
        if (n_modes < 1) throw Error("E_MODES", "monomial needs n_modes >= 1");
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] < 0 || indices[i] >= 2 * n_modes)
                throw Error("E_INDEX", "Majorana index " + std::to_string(indices[i]) + " out of range for n=" +
                                           std::to_string(n_modes));
            if (i > 0 && indices[i] <= indices[i - 1]) throw Error("E_INDEX", "Majorana indices must be strictly ascending");
        }
        return Monomial{n_modes, std::move(indices), mod4(phase)};
    }
    static Monomial identity(int n_modes) { return make(n_modes, {}); }

    int degree() const { return static_cast<int>(indices.size()); }
    bool operator==(const Monomial&) const = default;
};

// Comma-separated index list, the key used in estimate files.
inline std::string index_key(const std::vector<int>& idx) {
    std::string s;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(idx[i]);
    }
    return s;
}

inline std::vector<int> parse_index_key(const std::string& key) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < key.size()) {
        std::size_t next = key.find(',', pos);
        if (next == std::string::npos) next = key.size();
        out.push_back(std::stoi(key.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

namespace detail {

inline int pair_count(int k) { return k * (k - 1) / 2; }

inline void check_modes(int a, int b) {
    if (a != b) throw Error("E_MODES", "mode-count mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

// Number of (x in a, y in b) with x > y; both ascending.
inline int cross_inversions(const std::vector<int>& a, const std::vector<int>& b) {
    int count = 0;
    std::size_t i = 0;
    for (int y : b) {
        while (i < a.size() && a[i] <= y) ++i;
        count += static_cast<int>(a.size() - i);
    }
    return count;
}

// Parity of the permutation sorting v (distinct entries), by merge counting.
inline int sort_with_parity(std::vector<int>& v) {
    if (v.size() < 2) return 0;
    std::vector<int> buf(v.size());
    long long inv = 0;
    for (std::size_t width = 1; width < v.size(); width *= 2) {
        for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
            std::size_t mid = std::min(lo + width, v.size()), hi = std::min(lo + 2 * width, v.size());
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[i] <= v[j]) buf[k++] = v[i++];
                else {
                    inv += static_cast<long long>(mid - i);
                    buf[k++] = v[j++];
                }
            }
            while (i < mid) buf[k++] = v[i++];
            while (j < hi) buf[k++] = v[j++];
        }
        v.swap(buf);
    }
    return static_cast<int>(inv & 1);
}

} // namespace detail

inline Monomial multiply(const Monomial& a, const Monomial& b) {
    detail::check_modes(a.n_modes, b.n_modes);
    std::vector<int> c;
    std::set_symmetric_difference(a.indices.begin(), a.indices.end(), b.indices.begin(), b.indices.end(),
                                  std::back_inserter(c));
    int ka = a.degree(), kb = b.degree(), kc = static_cast<int>(c.size());
    // gamma_A gamma_B = (-1)^inv gamma_C ; gamma_C = i^{C(kc,2)} Gamma_C
    int ph = a.phase + b.phase + 3 * detail::pair_count(ka) + 3 * detail::pair_count(kb) +
             2 * detail::cross_inversions(a.indices, b.indices) + detail::pair_count(kc);
    return Monomial{a.n_modes, std::move(c), mod4(ph)};
}

inline bool anticommutes(const Monomial& a, const Monomial& b) {
    detail::check_modes(a.n_modes, b.n_modes);
    std::vector<int> common;
    std::set_intersection(a.indices.begin(), a.indices.end(), b.indices.begin(), b.indices.end(),
                          std::back_inserter(common));
    return ((a.degree() * b.degree() + static_cast<int>(common.size())) & 1) == 1;
}

inline bool is_diagonal(const Monomial& m) {
    if (m.degree() % 2) return false;
    for (int i = 0; i < m.degree(); i += 2)
        if (m.indices[i] % 2 != 0 || m.indices[i + 1] != m.indices[i] + 1) return false;
    return true;
}

// <b|Gamma_mu|b> for the canonical monomial (phase ignored): 0, +1 or -1.
inline int diag_sign(const Monomial& m, const Bits& b) {
    if (static_cast<int>(b.size()) != m.n_modes)
        throw Error("E_LENGTH", "bitstring length " + std::to_string(b.size()) + " != n_modes " + std::to_string(m.n_modes));
    if (!is_diagonal(m)) return 0;
    int s = 1;
    for (int i = 0; i < m.degree(); i += 2)
        if (b[m.indices[i] / 2]) s = -s;
    return s;
}

inline std::complex<double> diag_element(const Monomial& m, const Bits& b) {
    return i_pow(m.phase) * static_cast<double>(diag_sign(m, b));
}

struct PauliString {
    std::string letters; // over I X Y Z, letters[p] acts on qubit p
    int phase = 0;       // operator is i^phase * letters
    bool operator==(const PauliString&) const = default;
};

namespace detail {

// Single-qubit product a*b = i^phase * c.
inline char pauli_mul(char a, char b, int& phase) {
    if (a == 'I') return b;
    if (b == 'I') return a;
    if (a == b) return 'I';
    static const std::string cyc = "XYZ";
    int ia = static_cast<int>(cyc.find(a)), ib = static_cast<int>(cyc.find(b));
    char c = cyc[3 - ia - ib];
    phase += ((ib - ia + 3) % 3 == 1) ? 1 : 3;
    return c;
}

} // namespace detail

inline PauliString multiply(const PauliString& a, const PauliString& b) {
    if (a.letters.size() != b.letters.size()) throw Error("E_MODES", "Pauli length mismatch");
    PauliString out{std::string(a.letters.size(), 'I'), a.phase + b.phase};
    for (std::size_t q = 0; q < a.letters.size(); ++q) out.letters[q] = detail::pauli_mul(a.letters[q], b.letters[q], out.phase);
    out.phase = mod4(out.phase);
    return out;
}

inline bool paulis_anticommute(const std::string& a, const std::string& b) {
    int odd = 0;
    for (std::size_t q = 0; q < a.size(); ++q)
        if (a[q] != 'I' && b[q] != 'I' && a[q] != b[q]) odd ^= 1;
    return odd == 1;
}

// Jordan-Wigner image of a single generator gamma_mu.
inline PauliString majorana_pauli(int n_modes, int mu) {
    PauliString p{std::string(n_modes, 'I'), 0};
    int q = mu / 2;
    for (int j = 0; j < q; ++j) p.letters[j] = 'Z';
    p.letters[q] = (mu % 2 == 0) ? 'X' : 'Y';
    return p;
}

inline PauliString to_pauli(const Monomial& m) {
    PauliString acc{std::string(m.n_modes, 'I'), 0};
    for (int mu : m.indices) acc = multiply(acc, majorana_pauli(m.n_modes, mu));
    acc.phase = mod4(acc.phase + m.phase + 3 * detail::pair_count(m.degree()));
    return acc;
}

// Real combination of canonical monomials plus an identity coefficient.
struct MajoranaPolynomial {
    int n_modes = 0;
    double constant = 0.0;
    std::map<std::vector<int>, double> terms;

    void add(const std::vector<int>& indices, double coeff) {
        if (indices.empty()) {
            constant += coeff;
            return;
        }
        terms[indices] += coeff;
    }
};

// Element of B(2n): Q_{mu nu} = signs[mu] * [perm[mu] == nu].
struct SignedPermutation {
    int n_modes = 0;
    std::vector<int> perm;
    std::vector<int> signs;

    static SignedPermutation make(int n_modes, std::vector<int> perm, std::vector<int> signs) {
        const int m = 2 * n_modes;
        if (n_modes < 1) throw Error("E_MODES", "signed permutation needs n_modes >= 1");
        if (static_cast<int>(perm.size()) != m || static_cast<int>(signs.size()) != m)
            throw Error("E_LENGTH", "signed permutation arrays must have length 2n");
        std::vector<char> seen(m, 0);
        for (int v : perm) {
            if (v < 0 || v >= m || seen[v]) throw Error("E_PERM", "perm is not a bijection on 0..2n-1");
            seen[v] = 1;
        }
        for (int s : signs)
            if (s != 1 && s != -1) throw Error("E_PERM", "signs must be +1 or -1");
        return SignedPermutation{n_modes, std::move(perm), std::move(signs)};
    }

    static SignedPermutation identity(int n_modes) {
        std::vector<int> p(2 * n_modes);
        std::iota(p.begin(), p.end(), 0);
        return make(n_modes, std::move(p), std::vector<int>(2 * n_modes, 1));
    }

    std::vector<int> inverse_perm() const {
        std::vector<int> inv(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
        return inv;
    }

    int perm_sign() const {
        std::vector<int> v = perm;
        return detail::sort_with_parity(v) ? -1 : 1;
    }

    int determinant() const {
        int d = perm_sign();
        for (int s : signs) d *= s;
        return d;
    }

    Eigen::MatrixXd matrix() const {
        const int m = 2 * n_modes;
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
        for (int mu = 0; mu < m; ++mu) q(mu, perm[mu]) = signs[mu];
        return q;
    }

    bool operator==(const SignedPermutation&) const = default;
};

// Matrix product: compose(a, b).matrix() == a.matrix() * b.matrix(), so that
// U_{compose(a,b)} = U_a U_b.
inline SignedPermutation compose(const SignedPermutation& a, const SignedPermutation& b) {
    detail::check_modes(a.n_modes, b.n_modes);
    const std::size_t m = a.perm.size();
    SignedPermutation c{a.n_modes, std::vector<int>(m), std::vector<int>(m)};
    for (std::size_t mu = 0; mu < m; ++mu) {
        c.perm[mu] = b.perm[a.perm[mu]];
        c.signs[mu] = a.signs[mu] * b.signs[a.perm[mu]];
    }
    return c;
}

// U_Q Gamma_mu U_Q^dagger, using gamma_mu -> s_{pi^-1(mu)} gamma_{pi^-1(mu)}.
inline Monomial conjugate(const SignedPermutation& q, const Monomial& m) {
    detail::check_modes(q.n_modes, m.n_modes);
    std::vector<int> inv = q.inverse_perm();
    std::vector<int> img(m.indices.size());
    int sign_flip = 0;
    for (std::size_t i = 0; i < m.indices.size(); ++i) {
        int t = inv[m.indices[i]];
        img[i] = t;
        if (q.signs[t] < 0) sign_flip ^= 1;
    }
    sign_flip ^= detail::sort_with_parity(img);
    return Monomial{m.n_modes, std::move(img), mod4(m.phase + 2 * sign_flip)};
}

} // namespace fermi

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaussian.hpp"
#include "majorana.hpp"

namespace fermi {

// ZRot(p, t) = exp(-i t/2 Z_p) rotates Majorana axes (2p, 2p+1) by t;
// XXRot(p, t) = exp(-i t/2 X_p X_{p+1}) rotates axes (2p+1, 2p+2).
struct Gate {
    enum Kind { ZRot, XXRot, Pauli };
    Kind kind = ZRot;
    int q = 0;
    double theta = 0.0;
    std::string letters; // Pauli layer only

    // First Majorana axis of the rotated plane.
    int axis() const { return kind == ZRot ? 2 * q : 2 * q + 1; }
    bool operator==(const Gate&) const = default;
};

// Gates in time order: gates[0] acts first, so U = U_{g_last} ... U_{g_0}.
struct GateProgram {
    int n_qubits = 0;
    std::vector<Gate> gates;
};

struct GateStats {
    int rotations = 0;
    int two_qubit = 0;
    int one_qubit = 0; // Z rotations plus non-identity Pauli letters
    int depth = 0;
};

namespace detail {

// Rotation by theta on axes (mu, mu+1), as a factor of Q.
struct Givens {
    int mu;
    double theta;
};

inline void rotate_rows(MatrixXd& w, int mu, double c, double s) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double a = w(mu, j), b = w(mu + 1, j);
        w(mu, j) = c * a + s * b;
        w(mu + 1, j) = -s * a + c * b;
    }
}

// Q = G_1 ... G_L D with adjacent-axis rotations (column-wise elimination).
inline std::vector<Givens> reduce_naive(const MatrixXd& Q, std::vector<int>& diag) {
    const int m = static_cast<int>(Q.rows());
    MatrixXd W = Q;
    std::vector<Givens> out;
    for (int c = 0; c < m - 1; ++c)
        for (int r = m - 1; r > c; --r) {
            if (W(r, c) == 0.0) continue;
            const double th = std::atan2(W(r, c), W(r - 1, c));
            if (std::abs(th) < tol().drop_angle) continue;
            rotate_rows(W, r - 1, std::cos(th), std::sin(th));
            out.push_back({r - 1, th});
        }
    diag.assign(m, 1);
    for (int mu = 0; mu < m; ++mu) diag[mu] = W(mu, mu) < 0 ? -1 : 1;
    return out;
}

inline void require_program_input(const MatrixXd& Q) {
    if (Q.rows() != Q.cols() || Q.rows() % 2 || Q.rows() == 0) throw Error("E_DIM", "Q must be a nonempty 2n x 2n matrix");
    require_orthogonal(Q, tol().orthogonal);
}

// Pauli layer with U gamma_mu U^dagger = diag[mu] gamma_mu.
inline std::string sign_layer(const std::vector<int>& diag) {
    const int n = static_cast<int>(diag.size()) / 2;
    PauliString acc{std::string(n, 'I'), 0};
    for (int p = 0; p < n; ++p) {
        const int a = diag[2 * p], b = diag[2 * p + 1];
        if (a == 1 && b == 1) continue;
        PauliString w{std::string(n, 'I'), 0};
        if (a == -1 && b == -1) {
            w.letters[p] = 'Z';
        } else {
            w.letters[p] = a == 1 ? 'X' : 'Y';
            for (int q = p + 1; q < n; ++q) w.letters[q] = 'Z';
        }
        acc = multiply(acc, w);
    }
    return acc.letters;
}

// Factor of Q in matrix-product order: a rotation or a diagonal of signs.
struct Factor {
    bool is_sign;
    Givens g;
    std::vector<int> signs;
};

// Moves every sign factor to position `centre` (flipping rotation angles as
// they pass) and emits the program in time order.
inline GateProgram assemble(int n, const std::vector<Factor>& factors, std::size_t centre) {
    const int m = 2 * n;
    std::vector<Givens> left, right;
    std::vector<int> s_left(m, 1), s_right(m, 1);
    // S G(mu, t) = G(mu, s_mu s_mu+1 t) S
    for (std::size_t i = 0; i < centre; ++i) {
        const Factor& f = factors[i];
        if (f.is_sign) {
            for (int mu = 0; mu < m; ++mu) s_left[mu] *= f.signs[mu];
        } else {
            left.push_back({f.g.mu, s_left[f.g.mu] * s_left[f.g.mu + 1] * f.g.theta});
        }
    }
    for (std::size_t i = factors.size(); i-- > centre;) {
        const Factor& f = factors[i];
        if (f.is_sign) {
            for (int mu = 0; mu < m; ++mu) s_right[mu] *= f.signs[mu];
        } else {
            right.push_back({f.g.mu, s_right[f.g.mu] * s_right[f.g.mu + 1] * f.g.theta});
        }
    }
    std::reverse(right.begin(), right.end());
    std::vector<int> centre_signs(m);
    for (int mu = 0; mu < m; ++mu) centre_signs[mu] = s_left[mu] * s_right[mu];

    // Product order is left, centre, right; time order is the reverse.
    GateProgram prog{n, {}};
    auto emit = [&](const Givens& g) {
        Gate gate;
        gate.kind = g.mu % 2 == 0 ? Gate::ZRot : Gate::XXRot;
        gate.q = g.mu / 2;
        gate.theta = g.theta;
        prog.gates.push_back(gate);
    };
    for (auto it = right.rbegin(); it != right.rend(); ++it) emit(*it);
    prog.gates.push_back(Gate{Gate::Pauli, 0, 0.0, sign_layer(centre_signs)});
    for (auto it = left.rbegin(); it != left.rend(); ++it) emit(*it);
    return prog;
}

} // namespace detail

// Column-by-column Givens reduction followed by one Pauli layer.
inline GateProgram compile_naive(const MatrixXd& Q) {
    detail::require_program_input(Q);
    std::vector<int> diag;
    auto rots = detail::reduce_naive(Q, diag);
    std::vector<detail::Factor> factors;
    for (const auto& g : rots) factors.push_back({false, g, {}});
    factors.push_back({true, {}, diag});
    return detail::assemble(static_cast<int>(Q.rows()) / 2, factors, factors.size() - 1);
}

// Two-sided elimination of 2x2 blocks with 4x4 orthogonal factors in the
// Clements ordering, each factor compiled by the naive scheme.
inline GateProgram compile_blocked(const MatrixXd& Q) {
    detail::require_program_input(Q);
    const int m = static_cast<int>(Q.rows()), n = m / 2;
    MatrixXd W = Q;
    std::vector<std::pair<int, Eigen::Matrix4d>> from_left, from_right; // (first block index, 4x4 factor)

    const Eigen::Matrix4d J4 = Eigen::Matrix4d::Identity().rowwise().reverse();
    for (int i = 0; i + 1 < n; ++i) {
        if (i % 2 == 0) {
            for (int j = 0; j <= i; ++j) {
                // Zero block (n-1-j, i-j) by mixing block columns (i-j, i-j+1).
                const int row = n - 1 - j, col = i - j;
                Eigen::Matrix<double, 2, 4> M = W.block(2 * row, 2 * col, 2, 4);
                Eigen::Matrix<double, 4, 2> N = J4 * M.transpose() * Eigen::Matrix2d::Identity().rowwise().reverse();
                Eigen::Matrix4d H = Eigen::HouseholderQR<Eigen::Matrix<double, 4, 2>>(N).householderQ();
                Eigen::Matrix4d C = J4 * H.transpose() * J4;
                W.middleCols(2 * col, 4) = (W.middleCols(2 * col, 4) * C.transpose()).eval();
                W.block(2 * row, 2 * col, 2, 2).setZero();
                from_right.emplace_back(col, C);
            }
        } else {
            for (int j = 1; j <= i + 1; ++j) {
                // Zero block (n+j-i-2, j-1) by mixing block rows with the one above.
                const int row = n + j - i - 2, col = j - 1;
                Eigen::Matrix<double, 4, 2> N = W.block(2 * row - 2, 2 * col, 4, 2);
                Eigen::Matrix4d B = Eigen::HouseholderQR<Eigen::Matrix<double, 4, 2>>(N).householderQ();
                W.middleRows(2 * row - 2, 4) = (B.transpose() * W.middleRows(2 * row - 2, 4)).eval();
                W.block(2 * row, 2 * col, 2, 2).setZero();
                from_left.emplace_back(row - 1, B);
            }
        }
    }

    // W is now block diagonal; each orthogonal 2x2 block is diag(1, det) times a rotation.
    std::vector<int> centre(m, 1);
    std::vector<detail::Givens> corner;
    for (int p = 0; p < n; ++p) {
        Eigen::Matrix2d b = W.block(2 * p, 2 * p, 2, 2);
        const int det = b.determinant() < 0 ? -1 : 1;
        if (det < 0) b.row(1) *= -1.0;
        centre[2 * p + 1] = det;
        const double th = std::atan2(b(1, 0), b(0, 0));
        if (std::abs(th) >= tol().drop_angle) corner.push_back({2 * p, th});
    }

    auto block_factors = [](int first_block, const Eigen::Matrix4d& B, std::vector<detail::Factor>& out, int m) {
        std::vector<int> d;
        auto rots = detail::reduce_naive(B, d);
        for (const auto& g : rots) out.push_back({false, {g.mu + 2 * first_block, g.theta}, {}});
        std::vector<int> s(m, 1);
        for (int k = 0; k < 4; ++k) s[2 * first_block + k] = d[k];
        out.push_back({true, {}, s});
    };

    // Q = L_1 ... L_K (D G) R_K' ... R_1 where L_i / R_i are the left / right factors in elimination order.
    std::vector<detail::Factor> factors;
    for (const auto& [b, B] : from_left) block_factors(b, B, factors, m);
    const std::size_t centre_pos = factors.size();
    factors.push_back({true, {}, centre});
    for (const auto& g : corner) factors.push_back({false, g, {}});
    for (auto it = from_right.rbegin(); it != from_right.rend(); ++it) block_factors(it->first, it->second, factors, m);
    return detail::assemble(n, factors, centre_pos);
}

inline void validate_program(const GateProgram& p) {
    if (p.n_qubits < 1) throw Error("E_PROGRAM", "program needs n_qubits >= 1");
    int layers = 0;
    for (const auto& g : p.gates) {
        switch (g.kind) {
            case Gate::ZRot:
                if (g.q < 0 || g.q >= p.n_qubits) throw Error("E_PROGRAM", "zrot qubit out of range");
                if (!std::isfinite(g.theta)) throw Error("E_PROGRAM", "non-finite angle");
                break;
            case Gate::XXRot:
                if (g.q < 0 || g.q + 1 >= p.n_qubits) throw Error("E_PROGRAM", "xxrot qubits out of range");
                if (!std::isfinite(g.theta)) throw Error("E_PROGRAM", "non-finite angle");
                break;
            case Gate::Pauli:
                if (++layers > 1) throw Error("E_PROGRAM", "at most one Pauli layer is allowed");
                if (static_cast<int>(g.letters.size()) != p.n_qubits) throw Error("E_PROGRAM", "Pauli layer length must equal n_qubits");
                if (g.letters.find_first_not_of("IXYZ") != std::string::npos) throw Error("E_PROGRAM", "Pauli layer letters must be I, X, Y or Z");
                break;
        }
    }
}

// Composes the gates' adjoint actions: Q = Q_{g_last} ... Q_{g_0}.
inline MatrixXd program_to_orthogonal(const GateProgram& p) {
    validate_program(p);
    const int n = p.n_qubits, m = 2 * n;
    MatrixXd R = MatrixXd::Identity(m, m);
    for (const auto& g : p.gates) {
        if (g.kind == Gate::Pauli) {
            for (int mu = 0; mu < m; ++mu)
                if (paulis_anticommute(g.letters, majorana_pauli(n, mu).letters)) R.row(mu) *= -1.0;
            continue;
        }
        // G R with G = [[c, -s], [s, c]] on rows (mu, mu+1).
        const int mu = g.axis();
        detail::rotate_rows(R, mu, std::cos(g.theta), -std::sin(g.theta));
    }
    return R;
}

inline GateStats program_stats(const GateProgram& p) {
    validate_program(p);
    GateStats s;
    std::vector<int> ready(p.n_qubits, 0);
    auto place = [&](int a, int b) {
        int layer = ready[a];
        if (b >= 0) layer = std::max(layer, ready[b]);
        ++layer;
        ready[a] = layer;
        if (b >= 0) ready[b] = layer;
    };
    for (const auto& g : p.gates) {
        switch (g.kind) {
            case Gate::ZRot:
                ++s.rotations;
                ++s.one_qubit;
                place(g.q, -1);
                break;
            case Gate::XXRot:
                ++s.rotations;
                ++s.two_qubit;
                place(g.q, g.q + 1);
                break;
            case Gate::Pauli:
                for (int q = 0; q < p.n_qubits; ++q)
                    if (g.letters[q] != 'I') {
                        ++s.one_qubit;
                        place(q, -1);
                    }
                break;
        }
    }
    s.depth = p.n_qubits ? *std::max_element(ready.begin(), ready.end()) : 0;
    return s;
}

struct CompileComparison {
    GateStats naive, blocked;
    double depth_ratio = 1.0;    // blocked / naive
    double rotation_ratio = 1.0; // blocked / naive
};

inline CompileComparison stats_compare(const MatrixXd& Q) {
    CompileComparison c;
    c.naive = program_stats(compile_naive(Q));
    c.blocked = program_stats(compile_blocked(Q));
    c.depth_ratio = c.naive.depth ? static_cast<double>(c.blocked.depth) / c.naive.depth : 1.0;
    c.rotation_ratio = c.naive.rotations ? static_cast<double>(c.blocked.rotations) / c.naive.rotations : 1.0;
    return c;
}

} // namespace fermi

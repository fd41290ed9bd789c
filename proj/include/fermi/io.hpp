#pragma once

// File formats shared by the CLI and tests. JSON goes through nlohmann::json,
// whose double output is the shortest round-tripping form; CSV uses %.17g.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "compiler.hpp"
#include "gaussian.hpp"
#include "partition.hpp"
#include "shadows.hpp"

namespace fermi::io {

using json = nlohmann::ordered_json;

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("E_IO", "cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("E_IO", "cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error("E_IO", "write to '" + path + "' failed");
}

inline json parse_json(const std::string& text, const std::string& what = "input") {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error("E_PARSE", what + ": " + e.what());
    }
}

inline json read_json(const std::string& path) { return parse_json(read_text(path), path); }

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace detail {

template <class T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error("E_PARSE", std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error("E_PARSE", std::string("field '") + key + "' has the wrong type");
    }
}

} // namespace detail

// ---- monomials

inline json to_json(const Monomial& m) { return json{{"indices", m.indices}, {"phase_pow_i", m.phase}}; }

inline Monomial monomial_from_json(const json& j, int n_modes) {
    return Monomial::make(n_modes, detail::field<std::vector<int>>(j, "indices"), detail::field<int>(j, "phase_pow_i"));
}

// ---- 2n x 2n real matrices: {"kind", "n_modes", "data": row-major}

inline json matrix_to_json(const MatrixXd& a, const std::string& kind) {
    if (a.rows() != a.cols() || a.rows() % 2) throw Error("E_DIM", "matrix must be 2n x 2n");
    std::vector<double> data;
    data.reserve(a.size());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k) data.push_back(a(i, k));
    return json{{"kind", kind}, {"n_modes", a.rows() / 2}, {"data", data}};
}

// An empty `kind` accepts any kind; a missing "kind" field is accepted too.
inline MatrixXd matrix_from_json(const json& j, const std::string& kind = "") {
    if (!kind.empty() && j.is_object() && j.contains("kind") && j["kind"] != kind)
        throw Error("E_PARSE", "expected a matrix of kind '" + kind + "', got '" + j["kind"].dump() + "'");
    const int n = detail::field<int>(j, "n_modes");
    if (n < 1) throw Error("E_DIM", "n_modes must be >= 1");
    auto data = detail::field<std::vector<double>>(j, "data");
    const std::size_t m = 2 * static_cast<std::size_t>(n);
    if (data.size() != m * m) throw Error("E_DIM", "data must hold (2 n_modes)^2 = " + std::to_string(m * m) + " entries");
    MatrixXd a(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < m; ++k) a(i, k) = data[i * m + k];
    if (!a.allFinite()) throw Error("E_VALUE", "matrix entries must be finite");
    return a;
}

// ---- gate programs

inline json to_json(const GateProgram& p) {
    json arr = json::array();
    for (const auto& g : p.gates) {
        switch (g.kind) {
            case Gate::ZRot: arr.push_back({{"kind", "zrot"}, {"q", g.q}, {"theta", g.theta}}); break;
            case Gate::XXRot: arr.push_back({{"kind", "xxrot"}, {"q", {g.q, g.q + 1}}, {"theta", g.theta}}); break;
            case Gate::Pauli: arr.push_back({{"kind", "pauli"}, {"string", g.letters}}); break;
        }
    }
    return arr;
}

// Accepts the bare gate array (qubit count taken from the Pauli layer, else the
// largest qubit index) or {"n_qubits": n, "gates": [...]}.
inline GateProgram program_from_json(const json& j) {
    const json& arr = j.is_object() ? j.value("gates", json()) : j;
    if (!arr.is_array()) throw Error("E_PROGRAM", "program must be an array of gates");
    GateProgram p;
    int max_q = -1;
    for (const auto& e : arr) {
        const auto kind = detail::field<std::string>(e, "kind");
        Gate g;
        if (kind == "zrot") {
            g.kind = Gate::ZRot;
            g.q = detail::field<int>(e, "q");
            g.theta = detail::field<double>(e, "theta");
            max_q = std::max(max_q, g.q);
        } else if (kind == "xxrot") {
            g.kind = Gate::XXRot;
            auto qs = detail::field<std::vector<int>>(e, "q");
            if (qs.size() != 2 || qs[1] != qs[0] + 1) throw Error("E_PROGRAM", "xxrot needs adjacent qubits [q, q+1]");
            g.q = qs[0];
            g.theta = detail::field<double>(e, "theta");
            max_q = std::max(max_q, g.q + 1);
        } else if (kind == "pauli") {
            g.kind = Gate::Pauli;
            g.letters = detail::field<std::string>(e, "string");
            if (p.n_qubits == 0) p.n_qubits = static_cast<int>(g.letters.size());
        } else {
            throw Error("E_PROGRAM", "unknown gate kind '" + kind + "'");
        }
        p.gates.push_back(std::move(g));
    }
    if (j.is_object() && j.contains("n_qubits")) p.n_qubits = detail::field<int>(j, "n_qubits");
    if (p.n_qubits == 0) p.n_qubits = max_q + 1;
    validate_program(p);
    return p;
}

inline json to_json(const GateStats& s) {
    return json{{"rotations", s.rotations}, {"two_qubit", s.two_qubit}, {"one_qubit", s.one_qubit}, {"depth", s.depth}};
}

// ---- integrals: {"n", "h1": [[...]], "h2": [{"pqrs": [p,q,r,s], "value": v}]}
// Each listed h2 entry fills its whole symmetry orbit; conflicting entries are rejected.

inline ElectronicIntegrals integrals_from_json(const json& j) {
    const int n = detail::field<int>(j, "n");
    if (n < 1) throw Error("E_DIM", "n must be >= 1");
    auto rows = detail::field<std::vector<std::vector<double>>>(j, "h1");
    if (static_cast<int>(rows.size()) != n) throw Error("E_DIM", "h1 must have n rows");
    ElectronicIntegrals ints = ElectronicIntegrals::zeros(n);
    for (int p = 0; p < n; ++p) {
        if (static_cast<int>(rows[p].size()) != n) throw Error("E_DIM", "h1 must have n columns");
        for (int q = 0; q < n; ++q) ints.h1(p, q) = rows[p][q];
    }
    std::vector<bool> set(ints.h2.size(), false);
    const json h2 = j.value("h2", json::array());
    if (!h2.is_array()) throw Error("E_PARSE", "h2 must be an array");
    for (const auto& e : h2) {
        auto idx = detail::field<std::vector<int>>(e, "pqrs");
        const double v = detail::field<double>(e, "value");
        if (idx.size() != 4) throw Error("E_PARSE", "pqrs needs four indices");
        for (int a : idx)
            if (a < 0 || a >= n) throw Error("E_INDEX", "pqrs index out of range");
        for (const auto& [a, b, c, d] : symmetry_orbit(idx[0], idx[1], idx[2], idx[3])) {
            const std::size_t k = ((std::size_t(a) * n + b) * n + c) * n + d;
            if (set[k] && std::abs(ints.h2[k] - v) > tol().validate)
                throw Error("E_SYMMETRY", "conflicting h2 values within one symmetry orbit");
            ints.h2[k] = v;
            set[k] = true;
        }
    }
    return ElectronicIntegrals::make(ints.h1, ints.h2);
}

inline json to_json(const ElectronicIntegrals& ints) {
    const int n = ints.n;
    json h1 = json::array(), h2 = json::array();
    for (int p = 0; p < n; ++p) {
        std::vector<double> row;
        for (int q = 0; q < n; ++q) row.push_back(ints.h1(p, q));
        h1.push_back(row);
    }
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s) {
                    const double v = ints.two(p, q, r, s);
                    if (v == 0.0) continue;
                    if (symmetry_orbit(p, q, r, s).front() != std::array<int, 4>{p, q, r, s}) continue;
                    h2.push_back({{"pqrs", {p, q, r, s}}, {"value", v}});
                }
    return json{{"n", n}, {"h1", h1}, {"h2", h2}};
}

// ---- shadow estimates: {"i,j,...": {"mean", "count"}}

inline json to_json(const Estimates& e) {
    json out = json::object();
    for (int k = 1; k <= e.k_max; ++k)
        for (std::size_t r = 0; r < e.values[k].size(); ++r) {
            auto idx = fermi::detail::colex_unrank(r, 2 * k);
            out[index_key(idx)] = {{"mean", e.values[k][r]}, {"count", e.count}};
        }
    return out;
}

inline Estimates estimates_from_json(const json& j, int n_modes, int k_max) {
    if (!j.is_object()) throw Error("E_PARSE", "estimates must be a JSON object");
    if (n_modes < 1 || k_max < 1 || k_max > n_modes) throw Error("E_RANGE", "k_max must lie in [1, n]");
    Estimates e{n_modes, k_max, 0, {}};
    for (int k = 0; k <= k_max; ++k) e.values.emplace_back(binomial(2 * n_modes, 2 * k), 0.0);
    e.values[0][0] = 1.0;
    for (const auto& [key, val] : j.items()) {
        std::vector<int> idx;
        try {
            idx = parse_index_key(key);
        } catch (const std::exception&) {
            throw Error("E_PARSE", "bad estimate key '" + key + "'");
        }
        Monomial::make(n_modes, idx); // validates range and order
        e.at(idx) = detail::field<double>(val, "mean");
        e.count = detail::field<std::uint64_t>(val, "count");
    }
    return e;
}

// ---- shadow samples CSV: stream,perm,signs,bits

inline std::string samples_csv(const std::vector<ShadowSample>& samples) {
    std::string out = "stream,perm,signs,bits\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        out += std::to_string(1 + i / shadow_chunk) + ",";
        for (std::size_t k = 0; k < s.q.perm.size(); ++k) out += (k ? " " : "") + std::to_string(s.q.perm[k]);
        out += ",";
        for (std::size_t k = 0; k < s.q.signs.size(); ++k) out += (k ? " " : "") + std::string(s.q.signs[k] > 0 ? "+" : "-");
        out += "," + fermi::to_string(s.b) + "\n";
    }
    return out;
}

struct ErrorPoint {
    std::uint64_t T;
    double raw;
    double mitigated;
};

inline std::string error_curve_csv(const std::vector<ErrorPoint>& pts) {
    std::string out = "T,unmitigated,mitigated\n";
    for (const auto& p : pts) out += std::to_string(p.T) + "," + fmt17(p.raw) + "," + fmt17(p.mitigated) + "\n";
    return out;
}

// ---- partition reports

inline json partition_report(const std::string& method, const MajoranaPolynomial& poly, const AnticommutingPartition& part,
                             int quartic_template_sets = -1) {
    const NormsReport r = norms_report(poly, part);
    json sets = json::array();
    std::size_t terms = 0;
    for (const auto& s : part.sets) {
        const RotationPlan plan = rotation_plan(s);
        json steps = json::array();
        for (const auto& [k, th] : plan.steps) steps.push_back({{"member", plan.members[k]}, {"theta", th}});
        sets.push_back({{"members", s.members},
                        {"betas", s.betas},
                        {"gamma", s.gamma},
                        {"rotation", {{"target", plan.target()}, {"target_sign", plan.target_sign}, {"steps", steps}}}});
        terms += s.members.size();
    }
    json out{{"method", method},
             {"n_modes", poly.n_modes},
             {"constant", poly.constant},
             {"term_count", terms},
             {"set_count", part.sets.size()}};
    if (quartic_template_sets >= 0) out["quartic_sets"] = quartic_template_sets;
    out["Lambda"] = r.lambda;
    out["Lambda_c"] = r.lambda_c;
    out["s_max"] = r.s_max;
    out["bounds_ok"] = r.bounds_ok;
    out["sets"] = sets;
    return out;
}

} // namespace fermi::io

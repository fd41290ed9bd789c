#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fermi {

// Every library failure carries a short machine-readable code; the CLI
// prints it as the prefix of its single error line.
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

  private:
    std::string code_;
};

// Single knob for every numerical check in the library.
struct Tolerances {
    double validate = 1e-10;    // input validation (isometries, symmetric integrals)
    double orthogonal = 1e-8;   // orthogonality / unitarity preconditions
    double antisymmetric = 1e-12;
    double pure = 1e-9;
    double spectrum = 1e-10;    // slack on eigenvalues of -M^2
    double probability = 1e-12; // clamp slack on conditional probabilities
    double prune = 1e-12;       // Hamiltonian coefficient pruning
    double drop_angle = 1e-14;  // compiler drops smaller rotations
    double mitigation = 1e-6;   // smallest admissible symmetry ratio
};

inline const Tolerances& tol() {
    static const Tolerances t{};
    return t;
}

// Measured bits, b[p] refers to mode / qubit p (leftmost character).
using Bits = std::vector<std::uint8_t>;

inline std::string to_string(const Bits& b) {
    std::string s(b.size(), '0');
    for (std::size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? '1' : '0';
    return s;
}

inline Bits bits_from_string(const std::string& s) {
    Bits b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') throw Error("E_FORMAT", "bitstring must contain only 0/1: " + s);
        b[i] = static_cast<std::uint8_t>(s[i] == '1');
    }
    return b;
}

// Exact binomial coefficient; throws on 64-bit overflow.
inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
        if (r > static_cast<unsigned __int128>(UINT64_MAX)) throw Error("E_RANGE", "binomial overflow");
    }
    return static_cast<std::uint64_t>(r);
}

struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    static Rational make(std::uint64_t n, std::uint64_t d) {
        if (d == 0) throw Error("E_RANGE", "zero denominator");
        std::uint64_t g = std::gcd(n, d);
        if (g == 0) g = 1;
        return {n / g, d / g};
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    Rational inverse() const { return make(den, num); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

// splitmix64 finaliser; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

// Counter-based stream derivation: stream (seed, index) depends only on the
// pair, so results do not change with the number of worker threads.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t a = mix64(master_seed);
    std::uint64_t b = mix64(a ^ mix64(index + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
    return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

} // namespace fermi

#include <catch_amalgamated.hpp>

#include "fermi/dense.hpp"
#include "fermi/partition.hpp"
#include "helpers.hpp"

using namespace fermi;
using dense::Matrix;

namespace {

ElectronicIntegrals random_integrals(int n, Rng& rng) {
    ElectronicIntegrals ints = ElectronicIntegrals::zeros(n);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = testutil::normal(rng);
    ints.h1 = g + g.transpose();
    for (auto& v : ints.h2) v = testutil::normal(rng);
    // Average over each symmetry orbit.
    std::vector<double> sym(ints.h2.size());
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s) {
                    auto orbit = symmetry_orbit(p, q, r, s);
                    double acc = 0;
                    for (const auto& [a, b, c, d] : orbit) acc += ints.two(a, b, c, d);
                    sym[((std::size_t(p) * n + q) * n + r) * n + s] = acc / orbit.size();
                }
    return ElectronicIntegrals::make(ints.h1, sym);
}

// Second-quantised Hamiltonian built directly from ladder operators.
Matrix ladder_hamiltonian(const ElectronicIntegrals& ints) {
    const int n = ints.n;
    std::vector<Matrix> a;
    for (int p = 0; p < n; ++p) a.push_back(dense::annihilation(n, p));
    Matrix H = Matrix::Zero(std::size_t{1} << n, std::size_t{1} << n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) H += ints.h1(p, q) * a[p].adjoint() * a[q];
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s)
                    if (ints.two(p, q, r, s) != 0.0) H += 0.5 * ints.two(p, q, r, s) * a[p].adjoint() * a[q].adjoint() * a[r] * a[s];
    return H;
}

Matrix monomial(int n, const std::vector<int>& idx) { return dense::build_monomial(Monomial::make(n, idx)); }

Matrix rotation_operator(int n, const RotationPlan& plan) {
    Matrix R = dense::identity(n);
    const Matrix Ps = monomial(n, plan.target());
    for (const auto& [k, th] : plan.steps) {
        Matrix X = dense::cplx(0, 1) * Ps * monomial(n, plan.members[k]);
        Matrix Rk = std::cos(th / 2) * dense::identity(n) - dense::cplx(0, std::sin(th / 2)) * X;
        R = (Rk * R).eval();
    }
    return R;
}

Matrix set_operator(int n, const AnticommutingSet& s) {
    Matrix H = Matrix::Zero(std::size_t{1} << n, std::size_t{1} << n);
    for (std::size_t j = 0; j < s.members.size(); ++j) H += s.betas[j] * monomial(n, s.members[j]);
    return H;
}

void require_anticommuting(const AnticommutingPartition& part) {
    for (const auto& set : part.sets)
        for (std::size_t a = 0; a < set.members.size(); ++a)
            for (std::size_t b = a + 1; b < set.members.size(); ++b)
                REQUIRE(anticommutes(Monomial::make(part.n_modes, set.members[a]), Monomial::make(part.n_modes, set.members[b])));
}

std::size_t term_count(const AnticommutingPartition& part) {
    std::size_t k = 0;
    for (const auto& s : part.sets) k += s.members.size();
    return k;
}

} // namespace

TEST_CASE("integral validation", "[partition]") {
    ElectronicIntegrals z = ElectronicIntegrals::zeros(2);
    Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(2, 2);
    h1(0, 1) = 1.0;
    REQUIRE_THROWS_AS(ElectronicIntegrals::make(h1, z.h2), Error);
    std::vector<double> h2 = z.h2;
    h2[1] = 0.5; // (0,0,0,1) without its partners
    REQUIRE_THROWS_AS(ElectronicIntegrals::make(Eigen::MatrixXd::Zero(2, 2), h2), Error);
    REQUIRE_THROWS_AS(ElectronicIntegrals::make(Eigen::MatrixXd::Zero(2, 2), std::vector<double>(3)), Error);
    REQUIRE(symmetry_orbit(0, 1, 2, 3).size() == 8);
    REQUIRE(symmetry_orbit(0, 0, 0, 0).size() == 1);
}

TEST_CASE("majorana_form examples", "[partition]") {
    MajoranaPolynomial zero = majorana_form(ElectronicIntegrals::zeros(3));
    REQUIRE(zero.constant == 0.0);
    REQUIRE(zero.terms.empty());

    ElectronicIntegrals num = ElectronicIntegrals::zeros(2);
    num.h1 = Eigen::MatrixXd::Identity(2, 2);
    MajoranaPolynomial poly = majorana_form(num);
    REQUIRE(poly.constant == 1.0);
    REQUIRE(poly.terms.size() == 2);
    REQUIRE(poly.terms.at({0, 1}) == -0.5); // i gamma_0 gamma_1 = -Z_0 = -Gamma_{01}
    REQUIRE(poly.terms.at({2, 3}) == -0.5);
    Matrix N = dense::annihilation(2, 0).adjoint() * dense::annihilation(2, 0) + dense::annihilation(2, 1).adjoint() * dense::annihilation(2, 1);
    REQUIRE(testutil::max_abs(dense::build_polynomial(poly) - N) < 1e-15);
}

TEST_CASE("majorana_form matches the ladder-operator Hamiltonian", "[partition]") {
    Rng rng = make_stream(51, 0);
    for (int n = 1; n <= 4; ++n)
        for (int t = 0; t < 3; ++t) {
            ElectronicIntegrals ints = random_integrals(n, rng);
            MajoranaPolynomial poly = majorana_form(ints);
            REQUIRE(testutil::max_abs(dense::build_polynomial(poly) - ladder_hamiltonian(ints)) < 1e-9);
            for (const auto& [idx, c] : poly.terms) {
                REQUIRE((idx.size() == 2 || idx.size() == 4));
                int even = 0;
                for (int a : idx) even += a % 2 == 0;
                REQUIRE(2 * even == static_cast<int>(idx.size()));
            }
        }
}

TEST_CASE("greedy partition", "[partition]") {
    SECTION("mutually anticommuting terms form one set") {
        MajoranaPolynomial p{3, 0.0, {}};
        for (int q = 0; q < 3; ++q) p.add(quadratic_index(0, q), 0.1 * (q + 1));
        REQUIRE(greedy_partition(p).sets.size() == 1);
    }
    SECTION("mutually commuting terms form one set each") {
        MajoranaPolynomial p{3, 0.0, {}};
        for (int q = 0; q < 3; ++q) p.add(quadratic_index(q, q), 1.0);
        REQUIRE(greedy_partition(p).sets.size() == 3);
    }
    SECTION("electronic Hamiltonian reduces the term count") {
        Rng rng = make_stream(52, 0);
        MajoranaPolynomial poly = majorana_form(random_integrals(4, rng));
        AnticommutingPartition a = greedy_partition(poly), b = greedy_partition(poly);
        REQUIRE(a.sets.size() < poly.terms.size());
        REQUIRE(term_count(a) == poly.terms.size());
        require_anticommuting(a);
        REQUIRE(a.sets.size() == b.sets.size());
        for (std::size_t k = 0; k < a.sets.size(); ++k) REQUIRE(a.sets[k].members == b.sets[k].members);
        NormsReport r = norms_report(poly, a);
        REQUIRE(r.bounds_ok);
    }
    SECTION("ordering is by magnitude, then index set") {
        MajoranaPolynomial p{2, 0.0, {}};
        p.add({0, 1}, 0.5);
        p.add({2, 3}, -0.5);
        p.add({0, 3}, 2.0);
        AnticommutingPartition part = greedy_partition(p);
        REQUIRE(part.sets.size() == 2);
        REQUIRE(part.sets[0].members == std::vector<std::vector<int>>{{0, 3}, {0, 1}});
        REQUIRE(part.sets[1].members == std::vector<std::vector<int>>{{2, 3}});
    }
}

TEST_CASE("analytic partition count law and structure", "[partition]") {
    REQUIRE_THROWS_AS(analytic_partition(1), Error);
    REQUIRE(analytic_partition(4).quartic_sets == 12);
    for (int n = 2; n <= 8; ++n) {
        PartitionTemplate t = analytic_partition(n);
        if (n >= 3) REQUIRE(t.quartic_sets == static_cast<int>(binomial(n, 2) * (n - 2)));
        std::set<std::vector<int>> seen;
        std::size_t quartic = 0, quadratic = 0;
        for (const auto& set : t.sets)
            for (const auto& idx : set) {
                REQUIRE(seen.insert(idx).second);
                (idx.size() == 4 ? quartic : quadratic)++;
            }
        REQUIRE(quartic == binomial(n, 2) * binomial(n, 2));
        REQUIRE(quadratic == static_cast<std::size_t>(n * n));
        if (n <= 6) {
            AnticommutingPartition as_part{n, {}, true};
            for (const auto& set : t.sets) as_part.sets.push_back(AnticommutingSet::make(set, std::vector<double>(set.size(), 1.0)));
            require_anticommuting(as_part);
        }
    }
}

TEST_CASE("analytic partition applied to an electronic Hamiltonian", "[partition]") {
    Rng rng = make_stream(53, 0);
    for (int n : {3, 4, 5}) {
        MajoranaPolynomial poly = majorana_form(random_integrals(n, rng));
        AnticommutingPartition part = apply_template(poly, analytic_partition(n));
        require_anticommuting(part);
        REQUIRE(term_count(part) == poly.terms.size());
        REQUIRE(norms_report(poly, part).bounds_ok);
    }
    MajoranaPolynomial odd{3, 0.0, {}};
    odd.add({0, 2}, 1.0);
    REQUIRE_THROWS_AS(apply_template(odd, analytic_partition(3)), Error);
}

TEST_CASE("rotation plans", "[partition]") {
    SECTION("singleton gives an empty plan") {
        RotationPlan p = rotation_plan(AnticommutingSet::make({{0, 1}}, {2.0}));
        REQUIRE(p.steps.empty());
        REQUIRE(p.target_sign == 1);
        REQUIRE(rotation_plan(AnticommutingSet::make({{0, 1}}, {-2.0})).target_sign == -1);
    }
    SECTION("two terms") {
        AnticommutingSet s = AnticommutingSet::make({{0, 1}, {0, 3}}, {0.6, 0.8});
        RotationPlan p = rotation_plan(s);
        REQUIRE(p.steps.size() == 1);
        REQUIRE(std::abs(p.steps[0].second - std::atan(0.75)) < 1e-15);
        Matrix R = rotation_operator(2, p);
        REQUIRE(testutil::max_abs(R * set_operator(2, s) * R.adjoint() - monomial(2, {0, 3})) < 1e-12);
    }
    SECTION("random five-term sets at n = 4") {
        Rng rng = make_stream(54, 0);
        PartitionTemplate t = analytic_partition(4);
        int tested = 0;
        for (const auto& set : t.sets) {
            if (set.size() < 5) continue;
            std::vector<std::vector<int>> members(set.begin(), set.begin() + 5);
            std::vector<double> c;
            for (int j = 0; j < 5; ++j) c.push_back(testutil::normal(rng));
            AnticommutingSet s = AnticommutingSet::make(members, c);
            RotationPlan p = rotation_plan(s);
            REQUIRE(p.steps.size() == 4);
            Matrix R = rotation_operator(4, p);
            REQUIRE(testutil::max_abs(R * set_operator(4, s) * R.adjoint() - monomial(4, p.target())) < 1e-9);
            ++tested;
        }
        REQUIRE(tested > 0);
    }
    SECTION("zero members are dropped; an all-zero set is rejected") {
        AnticommutingSet s = AnticommutingSet::make({{0, 1}, {0, 3}, {0, 5}}, {0.6, 0.0, -0.8});
        RotationPlan p = rotation_plan(s);
        REQUIRE(p.members.size() == 2);
        Matrix R = rotation_operator(3, p);
        REQUIRE(testutil::max_abs(R * set_operator(3, s) * R.adjoint() - monomial(3, {0, 5})) < 1e-12);
        AnticommutingSet zero{{{0, 1}}, {0.0}, {0.0}, 0.0};
        REQUIRE_THROWS_AS(rotation_plan(zero), Error);
    }
}

TEST_CASE("partitions preserve the Hamiltonian", "[partition]") {
    Rng rng = make_stream(55, 0);
    for (int n = 2; n <= 4; ++n) {
        MajoranaPolynomial poly = majorana_form(random_integrals(n, rng));
        Matrix H = dense::build_polynomial(poly) - poly.constant * dense::identity(n);
        for (const auto& part : {greedy_partition(poly), apply_template(poly, analytic_partition(n))}) {
            Matrix acc = Matrix::Zero(H.rows(), H.cols());
            for (const auto& set : part.sets) {
                RotationPlan p = rotation_plan(set);
                Matrix R = rotation_operator(n, p);
                acc += set.gamma * p.target_sign * R.adjoint() * monomial(n, p.target()) * R;
            }
            REQUIRE(testutil::max_abs(acc - H) < 1e-8);
        }
    }
}

TEST_CASE("norms report", "[partition]") {
    Rng rng = make_stream(56, 0);
    MajoranaPolynomial poly = majorana_form(random_integrals(3, rng));
    AnticommutingPartition trivial{3, {}, true};
    double lambda = 0;
    for (const auto& [idx, c] : poly.terms) {
        trivial.sets.push_back(AnticommutingSet::make({idx}, {c}));
        lambda += std::abs(c);
    }
    NormsReport r = norms_report(poly, trivial);
    REQUIRE(std::abs(r.lambda_c - r.lambda) < 1e-12);
    REQUIRE(std::abs(r.lambda - lambda) < 1e-12);
    REQUIRE(r.s_max == 1);

    MajoranaPolynomial uniform{3, 0.0, {}};
    for (int q = 0; q < 3; ++q) uniform.add(quadratic_index(0, q), 0.7);
    uniform.add(quadratic_index(1, 1), -0.7);
    AnticommutingPartition g = greedy_partition(uniform);
    double expect = 0;
    for (const auto& s : g.sets) expect += std::sqrt(static_cast<double>(s.members.size())) * 0.7;
    REQUIRE(std::abs(norms_report(uniform, g).lambda_c - expect) < 1e-12);

    AnticommutingPartition broken = trivial;
    broken.sets.pop_back();
    REQUIRE_THROWS_AS(norms_report(poly, broken), Error);
}

#include "oracles.hpp"

#include "qadv/rules.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace qadv;

namespace {

void check_rule_invariants(const QuadratureRule& r) {
    const auto x = r.nodes();
    const auto w = r.weights();
    REQUIRE(x.size() == w.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(r.interval().contains(x[i]));
        if (i > 0) CHECK(x[i - 1] < x[i]);
    }
    double sum = 0.0;
    for (double wi : w) sum += wi;
    const double len = r.interval().length();
    CHECK(std::abs(sum - len) <= 1e-12 * len);
}

void check_exactness(const QuadratureRule& r, int degree) {
    const double a = r.interval().a();
    const double b = r.interval().b();
    for (int j = 0; j <= degree; ++j) {
        const double exact = oracle::monomial_integral(j, a, b);
        const double got = apply(r, [j](double x) { return std::pow(x, j); });
        INFO(r.label() << " x^" << j);
        CHECK(std::abs(got - exact) <= 1e-10 * (1.0 + std::abs(exact)));
    }
}

}  // namespace

TEST_CASE("interval rejects a >= b") {
    CHECK_THROWS_AS(Interval(1.0, 1.0), ConstructionError);
    CHECK_THROWS_AS(Interval(2.0, 1.0), ConstructionError);
    CHECK_THROWS_AS(Interval(0.0, std::numeric_limits<double>::infinity()), ConstructionError);
    CHECK(Interval(-1.0, 3.0).length() == 4.0);
}

TEST_CASE("quadrature rule validates its nodes") {
    const Interval iv(0.0, 1.0);
    CHECK_THROWS_AS(QuadratureRule(iv, {}, {}, "empty"), ConstructionError);
    CHECK_THROWS_AS(QuadratureRule(iv, {0.1, 0.2}, {1.0}, "mismatch"), ConstructionError);
    CHECK_THROWS_AS(QuadratureRule(iv, {0.2, 0.2}, {0.5, 0.5}, "duplicate"), ConstructionError);
    CHECK_THROWS_AS(QuadratureRule(iv, {0.5, 0.2}, {0.5, 0.5}, "unsorted"), ConstructionError);
    CHECK_THROWS_AS(QuadratureRule(iv, {-0.1, 0.5}, {0.5, 0.5}, "external"), ConstructionError);
    CHECK_NOTHROW(QuadratureRule(iv, {0.0, 1.0}, {0.5, 0.5}, "trapezoid"));
}

TEST_CASE("newton_cotes_base") {
    SUBCASE("trapezoid") {
        const auto r = newton_cotes_base(1);
        CHECK(std::vector<double>(r.nodes().begin(), r.nodes().end()) == std::vector<double>{0.0, 1.0});
        CHECK(r.weights()[0] == 0.5);
        CHECK(r.weights()[1] == 0.5);
    }
    SUBCASE("simpson") {
        const auto r = newton_cotes_base(2);
        REQUIRE(r.size() == 3);
        CHECK(r.nodes()[1] == 0.5);
        CHECK(r.weights()[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
        CHECK(r.weights()[1] == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
        CHECK(r.weights()[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    }
    SUBCASE("degree 4 weights sum to one") {
        const auto r = newton_cotes_base(4);
        double s = 0.0;
        for (double w : r.weights()) s += w;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("every supported degree is exact through its degree of exactness") {
        for (int d = 1; d <= 8; ++d) {
            const auto r = newton_cotes_base(d);
            CHECK(r.exactness() == (d % 2 == 0 ? d + 1 : d));
            check_rule_invariants(r);
            check_exactness(r, r.exactness());
        }
    }
    SUBCASE("unsupported degrees") {
        CHECK_THROWS_AS(newton_cotes_base(0), UnsupportedDegree);
        CHECK_THROWS_AS(newton_cotes_base(9), UnsupportedDegree);
    }
}

TEST_CASE("composite") {
    const auto trap = newton_cotes_base(1);
    SUBCASE("two trapezoid panels merge the shared node") {
        const auto r = composite(trap, 2, Interval(0.0, 1.0));
        REQUIRE(r.size() == 3);
        CHECK(r.nodes()[0] == 0.0);
        CHECK(r.nodes()[1] == 0.5);
        CHECK(r.nodes()[2] == 1.0);
        CHECK(r.weights()[0] == 0.25);
        CHECK(r.weights()[1] == 0.5);
        CHECK(r.weights()[2] == 0.25);
    }
    SUBCASE("single panel is an affine map") {
        const auto r = composite(trap, 1, Interval(0.0, 4.0));
        REQUIRE(r.size() == 2);
        CHECK(r.nodes()[1] == 4.0);
        CHECK(r.weights()[0] == 2.0);
        CHECK(r.weights()[1] == 2.0);
    }
    SUBCASE("node count m*(base-1)+1") {
        const Interval iv(-0.3, 2.7);
        for (int d = 1; d <= 8; ++d) {
            const auto base = newton_cotes_base(d);
            for (std::size_t m : {1u, 2u, 3u, 7u, 64u}) {
                const auto r = composite(base, m, iv);
                CHECK(r.size() == m * (base.size() - 1) + 1);
                check_rule_invariants(r);
                check_exactness(r, base.exactness());
            }
        }
    }
    SUBCASE("zero panels") { CHECK_THROWS_AS(composite(trap, 0, Interval(0.0, 1.0)), ConstructionError); }
}

TEST_CASE("gauss_legendre") {
    SUBCASE("one point is the midpoint rule") {
        const auto r = gauss_legendre(1, Interval(-1.0, 1.0));
        CHECK(r.nodes()[0] == 0.0);
        CHECK(r.weights()[0] == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("two points") {
        const auto r = gauss_legendre(2, Interval(-1.0, 1.0));
        CHECK(r.nodes()[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
        CHECK(r.nodes()[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
        CHECK(r.weights()[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(r.weights()[1] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(apply(r, [](double x) { return x * x * x; })) < 1e-15);
    }
    SUBCASE("five points integrate x^9 on [0,1]") {
        const auto r = gauss_legendre(5, Interval(0.0, 1.0));
        CHECK(std::abs(apply(r, [](double x) { return std::pow(x, 9); }) - 0.1) < 1e-12);
    }
    SUBCASE("exactness through 2n-1 up to n=64") {
        const Interval iv(-2.0, 3.0);
        for (std::size_t n = 1; n <= 64; ++n) {
            const auto r = gauss_legendre(n, iv);
            check_rule_invariants(r);
            // Monomials on [-2,3] lose relative accuracy at high degree; cap at 40.
            check_exactness(r, std::min<int>(2 * static_cast<int>(n) - 1, 40));
        }
    }
    SUBCASE("large n stays well formed") {
        for (std::size_t n : {512u, 4096u}) {
            const auto r = gauss_legendre(n, Interval(0.0, 1.0));
            check_rule_invariants(r);
            for (double w : r.weights()) CHECK(w > 0.0);
        }
    }
    SUBCASE("size limits") {
        CHECK_THROWS_AS(gauss_legendre(0, Interval(0.0, 1.0)), ConstructionError);
        CHECK_THROWS_AS(gauss_legendre(8193, Interval(0.0, 1.0)), ConstructionError);
    }
}

TEST_CASE("clenshaw_curtis") {
    SUBCASE("two points is the trapezoid rule") {
        const auto r = clenshaw_curtis(2, Interval(-1.0, 1.0));
        CHECK(r.nodes()[0] == -1.0);
        CHECK(r.nodes()[1] == 1.0);
        CHECK(r.weights()[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(r.weights()[1] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("three points integrate x^2") {
        const auto r = clenshaw_curtis(3, Interval(-1.0, 1.0));
        CHECK(std::abs(apply(r, [](double x) { return x * x; }) - 2.0 / 3.0) < 1e-12);
    }
    SUBCASE("nine points on [0,1]") {
        const auto r = clenshaw_curtis(9, Interval(0.0, 1.0));
        double s = 0.0;
        for (double w : r.weights()) s += w;
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
    SUBCASE("exact through degree n-1") {
        const Interval iv(-1.0, 2.0);
        for (std::size_t n = 2; n <= 40; ++n) {
            const auto r = clenshaw_curtis(n, iv);
            check_rule_invariants(r);
            check_exactness(r, static_cast<int>(n) - 1);
        }
    }
    SUBCASE("large n") { check_rule_invariants(clenshaw_curtis(4097, Interval(0.0, 1.0))); }
    SUBCASE("too small") { CHECK_THROWS_AS(clenshaw_curtis(1, Interval(0.0, 1.0)), ConstructionError); }
}

TEST_CASE("apply") {
    const auto trap = composite(newton_cotes_base(1), 1, Interval(0.0, 1.0));
    CHECK(apply(trap, [](double x) { return x; }) == 0.5);

    SUBCASE("non-finite values name the node") {
        try {
            apply(trap, [](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0; });
            FAIL("expected EvaluationError");
        } catch (const EvaluationError& e) {
            CHECK(e.node() == 1.0);
        }
    }
    SUBCASE("compensated accumulation") {
        // 1e16 + many tiny terms - 1e16: naive summation loses the tiny terms.
        std::vector<double> nodes;
        std::vector<double> weights;
        for (int i = 0; i < 1001; ++i) {
            nodes.push_back(i / 1000.0);
            weights.push_back(1.0);
        }
        const QuadratureRule r(Interval(0.0, 1.0), nodes, weights, "counting");
        const double got = apply(r, [](double x) { return x == 0.0 ? 1e16 : x == 1.0 ? -1e16 : 1.0; });
        CHECK(got == 999.0);
    }
}

TEST_CASE("rule families") {
    const Interval iv(0.0, 2.0);
    SUBCASE("names") {
        CHECK(RuleFamily::composite_newton_cotes(1, iv).name() == "composite-trapezoid");
        CHECK(RuleFamily::composite_newton_cotes(2, iv).name() == "composite-simpson");
        CHECK(RuleFamily::gauss_legendre(iv).name() == "gauss-legendre");
        CHECK(RuleFamily::clenshaw_curtis(iv).name() == "clenshaw-curtis");
    }
    SUBCASE("node count nondecreasing in the requested size") {
        for (const auto& fam : {RuleFamily::composite_newton_cotes(1, iv), RuleFamily::composite_newton_cotes(2, iv),
                                RuleFamily::composite_newton_cotes(4, iv), RuleFamily::gauss_legendre(iv),
                                RuleFamily::clenshaw_curtis(iv)}) {
            std::size_t prev = 0;
            for (std::size_t n = 1; n <= 80; ++n) {
                const auto r = fam.generate(n);
                CHECK(r.size() >= prev);
                CHECK(r.size() >= n);
                prev = r.size();
            }
        }
    }
    SUBCASE("composite simpson count is 2m+1") {
        const auto fam = RuleFamily::composite_newton_cotes(2, iv);
        CHECK(fam.generate(16).size() == 17);
        CHECK(fam.generate(17).size() == 17);
        CHECK(fam.generate(18).size() == 19);
    }
    SUBCASE("explicit family") {
        std::vector<QuadratureRule> rules{gauss_legendre(5, iv), gauss_legendre(2, iv)};
        const auto fam = RuleFamily::explicit_rules(rules);
        CHECK(fam.generate(1).size() == 2);
        CHECK(fam.generate(3).size() == 5);
        CHECK_THROWS_AS(fam.generate(6), ConstructionError);
        CHECK_THROWS_AS(RuleFamily::explicit_rules({gauss_legendre(2, iv), gauss_legendre(2, Interval(0.0, 1.0))}),
                        ConstructionError);
    }
}

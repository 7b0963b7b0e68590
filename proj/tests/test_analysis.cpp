#include "oracles.hpp"

#include "qadv/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace qadv;

namespace {

double factorial(int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

std::vector<ErrorRecord> synthetic(const std::function<double(double)>& err) {
    std::vector<ErrorRecord> out;
    for (std::size_t n = 8; n <= 4096; n *= 2) {
        ErrorRecord r;
        r.node_count = n;
        r.abs_error = err(static_cast<double>(n));
        out.push_back(r);
    }
    return out;
}

}  // namespace

TEST_CASE("geometric sizes") {
    const auto s = geometric_sizes(16, 4096);
    CHECK(s.front() == 16);
    CHECK(s.back() == 4096);
    CHECK(s.size() == 17);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(geometric_sizes(4, 4) == std::vector<std::size_t>{4});
    CHECK_THROWS_AS(geometric_sizes(10, 5), Error);
}

TEST_CASE("error_sequence: composite trapezoid, whole-interval adversary, k=1") {
    const Interval iv(0.0, 1.0);
    const auto fam = RuleFamily::composite_newton_cotes(1, iv);
    std::vector<std::size_t> sizes(1024);
    std::iota(sizes.begin(), sizes.end(), 2);
    const auto recs = error_sequence(fam, SmoothnessOrder(1), SplineKind::Global, sizes);
    REQUIRE(recs.size() == sizes.size());
    for (const auto& r : recs) {
        CHECK(std::abs(r.quad_value) <= 1e-12);
        const double gap = 1.0 / static_cast<double>(r.node_count - 1);
        const double expected = static_cast<double>(r.node_count - 1) * gap * gap / 4.0;
        CHECK(r.abs_error == doctest::Approx(expected).epsilon(1e-12));
        CHECK(r.abs_error == std::abs(r.quad_value - r.exact_value));
    }
    CHECK(recs[3].node_count == 5);
    CHECK(recs[3].abs_error == doctest::Approx(0.0625).epsilon(1e-14));

    const auto fit = fit_order(recs, 0.5);
    CHECK(fit.slope >= -1.1);
    CHECK(fit.slope <= -0.9);
}

TEST_CASE("error_sequence: single-gap adversary error is maxgap^{k+1}/4^k") {
    const Interval iv(-1.0, 2.0);
    for (const auto& fam : {RuleFamily::gauss_legendre(iv), RuleFamily::clenshaw_curtis(iv),
                            RuleFamily::composite_newton_cotes(2, iv)}) {
        for (int k : {1, 2, 3}) {
            const std::vector<std::size_t> sizes{3, 8, 21, 64};
            const auto recs = error_sequence(fam, SmoothnessOrder(k), SplineKind::Local, sizes);
            for (const auto& r : recs) {
                CHECK(r.abs_error == doctest::Approx(std::pow(r.max_gap, k + 1) / std::pow(4.0, k)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("error_sequence: parallel runs match serial runs") {
    const Interval iv(0.0, 1.0);
    const auto fam = RuleFamily::gauss_legendre(iv);
    const auto sizes = geometric_sizes(4, 512);
    const auto serial = error_sequence(fam, SmoothnessOrder(2), SplineKind::Global, sizes, 1);
    const auto parallel = error_sequence(fam, SmoothnessOrder(2), SplineKind::Global, sizes, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].abs_error == parallel[i].abs_error);
        CHECK(serial[i].rule_label == parallel[i].rule_label);
    }
}

TEST_CASE("error_sequence: bad sizes") {
    const auto fam = RuleFamily::gauss_legendre(Interval(0.0, 1.0));
    CHECK_THROWS_AS(error_sequence(fam, SmoothnessOrder(1), SplineKind::Global, std::vector<std::size_t>{}), Error);
    CHECK_THROWS_AS(error_sequence(fam, SmoothnessOrder(1), SplineKind::Global, std::vector<std::size_t>{5, 5}), Error);
    try {
        error_sequence(fam, SmoothnessOrder(1), SplineKind::Global, std::vector<std::size_t>{4, 9000});
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("size 9000") != std::string::npos);
    }
}

TEST_CASE("fit_order") {
    SUBCASE("exact power law") {
        const auto recs = synthetic([](double n) { return 7.0 * std::pow(n, -3.0); });
        const auto fit = fit_order(recs, 1.0);
        CHECK(fit.slope == doctest::Approx(-3.0).epsilon(1e-10));
        CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fit.order() == doctest::Approx(3.0).epsilon(1e-10));
        CHECK(fit.n_range.first == 8);
        CHECK(fit.n_range.second == 4096);
    }
    SUBCASE("constant error") {
        const auto fit = fit_order(synthetic([](double) { return 0.25; }), 0.5);
        CHECK(std::abs(fit.slope) < 1e-12);
        CHECK(fit.r_squared == 1.0);
    }
    SUBCASE("tail selection") {
        const auto recs = synthetic([](double n) { return n < 100 ? 1.0 : std::pow(n, -2.0); });
        CHECK(fit_order(recs, 0.5).slope == doctest::Approx(-2.0).epsilon(1e-10));
    }
    SUBCASE("records at the floor are ignored") {
        auto recs = synthetic([](double n) { return std::pow(n, -1.0); });
        recs.back().abs_error = 0.0;
        CHECK(fit_order(recs, 1.0).n_range.second == 2048);
    }
    SUBCASE("insufficient data") {
        auto recs = synthetic([](double n) { return 1.0 / n; });
        recs.resize(2);
        CHECK_THROWS_AS(fit_order(recs, 1.0), InsufficientData);
        CHECK_THROWS_AS(fit_order(synthetic([](double n) { return 1.0 / n; }), 0.2), InsufficientData);
    }
}

TEST_CASE("theorem1_bound_check") {
    const Interval iv(0.0, 2.0);
    SUBCASE("equally spaced nodes meet the bound with equality") {
        const auto recs = error_sequence(RuleFamily::composite_newton_cotes(1, iv), SmoothnessOrder(2),
                                         SplineKind::Global, geometric_sizes(2, 300));
        const auto chk = theorem1_bound_check(recs, SmoothnessOrder(2), iv);
        CHECK(chk.passed);
        for (double m : chk.margins) CHECK(std::abs(m) < 1e-12);
    }
    SUBCASE("clustered nodes are strictly above") {
        const auto recs = error_sequence(RuleFamily::clenshaw_curtis(iv), SmoothnessOrder(1), SplineKind::Global,
                                         geometric_sizes(5, 300));
        const auto chk = theorem1_bound_check(recs, SmoothnessOrder(1), iv);
        CHECK(chk.passed);
        CHECK(chk.worst_margin > 0.0);
    }
    SUBCASE("one node: endpoint terms only") {
        CHECK(theorem1_lower_bound(1, 0.5, 0.5, SmoothnessOrder(1), iv) == doctest::Approx(0.125 + 1.125));
    }
    SUBCASE("violations are reported") {
        ErrorRecord r;
        r.node_count = 3;
        r.first_node = 0.0;
        r.last_node = 2.0;
        r.abs_error = 0.01;
        const auto chk = theorem1_bound_check(std::vector<ErrorRecord>{r}, SmoothnessOrder(1), iv);
        CHECK_FALSE(chk.passed);
        REQUIRE(chk.violator.has_value());
        CHECK(chk.violator->abs_error == 0.01);
        CHECK(chk.worst_margin < 0.0);
    }
}

TEST_CASE("theorem2_bound_check") {
    const Interval iv(0.0, 1.0);
    SUBCASE("equally spaced interior nodes meet the bound with equality") {
        for (std::size_t n : {1u, 2u, 5u, 31u, 100u}) {
            std::vector<double> nodes;
            std::vector<double> weights;
            for (std::size_t i = 1; i <= n; ++i) {
                nodes.push_back(static_cast<double>(i) / static_cast<double>(n + 1));
                weights.push_back(1.0 / static_cast<double>(n));
            }
            const auto fam = RuleFamily::explicit_rules({QuadratureRule(iv, nodes, weights, "open-equal")});
            const auto recs = error_sequence(fam, SmoothnessOrder(2), SplineKind::Local, std::vector<std::size_t>{n});
            const auto chk = theorem2_bound_check(recs, SmoothnessOrder(2), iv);
            CHECK(chk.passed);
            CHECK(std::abs(chk.worst_margin) < 1e-12);
        }
    }
    SUBCASE("closed equally spaced nodes are strictly above") {
        const auto recs = error_sequence(RuleFamily::composite_newton_cotes(1, iv), SmoothnessOrder(1),
                                         SplineKind::Local, geometric_sizes(2, 256));
        const auto chk = theorem2_bound_check(recs, SmoothnessOrder(1), iv);
        CHECK(chk.passed);
        CHECK(chk.worst_margin > 0.0);
    }
    SUBCASE("gauss-legendre sweep") {
        for (int k = 1; k <= 4; ++k) {
            const auto recs = error_sequence(RuleFamily::gauss_legendre(iv), SmoothnessOrder(k), SplineKind::Local,
                                             geometric_sizes(1, 1024));
            CHECK(theorem2_bound_check(recs, SmoothnessOrder(k), iv).passed);
        }
    }
}

TEST_CASE("scaled errors stay bounded away from zero") {
    const Interval iv(0.0, 1.0);
    const auto recs = error_sequence(RuleFamily::gauss_legendre(iv), SmoothnessOrder(2), SplineKind::Global,
                                     geometric_sizes(8, 1024));
    for (double v : scaled_errors(recs, 2)) CHECK(v > 1e-3);
}

TEST_CASE("verify_smoothness") {
    const auto fractions = default_step_fractions();
    SUBCASE("k=2 jump of 2*2! at the quarter points, none at nodes or midpoints") {
        const auto s = build_global(std::vector<double>{0.0, 1.0, 3.0, 4.0}, SmoothnessOrder(2), Interval(-1.0, 4.0));
        const auto reps = verify_smoothness(s, 2, fractions);
        REQUIRE(reps.size() == s.knots().size());
        for (const auto& r : reps) {
            CHECK(r.max_matched_order >= 1);
            CHECK(r.in_bad_set);
            const double frac = r.knot < 0.0 ? 0.0 : r.knot;
            const bool quarter = r.knot == 0.25 || r.knot == 0.75 || r.knot == 1.5 || r.knot == 2.5 ||
                                 r.knot == 3.25 || r.knot == 3.75;
            (void)frac;
            if (quarter) {
                CHECK(std::abs(r.jump_at_k) == doctest::Approx(4.0).epsilon(1e-6));
                CHECK(r.is_bad);
            } else {
                CHECK(std::abs(r.jump_at_k) < 1e-6);
                CHECK_FALSE(r.is_bad);
            }
        }
    }
    SUBCASE("k=1: all knots continuous; jumps only at nodes and midpoints") {
        const auto s = build_global(std::vector<double>{0.2, 0.5, 0.9}, SmoothnessOrder(1), Interval(0.0, 1.0));
        for (const auto& r : verify_smoothness(s, 1, fractions)) {
            CHECK(r.max_matched_order >= 0);
            CHECK(r.jump_at_k == doctest::Approx(r.exact_jump_at_k).epsilon(1e-9));
            CHECK((!r.is_bad || r.in_bad_set));
        }
    }
    SUBCASE("single-gap adversary meets zero with a jump of k!") {
        for (int k = 1; k <= 2; ++k) {
            const auto s = build_local(std::vector<double>{0.0, 0.3, 0.4, 1.0}, SmoothnessOrder(k), Interval(0.0, 1.0));
            for (const auto& r : verify_smoothness(s, k, fractions)) {
                if (r.knot == 0.4) CHECK(std::abs(r.jump_at_k) == doctest::Approx(factorial(k)).epsilon(1e-6));
            }
        }
    }
    SUBCASE("quarter-point splices for k >= 3 match only through the first derivative") {
        for (int k = 3; k <= 6; ++k) {
            const auto s = build_global(std::vector<double>{0.0, 1.0}, SmoothnessOrder(k), Interval(0.0, 1.0));
            for (const auto& r : verify_smoothness(s, k, fractions)) {
                if (r.knot == 0.25 || r.knot == 0.75) {
                    CHECK(r.max_matched_order == 1);
                    CHECK(r.is_bad);
                } else {
                    CHECK(r.max_matched_order >= k - 1);
                }
            }
        }
    }
    SUBCASE("fd agrees with exact one-sided derivatives up to k=12") {
        for (int k = 1; k <= 12; ++k) {
            const auto s = build_global(std::vector<double>{0.1, 0.35, 0.6, 0.95}, SmoothnessOrder(k), Interval(0.0, 1.0));
            for (const auto& r : verify_smoothness(s, k, fractions)) {
                CHECK(r.jump_at_k == doctest::Approx(r.exact_jump_at_k).epsilon(1e-6).scale(factorial(k)));
            }
        }
    }
    SUBCASE("bad step fractions") {
        const auto s = build_global(std::vector<double>{0.5}, SmoothnessOrder(1), Interval(0.0, 1.0));
        CHECK_THROWS_AS(verify_smoothness(s, 1, std::vector<double>{1.5}), Error);
        CHECK_THROWS_AS(verify_smoothness(s, 1, std::vector<double>{}), Error);
    }
}

TEST_CASE("non-analytic knots") {
    const Interval iv(0.0, 1.0);
    const std::vector<double> nodes{0.0, 0.5, 1.0};
    CHECK(non_analytic_knots(build_global(nodes, SmoothnessOrder(1), iv)) == std::vector<double>{0.25, 0.5, 0.75});
    CHECK(non_analytic_knots(build_global(nodes, SmoothnessOrder(2), iv)) ==
          std::vector<double>{0.125, 0.375, 0.625, 0.875});
    CHECK(non_analytic_knots(build_global(nodes, SmoothnessOrder(3), iv)).size() == 7);
}

TEST_CASE("derivative sup norms") {
    const Interval iv(0.0, 4.0);
    for (int k = 1; k <= 6; ++k) {
        const auto s = build_global(std::vector<double>{0.0, 4.0}, SmoothnessOrder(k), iv);
        const auto norms = derivative_sup_norms(s, 2000);
        CHECK(norms.order_k == doctest::Approx(factorial(k)));
        CHECK(norms.order_k_min == doctest::Approx(factorial(k)));
        // For k=1 the two rising pieces form one line of length gap/2.
        const double expected = k == 1 ? iv.length() / 2.0 : iv.length() / 4.0 * factorial(k);
        CHECK(norms.order_k_minus_1 == doctest::Approx(expected));
    }
    // A long endpoint stretch exceeds (b-a)/4 * k!.
    const auto wide = build_global(std::vector<double>{1.0}, SmoothnessOrder(1), Interval(0.0, 2.0));
    CHECK(derivative_sup_norms(wide, 100).order_k_minus_1 == doctest::Approx(1.0));
}

TEST_CASE("oracle_integral") {
    CHECK(oracle_integral(build_local(std::vector<double>{0.0, 1.0, 5.0, 6.0}, SmoothnessOrder(1), Interval(0.0, 6.0)),
                          1e-11) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(oracle_integral(build_global(std::vector<double>{1.0}, SmoothnessOrder(1), Interval(0.0, 2.0)), 1e-11) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(adaptive_integral([](double) { return 0.0; }, 0.0, 1.0, 1e-12) == 0.0);
    CHECK_THROWS_AS(adaptive_integral([](double x) { return x; }, 0.0, 1.0, 1e-14), Error);
    CHECK_THROWS_AS(adaptive_integral([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)) + (x > 0.3 ? 1e3 : 0.0); },
                                      0.0, 1.0, 1e-12, 5),
                    NonConvergence);

    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> kd(1, 6);
    std::uniform_int_distribution<int> nd(1, 64);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const double a = -3.0 + 6.0 * u(rng);
        const Interval iv(a, a + 0.5 + 4.0 * u(rng));
        const auto nodes = oracle::spaced_nodes(rng, iv.a(), iv.b(), static_cast<std::size_t>(nd(rng)));
        const SmoothnessOrder k(kd(rng));
        const auto s = trial % 2 ? build_global(nodes, k, iv) : build_local(nodes, k, iv);
        CHECK(oracle_integral(s, 1e-11) == doctest::Approx(exact_integral(s)).epsilon(1e-9));
    }
}

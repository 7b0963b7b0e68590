#pragma once

#include "qadv/adversary.hpp"
#include "qadv/rules.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qadv {

/// One rule of a sweep applied to the adversary built from its own nodes.
struct ErrorRecord {
    std::size_t node_count = 0;
    std::string rule_label;
    double quad_value = 0.0;
    double exact_value = 0.0;
    double abs_error = 0.0;
    // Node geometry, kept so bounds can be re-derived from the actual nodes.
    double first_node = 0.0;
    double last_node = 0.0;
    double max_gap = 0.0;  // largest of the n+1 gaps including [a,x_1] and [x_n,b]
};

struct OrderFit {
    double slope = 0.0;  // ~ -(empirical order)
    double intercept = 0.0;
    double r_squared = 0.0;
    std::pair<std::size_t, std::size_t> n_range{0, 0};
    std::size_t points = 0;

    double order() const noexcept { return -slope; }
};

struct BoundCheck {
    bool passed = true;
    /// min over records of (abs_error - bound) / bound.
    double worst_margin = 0.0;
    std::vector<double> margins;
    std::optional<ErrorRecord> violator;
};

/// Finite-difference view of one knot.
struct SmoothnessReport {
    double knot = 0.0;
    /// Highest j such that orders 0..j agree across the knot; -1 if the value jumps.
    int max_matched_order = -1;
    /// Right minus left order-k estimate.
    double jump_at_k = 0.0;
    /// The same jump from exact one-sided derivatives of the pieces.
    double exact_jump_at_k = 0.0;
    /// Largest |right - left| over orders below k.
    double lower_order_mismatch = 0.0;
    /// Largest disagreement between estimates from different step sizes.
    double fd_spread = 0.0;
    /// Finite differences show the knot is not an analytic splice.
    bool is_bad = false;
    bool in_bad_set = false;
};

struct SupNorms {
    double order_k_minus_1 = 0.0;  // max |f^{(k-1)}| over [a,b]
    double order_k = 0.0;          // max |f^{(k)}| away from knots
    double order_k_min = 0.0;      // min |f^{(k)}| on nonzero pieces away from knots
};

/// Geometric sizes n_min * 2^{j/steps_per_doubling}, rounded and deduplicated,
/// always ending at n_max.
std::vector<std::size_t> geometric_sizes(std::size_t n_min, std::size_t n_max, int steps_per_doubling = 2);

/// Runs each size independently (in parallel when threads > 1); records come
/// back in size order regardless.
std::vector<ErrorRecord> error_sequence(const RuleFamily& family, SmoothnessOrder k, SplineKind kind,
                                        std::span<const std::size_t> sizes, unsigned threads = 1);

/// The adversary of the given kind for a rule's nodes.
AdversarialSpline adversary_for(const QuadratureRule& rule, SmoothnessOrder k, SplineKind kind);

/// Default floor below which errors are excluded from fits.
double underflow_floor(SmoothnessOrder k, const Interval& interval);

/// OLS of log(abs_error) on log(node_count) over the last `tail_fraction`
/// of the usable records (abs_error > error_floor).
OrderFit fit_order(std::span<const ErrorRecord> records, double tail_fraction = 0.5, double error_floor = 1e-299);

/// Lower bound for the whole-interval adversary from node positions: the exact
/// endpoint terms plus the equal-gap minimum of the interior sum.
double theorem1_lower_bound(std::size_t n, double first_node, double last_node, SmoothnessOrder k,
                            const Interval& interval);

/// (b-a)^{k+1} / 4^k * (n+1)^{-(k+1)}.
double theorem2_lower_bound(std::size_t n, SmoothnessOrder k, const Interval& interval);

BoundCheck theorem1_bound_check(std::span<const ErrorRecord> records, SmoothnessOrder k, const Interval& interval);
BoundCheck theorem2_bound_check(std::span<const ErrorRecord> records, SmoothnessOrder k, const Interval& interval);

/// |error| * n^power for each record: the quantity whose limsup stays positive.
std::vector<double> scaled_errors(std::span<const ErrorRecord> records, int power);

/// Default step fractions for verify_smoothness.
std::vector<double> default_step_fractions();

/// One-sided finite differences at every knot, treating the spline as a
/// black box. Each stencil has k+1 points spanning `fraction` of the adjacent
/// piece. Orders up to min(probe_orders, k) are compared.
std::vector<SmoothnessReport> verify_smoothness(const AdversarialSpline& s, int probe_orders,
                                                std::span<const double> step_fractions);

/// Knots where some derivative of order 0..k differs across the knot,
/// judged from the exact piece formulas.
std::vector<double> non_analytic_knots(const AdversarialSpline& s);

/// Dense sampling of exact derivatives; `samples_per_piece` interior points
/// per piece plus one-sided values at every knot for the order k-1 norm.
SupNorms derivative_sup_norms(const AdversarialSpline& s, std::size_t samples_per_piece = 10000);

/// Globally adaptive 15-point Gauss-Kronrod integration of a black box.
/// Starts from 1024 equal cells and bisects the worst interval until the
/// summed error estimate is at most rel_tol * |result|. Features narrower
/// than about (b-a)/15000 can fall between samples and go unseen.
double adaptive_integral(const std::function<double(double)>& f, double a, double b, double rel_tol,
                         int max_depth = 60);

/// adaptive_integral of the spline without reference to its pieces.
double oracle_integral(const AdversarialSpline& s, double rel_tol);

}  // namespace qadv

#pragma once

#include "qadv/errors.hpp"
#include "qadv/summation.hpp"

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace qadv {

/// Closed integration region [a,b] with a < b.
class Interval {
public:
    Interval(double a, double b);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double length() const noexcept { return b_ - a_; }
    bool contains(double x) const noexcept { return a_ <= x && x <= b_; }

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double a_;
    double b_;
};

/// An internal quadrature rule: strictly increasing nodes inside the interval
/// with one weight per node. Immutable once built.
class QuadratureRule {
public:
    /// `exactness` is the polynomial degree the rule integrates without error
    /// (-1 when unknown, e.g. for user-supplied rules).
    QuadratureRule(Interval interval, std::vector<double> nodes, std::vector<double> weights,
                   std::string label, int exactness = -1);

    const Interval& interval() const noexcept { return interval_; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    const std::string& label() const noexcept { return label_; }
    int exactness() const noexcept { return exactness_; }
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    Interval interval_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::string label_;
    int exactness_;
};

/// Closed Newton-Cotes rule of the given degree on [0,1]; degree in 1..8.
QuadratureRule newton_cotes_base(int degree);

/// Maps `base` (a rule on [0,1]) onto m equal panels of `interval`. Nodes
/// shared by neighbouring panels are merged and their weights summed.
QuadratureRule composite(const QuadratureRule& base, std::size_t m, const Interval& interval);

/// n-point Gauss-Legendre rule, 1 <= n <= 8192.
QuadratureRule gauss_legendre(std::size_t n, const Interval& interval);

/// n-point Clenshaw-Curtis rule (Chebyshev extrema, endpoints included), n >= 2.
QuadratureRule clenshaw_curtis(std::size_t n, const Interval& interval);

/// Weighted sum of f over the rule's nodes, with compensated accumulation.
template <std::invocable<double> F>
double apply(const QuadratureRule& rule, F&& f) {
    CompensatedSum sum;
    const auto nodes = rule.nodes();
    const auto weights = rule.weights();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double fx = static_cast<double>(f(nodes[i]));
        if (!std::isfinite(fx)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "non-finite integrand value at node " << nodes[i] << " (index " << i << ")";
            throw EvaluationError(msg.str(), nodes[i]);
        }
        sum += weights[i] * fx;
    }
    return sum.value();
}

/// A sequence of rules {I_n}. Sizes passed to `generate` are target node
/// counts; the produced rule reports its actual count.
class RuleFamily {
public:
    enum class Kind { CompositeNewtonCotes, GaussLegendre, ClenshawCurtis, Explicit };

    static RuleFamily composite_newton_cotes(int base_degree, const Interval& interval);
    static RuleFamily gauss_legendre(const Interval& interval);
    static RuleFamily clenshaw_curtis(const Interval& interval);
    /// Rules must share one interval; they are sorted by node count.
    static RuleFamily explicit_rules(std::vector<QuadratureRule> rules);

    Kind kind() const noexcept { return kind_; }
    const Interval& interval() const noexcept { return interval_; }
    int base_degree() const noexcept { return base_degree_; }

    /// Short name such as "composite-simpson" or "gauss-legendre".
    std::string name() const;

    /// Rule for the given target node count. Composite families use
    /// ceil((n-1)/degree) panels; explicit families return the smallest
    /// supplied rule with at least n nodes.
    QuadratureRule generate(std::size_t target_nodes) const;

private:
    RuleFamily(Kind kind, Interval interval) : kind_(kind), interval_(interval) {}

    Kind kind_;
    Interval interval_;
    int base_degree_ = 0;
    std::vector<QuadratureRule> explicit_;
};

}  // namespace qadv

#include "qadv/rules.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <utility>

namespace qadv {

Interval::Interval(double a, double b) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        std::ostringstream msg;
        msg << "invalid interval [" << a << ", " << b << "]: need finite a < b";
        throw ConstructionError(msg.str());
    }
}

QuadratureRule::QuadratureRule(Interval interval, std::vector<double> nodes,
                               std::vector<double> weights, std::string label, int exactness)
    : interval_(interval),
      nodes_(std::move(nodes)),
      weights_(std::move(weights)),
      label_(std::move(label)),
      exactness_(exactness) {
    if (nodes_.empty()) throw ConstructionError("quadrature rule needs at least one node");
    if (nodes_.size() != weights_.size()) {
        throw ConstructionError("quadrature rule: " + std::to_string(nodes_.size()) + " nodes but " +
                                std::to_string(weights_.size()) + " weights");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!std::isfinite(nodes_[i]) || !std::isfinite(weights_[i])) {
            throw ConstructionError("quadrature rule: non-finite node or weight at index " +
                                    std::to_string(i));
        }
        if (!interval_.contains(nodes_[i])) {
            throw ConstructionError("quadrature rule: node " + std::to_string(i) +
                                    " lies outside the interval (external rules are not supported)");
        }
        if (i > 0 && !(nodes_[i - 1] < nodes_[i])) {
            throw ConstructionError("quadrature rule: nodes not strictly increasing at index " +
                                    std::to_string(i));
        }
    }
}

namespace {

struct RationalRow {
    long long denominator;
    std::array<long long, 9> numerators;
};

// Closed Newton-Cotes weights on [0,1]: integrals of the Lagrange basis
// polynomials on degree+1 equispaced nodes.
constexpr std::array<RationalRow, 8> kNewtonCotes = {{
    {2, {1, 1}},
    {6, {1, 4, 1}},
    {8, {1, 3, 3, 1}},
    {90, {7, 32, 12, 32, 7}},
    {288, {19, 75, 50, 50, 75, 19}},
    {840, {41, 216, 27, 272, 27, 216, 41}},
    {17280, {751, 3577, 1323, 2989, 2989, 1323, 3577, 751}},
    {28350, {989, 5888, -928, 10496, -4540, 10496, -928, 5888, 989}},
}};

std::string composite_name(int degree) {
    switch (degree) {
        case 1: return "composite-trapezoid";
        case 2: return "composite-simpson";
        case 3: return "composite-simpson38";
        default: return "composite-nc" + std::to_string(degree);
    }
}

// Maps t in [-1,1] onto the interval, pinned inside it.
double map_from_reference(double t, const Interval& iv) {
    const double mid = 0.5 * (iv.a() + iv.b());
    const double half = 0.5 * iv.length();
    return std::clamp(mid + half * t, iv.a(), iv.b());
}

}  // namespace

QuadratureRule newton_cotes_base(int degree) {
    if (degree < 1 || degree > 8) throw UnsupportedDegree(degree);
    const auto& row = kNewtonCotes[static_cast<std::size_t>(degree - 1)];
    std::vector<double> nodes(static_cast<std::size_t>(degree) + 1);
    std::vector<double> weights(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        nodes[i] = static_cast<double>(i) / degree;
        weights[i] = static_cast<double>(row.numerators[i]) / static_cast<double>(row.denominator);
    }
    const int exactness = degree % 2 == 0 ? degree + 1 : degree;
    return QuadratureRule(Interval(0.0, 1.0), std::move(nodes), std::move(weights),
                          "newton-cotes(" + std::to_string(degree) + ")", exactness);
}

QuadratureRule composite(const QuadratureRule& base, std::size_t m, const Interval& interval) {
    if (m == 0) throw ConstructionError("composite rule needs at least one panel");
    if (base.interval() != Interval(0.0, 1.0)) {
        throw ConstructionError("composite: base rule must be defined on [0,1]");
    }
    const auto bn = base.nodes();
    const auto bw = base.weights();
    const double len = interval.length();
    const double h = len / static_cast<double>(m);

    std::vector<double> nodes;
    std::vector<double> weights;
    nodes.reserve(m * bn.size());
    weights.reserve(m * bn.size());
    for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t i = 0; i < bn.size(); ++i) {
            double x = interval.a() + len * ((static_cast<double>(p) + bn[i]) / static_cast<double>(m));
            x = std::min(x, interval.b());
            const double w = bw[i] * h;
            if (!nodes.empty() && x == nodes.back()) {
                weights.back() += w;
            } else {
                nodes.push_back(x);
                weights.push_back(w);
            }
        }
    }
    std::string label = base.label() + "x" + std::to_string(m);
    return QuadratureRule(interval, std::move(nodes), std::move(weights), std::move(label),
                          base.exactness());
}

QuadratureRule gauss_legendre(std::size_t n, const Interval& interval) {
    if (n < 1 || n > 8192) {
        throw ConstructionError("gauss_legendre: n must be in 1..8192, got " + std::to_string(n));
    }
    std::vector<double> t(n);
    std::vector<double> w(n);
    const double nd = static_cast<double>(n);

    for (std::size_t i = 1; i <= (n + 1) / 2; ++i) {
        // Tricomi's asymptotic guess for the i-th largest root.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) - 0.25) / (nd + 0.5)) *
                   (1.0 - (nd - 1.0) / (8.0 * nd * nd * nd));
        double dp = 0.0;
        bool converged = false;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t j = 1; j < n; ++j) {
                const double jd = static_cast<double>(j);
                const double p2 = ((2.0 * jd + 1.0) * x * p1 - jd * p0) / (jd + 1.0);
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n == 1 ? 1.0 : nd * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-15) {
                converged = true;
                break;
            }
        }
        if (!converged) throw InternalError("gauss_legendre: Newton iteration did not converge", i);
        if (2 * i - 1 == n) x = 0.0;
        // Recompute the derivative at the final iterate for the weight.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t j = 1; j < n; ++j) {
            const double jd = static_cast<double>(j);
            const double p2 = ((2.0 * jd + 1.0) * x * p1 - jd * p0) / (jd + 1.0);
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : nd * (x * p1 - p0) / (x * x - 1.0);
        const double weight = 2.0 / ((1.0 - x * x) * dp * dp);
        t[n - i] = x;
        t[i - 1] = -x;
        w[n - i] = weight;
        w[i - 1] = weight;
    }

    const double half = 0.5 * interval.length();
    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes[i] = map_from_reference(t[i], interval);
        w[i] *= half;
    }
    return QuadratureRule(interval, std::move(nodes), std::move(w),
                          "gauss-legendre(" + std::to_string(n) + ")", static_cast<int>(2 * n - 1));
}

QuadratureRule clenshaw_curtis(std::size_t n, const Interval& interval) {
    if (n < 2) throw ConstructionError("clenshaw_curtis: n must be at least 2");
    const std::size_t big_n = n - 1;
    const double nd = static_cast<double>(big_n);
    const double pi = std::numbers::pi;

    std::vector<double> nodes(n);
    std::vector<double> weights(n);
    for (std::size_t j = 0; j <= big_n; ++j) {
        // -cos(j pi / N) written as a sine keeps the node set exactly symmetric.
        const double t = std::sin(pi * (2.0 * static_cast<double>(j) - nd) / (2.0 * nd));
        nodes[j] = j == 0 ? interval.a() : j == big_n ? interval.b() : map_from_reference(t, interval);

        CompensatedSum s;
        s += 1.0;
        for (std::size_t k = 1; k <= big_n / 2; ++k) {
            const double bk = (2 * k == big_n) ? 1.0 : 2.0;
            const std::size_t phase = (2 * k * j) % (2 * big_n);
            const double kd = static_cast<double>(k);
            s += -bk / (4.0 * kd * kd - 1.0) * std::cos(pi * static_cast<double>(phase) / nd);
        }
        const double cj = (j == 0 || j == big_n) ? 1.0 : 2.0;
        weights[j] = cj / nd * s.value() * 0.5 * interval.length();
    }
    return QuadratureRule(interval, std::move(nodes), std::move(weights),
                          "clenshaw-curtis(" + std::to_string(n) + ")", static_cast<int>(n - 1));
}

RuleFamily RuleFamily::composite_newton_cotes(int base_degree, const Interval& interval) {
    if (base_degree < 1 || base_degree > 8) throw UnsupportedDegree(base_degree);
    RuleFamily f(Kind::CompositeNewtonCotes, interval);
    f.base_degree_ = base_degree;
    return f;
}

RuleFamily RuleFamily::gauss_legendre(const Interval& interval) {
    return RuleFamily(Kind::GaussLegendre, interval);
}

RuleFamily RuleFamily::clenshaw_curtis(const Interval& interval) {
    return RuleFamily(Kind::ClenshawCurtis, interval);
}

RuleFamily RuleFamily::explicit_rules(std::vector<QuadratureRule> rules) {
    if (rules.empty()) throw ConstructionError("explicit rule family needs at least one rule");
    const Interval iv = rules.front().interval();
    for (const auto& r : rules) {
        if (r.interval() != iv) throw ConstructionError("explicit rule family: rules on different intervals");
    }
    std::stable_sort(rules.begin(), rules.end(),
                     [](const QuadratureRule& x, const QuadratureRule& y) { return x.size() < y.size(); });
    RuleFamily f(Kind::Explicit, iv);
    f.explicit_ = std::move(rules);
    return f;
}

std::string RuleFamily::name() const {
    switch (kind_) {
        case Kind::CompositeNewtonCotes: return composite_name(base_degree_);
        case Kind::GaussLegendre: return "gauss-legendre";
        case Kind::ClenshawCurtis: return "clenshaw-curtis";
        case Kind::Explicit: return "explicit";
    }
    return "unknown";
}

QuadratureRule RuleFamily::generate(std::size_t target_nodes) const {
    if (target_nodes == 0) throw ConstructionError("rule family: requested size must be positive");
    switch (kind_) {
        case Kind::CompositeNewtonCotes: {
            const auto deg = static_cast<std::size_t>(base_degree_);
            const std::size_t m = target_nodes <= 1 ? 1 : (target_nodes - 1 + deg - 1) / deg;
            return composite(newton_cotes_base(base_degree_), m, interval_);
        }
        case Kind::GaussLegendre:
            return qadv::gauss_legendre(target_nodes, interval_);
        case Kind::ClenshawCurtis:
            return qadv::clenshaw_curtis(std::max<std::size_t>(target_nodes, 2), interval_);
        case Kind::Explicit:
            for (const auto& r : explicit_) {
                if (r.size() >= target_nodes) return r;
            }
            throw ConstructionError("explicit rule family has no rule with " + std::to_string(target_nodes) +
                                    " or more nodes");
    }
    throw ConstructionError("unknown rule family");
}

}  // namespace qadv

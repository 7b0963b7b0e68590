#include "qadv/analysis.hpp"

#include "qadv/format.hpp"
#include "qadv/summation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <queue>
#include <thread>

namespace qadv {

namespace {

double ipow(double base, int exponent) noexcept {
    double result = 1.0;
    for (int i = 0; i < exponent; ++i) result *= base;
    return result;
}

double factorial(int k) noexcept {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

ErrorRecord run_one(const RuleFamily& family, SmoothnessOrder k, SplineKind kind, std::size_t size) {
    const QuadratureRule rule = family.generate(size);
    const AdversarialSpline spline = adversary_for(rule, k, kind);
    ErrorRecord rec;
    rec.node_count = rule.size();
    rec.rule_label = rule.label();
    rec.quad_value = apply(rule, [&](double x) { return spline(x); });
    rec.exact_value = exact_integral(spline);
    rec.abs_error = std::abs(rec.quad_value - rec.exact_value);

    const auto nodes = rule.nodes();
    const Interval& iv = family.interval();
    rec.first_node = nodes.front();
    rec.last_node = nodes.back();
    rec.max_gap = std::max(nodes.front() - iv.a(), iv.b() - nodes.back());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) rec.max_gap = std::max(rec.max_gap, nodes[i + 1] - nodes[i]);
    return rec;
}

BoundCheck check_against(std::span<const ErrorRecord> records, const std::function<double(const ErrorRecord&)>& bound) {
    BoundCheck out;
    out.worst_margin = std::numeric_limits<double>::infinity();
    out.margins.reserve(records.size());
    for (const auto& r : records) {
        const double lb = bound(r);
        const double margin = (r.abs_error - lb) / lb;
        out.margins.push_back(margin);
        if (margin < out.worst_margin) out.worst_margin = margin;
        if (r.abs_error < lb * (1.0 - 1e-12) && out.passed) {
            out.passed = false;
            out.violator = r;
        }
    }
    if (records.empty()) out.worst_margin = 0.0;
    return out;
}

// Fornberg's recursion: weights[j][d] is the weight of offsets[j] in the
// order-d derivative approximation at 0.
std::vector<std::vector<double>> fornberg_weights(std::span<const double> offsets, int max_order) {
    const std::size_t n = offsets.size();
    std::vector<std::vector<double>> c(n, std::vector<double>(static_cast<std::size_t>(max_order) + 1, 0.0));
    double c1 = 1.0;
    double c4 = offsets[0];
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const int mn = std::min(static_cast<int>(i), max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = offsets[i];
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int d = mn; d >= 1; --d) {
                    const auto du = static_cast<std::size_t>(d);
                    c[i][du] = c1 * (d * c[i - 1][du - 1] - c5 * c[i - 1][du]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int d = mn; d >= 1; --d) {
                const auto du = static_cast<std::size_t>(d);
                c[j][du] = (c4 * c[j][du] - d * c[j][du - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    return c;
}

// Derivative estimates of orders 0..k at t from k+1 samples on one side.
std::vector<double> one_sided_estimates(const AdversarialSpline& s, double t, double h, int direction) {
    const int k = s.k();
    std::vector<double> unit_offsets(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) unit_offsets[static_cast<std::size_t>(j)] = direction * j;
    const auto w = fornberg_weights(unit_offsets, k);

    std::vector<double> values(unit_offsets.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        // t + j*h*direction, pinned to the interval
        const double x = std::clamp(t + unit_offsets[j] * h, s.interval().a(), s.interval().b());
        values[j] = s(x);
    }
    std::vector<double> est(static_cast<std::size_t>(k) + 1);
    for (int d = 0; d <= k; ++d) {
        CompensatedSum acc;
        for (std::size_t j = 0; j < values.size(); ++j) acc += w[j][static_cast<std::size_t>(d)] * values[j];
        est[static_cast<std::size_t>(d)] = acc.value() / ipow(h, d);
    }
    return est;
}

bool knot_in_set(double x, std::span<const double> set) {
    return std::binary_search(set.begin(), set.end(), x);
}

// 15-point Kronrod extension of the 7-point Gauss rule.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo;
    double hi;
    double value;
    double error;
    int depth;
    bool operator<(const Segment& o) const { return error < o.error; }
};

std::pair<double, double> kronrod_gauss(const std::function<double(double)>& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const double fc = f(c);
    double kron = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    return {kron * h, gauss * h};
}

// 15-point Clenshaw-Curtis on [-1,1]: samples the segment ends, which the
// Kronrod points never touch.
const QuadratureRule& endpoint_check_rule() {
    static const QuadratureRule rule = clenshaw_curtis(15, Interval(-1.0, 1.0));
    return rule;
}

// Value is the Kronrod sum over both halves. The error is the largest of the
// Kronrod/Gauss gaps, the whole-versus-halves gap and the gap to the
// endpoint-sampling rule; any one alone can miss a kink.
Segment gauss_kronrod(const std::function<double(double)>& f, double lo, double hi, int depth) {
    const double mid = 0.5 * (lo + hi);
    const auto [whole, gauss] = kronrod_gauss(f, lo, hi);
    const auto [left, gl] = kronrod_gauss(f, lo, mid);
    const auto [right, gr] = kronrod_gauss(f, mid, hi);
    const double value = left + right;
    if (!std::isfinite(value)) throw NonConvergence("adaptive_integral: non-finite integrand");

    const auto& cc = endpoint_check_rule();
    const double half = 0.5 * (hi - lo);
    double ends = 0.0;
    for (std::size_t i = 0; i < cc.size(); ++i) {
        const double x = i == 0 ? lo : i + 1 == cc.size() ? hi : mid + half * cc.nodes()[i];
        ends += cc.weights()[i] * f(x);
    }
    ends *= half;

    const double error = std::max({std::abs(whole - gauss), std::abs(whole - value),
                                   std::abs(left - gl) + std::abs(right - gr), std::abs(ends - value)});
    return {lo, hi, value, error, depth};
}

}  // namespace

std::vector<std::size_t> geometric_sizes(std::size_t n_min, std::size_t n_max, int steps_per_doubling) {
    if (n_min < 1 || n_max < n_min || steps_per_doubling < 1) {
        throw Error("geometric_sizes: need 1 <= n_min <= n_max and steps_per_doubling >= 1");
    }
    std::vector<std::size_t> out;
    for (int j = 0;; ++j) {
        const double v = static_cast<double>(n_min) * std::exp2(static_cast<double>(j) / steps_per_doubling);
        const auto n = static_cast<std::size_t>(std::llround(v));
        if (n >= n_max) break;
        if (out.empty() || n > out.back()) out.push_back(n);
    }
    if (out.empty() || out.back() != n_max) out.push_back(n_max);
    return out;
}

AdversarialSpline adversary_for(const QuadratureRule& rule, SmoothnessOrder k, SplineKind kind) {
    return kind == SplineKind::Global ? build_global(rule.nodes(), k, rule.interval())
                                      : build_local(rule.nodes(), k, rule.interval());
}

std::vector<ErrorRecord> error_sequence(const RuleFamily& family, SmoothnessOrder k, SplineKind kind,
                                        std::span<const std::size_t> sizes, unsigned threads) {
    if (sizes.empty()) throw Error("error_sequence: no sizes requested");
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        if (!(sizes[i - 1] < sizes[i])) throw Error("error_sequence: sizes must be strictly increasing");
    }
    std::vector<ErrorRecord> out(sizes.size());
    std::vector<std::exception_ptr> failures(sizes.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < sizes.size(); i = next++) {
            try {
                out[i] = run_one(family, k, kind, sizes[i]);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const unsigned count = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(sizes.size()));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const std::exception& e) {
            throw Error(family.name() + " size " + std::to_string(sizes[i]) + ": " + e.what());
        }
    }
    return out;
}

double underflow_floor(SmoothnessOrder k, const Interval& interval) {
    return 10.0 * 1e-300 * ipow(interval.length(), k.value() + 1);
}

OrderFit fit_order(std::span<const ErrorRecord> records, double tail_fraction, double error_floor) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw Error("fit_order: tail_fraction must be in (0,1]");
    std::vector<const ErrorRecord*> usable;
    for (const auto& r : records) {
        if (std::isfinite(r.abs_error) && r.abs_error > error_floor && r.node_count > 0) usable.push_back(&r);
    }
    const auto take = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(usable.size())));
    if (take < 3) {
        throw InsufficientData("fit_order: need at least 3 usable records, have " + std::to_string(take));
    }
    const auto tail = std::span(usable).last(take);

    double mx = 0.0;
    double my = 0.0;
    for (const auto* r : tail) {
        mx += std::log(static_cast<double>(r->node_count));
        my += std::log(r->abs_error);
    }
    mx /= static_cast<double>(take);
    my /= static_cast<double>(take);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto* r : tail) {
        const double dx = std::log(static_cast<double>(r->node_count)) - mx;
        const double dy = std::log(r->abs_error) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw InsufficientData("fit_order: all usable records share one node count");

    OrderFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = std::max(0.0, syy - fit.slope * sxy);
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.points = take;
    fit.n_range = {tail.front()->node_count, tail.back()->node_count};
    return fit;
}

double theorem1_lower_bound(std::size_t n, double first_node, double last_node, SmoothnessOrder k,
                            const Interval& interval) {
    const int kv = k.value();
    double bound = ipow(first_node - interval.a(), kv + 1) / (kv + 1) + ipow(interval.b() - last_node, kv + 1) / (kv + 1);
    if (n >= 2) {
        const double gaps = static_cast<double>(n - 1);
        bound += gaps * unit_integral((last_node - first_node) / gaps, k);
    }
    return bound;
}

double theorem2_lower_bound(std::size_t n, SmoothnessOrder k, const Interval& interval) {
    return unit_integral(interval.length() / static_cast<double>(n + 1), k);
}

BoundCheck theorem1_bound_check(std::span<const ErrorRecord> records, SmoothnessOrder k, const Interval& interval) {
    return check_against(records, [&](const ErrorRecord& r) {
        return theorem1_lower_bound(r.node_count, r.first_node, r.last_node, k, interval);
    });
}

BoundCheck theorem2_bound_check(std::span<const ErrorRecord> records, SmoothnessOrder k, const Interval& interval) {
    return check_against(records, [&](const ErrorRecord& r) { return theorem2_lower_bound(r.node_count, k, interval); });
}

std::vector<double> scaled_errors(std::span<const ErrorRecord> records, int power) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.abs_error * ipow(static_cast<double>(r.node_count), power));
    return out;
}

std::vector<double> default_step_fractions() { return {0.9, 0.5, 0.25}; }

std::vector<SmoothnessReport> verify_smoothness(const AdversarialSpline& s, int probe_orders,
                                                std::span<const double> step_fractions) {
    if (step_fractions.empty()) throw Error("verify_smoothness: no step fractions");
    for (double f : step_fractions) {
        if (!(f > 0.0 && f < 1.0)) throw Error("verify_smoothness: step fractions must lie in (0,1)");
    }
    const int k = s.k();
    const int top = std::clamp(probe_orders, 0, k);
    const double kfact = factorial(k);
    const double match_tol = 1e-5 * kfact;
    const double jump_tol = 0.5 * kfact;
    const auto pieces = s.pieces();

    std::vector<SmoothnessReport> reports;
    for (std::size_t i = 1; i < pieces.size(); ++i) {
        const double t = pieces[i].lo;
        const double left_span = t - pieces[i - 1].lo;
        const double right_span = pieces[i].hi - t;

        std::vector<double> left;
        std::vector<double> right;
        SmoothnessReport rep;
        rep.knot = t;
        for (std::size_t f = 0; f < step_fractions.size(); ++f) {
            const auto l = one_sided_estimates(s, t, step_fractions[f] * left_span / k, -1);
            const auto r = one_sided_estimates(s, t, step_fractions[f] * right_span / k, +1);
            if (f == 0) {
                left = l;
                right = r;
                continue;
            }
            for (int d = 0; d <= top; ++d) {
                const auto du = static_cast<std::size_t>(d);
                rep.fd_spread = std::max({rep.fd_spread, std::abs(l[du] - left[du]), std::abs(r[du] - right[du])});
            }
        }

        rep.max_matched_order = -1;
        bool matching = true;
        for (int d = 0; d <= top; ++d) {
            const auto du = static_cast<std::size_t>(d);
            const double diff = std::abs(right[du] - left[du]);
            const bool ok = d < k ? diff < match_tol : diff < jump_tol;
            if (d < k) rep.lower_order_mismatch = std::max(rep.lower_order_mismatch, diff);
            if (matching && ok) {
                rep.max_matched_order = d;
            } else {
                matching = false;
            }
        }
        if (top == k) {
            rep.jump_at_k = right[static_cast<std::size_t>(k)] - left[static_cast<std::size_t>(k)];
            rep.exact_jump_at_k = pieces[i].derivative(t, k) - pieces[i - 1].derivative(t, k);
            rep.is_bad = rep.max_matched_order < k;
        } else {
            rep.is_bad = rep.max_matched_order < top;
        }
        rep.in_bad_set = knot_in_set(t, s.bad_set());
        reports.push_back(rep);
    }
    return reports;
}

std::vector<double> non_analytic_knots(const AdversarialSpline& s) {
    std::vector<double> out;
    const auto pieces = s.pieces();
    for (std::size_t i = 1; i < pieces.size(); ++i) {
        const double t = pieces[i].lo;
        for (int d = 0; d <= s.k(); ++d) {
            const double l = pieces[i - 1].derivative(t, d);
            const double r = pieces[i].derivative(t, d);
            if (std::abs(l - r) > 1e-9 * (1.0 + std::max(std::abs(l), std::abs(r)))) {
                out.push_back(t);
                break;
            }
        }
    }
    return out;
}

SupNorms derivative_sup_norms(const AdversarialSpline& s, std::size_t samples_per_piece) {
    const int k = s.k();
    SupNorms out;
    out.order_k_min = std::numeric_limits<double>::infinity();
    for (const auto& p : s.pieces()) {
        out.order_k_minus_1 = std::max({out.order_k_minus_1, std::abs(p.derivative(p.lo, k - 1)),
                                        std::abs(p.derivative(p.hi, k - 1))});
        for (std::size_t i = 0; i < samples_per_piece; ++i) {
            const double x = p.lo + (static_cast<double>(i) + 0.5) / static_cast<double>(samples_per_piece) * (p.hi - p.lo);
            // Sample through the black-box locator, not the piece directly.
            const double dk1 = std::abs(eval_derivative(s, x, k - 1, Side::Right));
            const double dk = std::abs(eval_derivative(s, x, k, Side::Right));
            out.order_k_minus_1 = std::max(out.order_k_minus_1, dk1);
            out.order_k = std::max(out.order_k, dk);
            if (p.sign != 0) out.order_k_min = std::min(out.order_k_min, dk);
        }
    }
    if (!std::isfinite(out.order_k_min)) out.order_k_min = 0.0;
    return out;
}

double adaptive_integral(const std::function<double(double)>& f, double a, double b, double rel_tol, int max_depth) {
    if (!(rel_tol >= 1e-12)) throw Error("adaptive_integral: rel_tol must be at least 1e-12");
    if (!(a < b)) throw Error("adaptive_integral: need a < b");
    constexpr int kInitial = 1024;
    std::priority_queue<Segment> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (int i = 0; i < kInitial; ++i) {
        const double lo = a + (b - a) * (static_cast<double>(i) / kInitial);
        const double hi = i + 1 == kInitial ? b : a + (b - a) * (static_cast<double>(i + 1) / kInitial);
        const Segment seg = gauss_kronrod(f, lo, hi, 0);
        total += seg.value;
        total_err += seg.error;
        heap.push(seg);
    }
    std::size_t iterations = 0;
    while (total_err > rel_tol * std::abs(total) && total_err > 0.0) {
        const Segment worst = heap.top();
        heap.pop();
        if (worst.depth >= max_depth) {
            throw NonConvergence("adaptive_integral: subdivision depth " + std::to_string(max_depth) +
                                 " exceeded near x = " + format_double(worst.lo));
        }
        const double mid = 0.5 * (worst.lo + worst.hi);
        const Segment l = gauss_kronrod(f, worst.lo, mid, worst.depth + 1);
        const Segment r = gauss_kronrod(f, mid, worst.hi, worst.depth + 1);
        total += l.value + r.value - worst.value;
        total_err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        // Rebuild the running sums now and then so cancellation does not drift.
        if (++iterations % 1024 == 0) {
            auto copy = heap;
            CompensatedSum v;
            CompensatedSum e;
            while (!copy.empty()) {
                v += copy.top().value;
                e += copy.top().error;
                copy.pop();
            }
            total = v.value();
            total_err = e.value();
        }
    }
    CompensatedSum v;
    while (!heap.empty()) {
        v += heap.top().value;
        heap.pop();
    }
    return v.value();
}

double oracle_integral(const AdversarialSpline& s, double rel_tol) {
    return adaptive_integral([&s](double x) { return s(x); }, s.interval().a(), s.interval().b(), rel_tol);
}

}  // namespace qadv

#include "qadv/adversary.hpp"

#include "qadv/format.hpp"
#include "qadv/summation.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace qadv {

namespace {

double ipow(double base, int exponent) noexcept {
    double result = 1.0;
    for (int i = 0; i < exponent; ++i) result *= base;
    return result;
}

double falling_factorial(int k, int order) noexcept {
    double r = 1.0;
    for (int i = 0; i < order; ++i) r *= static_cast<double>(k - i);
    return r;
}

std::string num(double x) { return format_double(x); }

void validate_nodes(std::span<const double> nodes, const Interval& interval) {
    if (nodes.empty()) throw ConstructionError("adversary: node list is empty");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!std::isfinite(nodes[i]) || !interval.contains(nodes[i])) {
            throw ConstructionError("adversary: node " + std::to_string(i) + " = " + num(nodes[i]) +
                                    " lies outside [" + num(interval.a()) + ", " + num(interval.b()) + "]");
        }
        if (i > 0 && !(nodes[i - 1] < nodes[i])) {
            throw ConstructionError("adversary: nodes must be strictly increasing (index " +
                                    std::to_string(i) + ")");
        }
    }
}

// (b-a)^{k+1} must be a normal double so every gap power and offset is too.
void validate_magnitude(const Interval& interval, SmoothnessOrder k) {
    const double scale = ipow(interval.length(), k.value() + 1);
    if (!std::isnormal(scale)) {
        throw ConstructionError("adversary: (b-a)^(k+1) = " + num(scale) +
                                " is outside double range; shrink the interval or k");
    }
}

struct GapUnit {
    double q1;
    double mid;
    double q3;
    double cap;
};

GapUnit make_unit(double lo, double hi, int k) {
    const double gap = hi - lo;
    GapUnit u{lo + 0.25 * gap, lo + 0.5 * gap, lo + 0.75 * gap, 2.0 * ipow(0.25 * gap, k)};
    if (!(lo < u.q1 && u.q1 < u.mid && u.mid < u.q3 && u.q3 < hi)) {
        throw ConstructionError("adversary: gap [" + num(lo) + ", " + num(hi) +
                                "] too narrow to place quarter points");
    }
    return u;
}

// Four pieces of one bump on [lo,hi]: the outer pieces are the monomials
// centred on the gap ends, the inner pair is the cap centred at the midpoint.
void append_unit(std::vector<MonomialPiece>& out, double lo, double hi, int k) {
    const GapUnit u = make_unit(lo, hi, k);
    if (k % 2 == 1) {
        out.push_back({lo, u.q1, +1, lo, 0.0, k});
        out.push_back({u.q1, u.mid, +1, u.mid, u.cap, k});
        out.push_back({u.mid, u.q3, -1, u.mid, u.cap, k});
        out.push_back({u.q3, hi, -1, hi, 0.0, k});
    } else {
        out.push_back({lo, u.q1, +1, lo, 0.0, k});
        out.push_back({u.q1, u.mid, -1, u.mid, u.cap, k});
        out.push_back({u.mid, u.q3, -1, u.mid, u.cap, k});
        out.push_back({u.q3, hi, +1, hi, 0.0, k});
    }
}

}  // namespace

SmoothnessOrder::SmoothnessOrder(int k) : k_(k) {
    if (k < 1 || k > kMax) {
        throw ConstructionError("smoothness order k must be in 1.." + std::to_string(kMax) + ", got " +
                                std::to_string(k));
    }
}

double MonomialPiece::value(double x) const noexcept {
    if (sign == 0) return 0.0;
    return static_cast<double>(sign) * ipow(x - center, k) + offset;
}

double MonomialPiece::derivative(double x, int order) const noexcept {
    if (order == 0) return value(x);
    if (sign == 0 || order > k) return 0.0;
    return static_cast<double>(sign) * falling_factorial(k, order) * ipow(x - center, k - order);
}

AdversarialSpline::AdversarialSpline(Interval interval, SmoothnessOrder k, std::vector<MonomialPiece> pieces,
                                     std::vector<double> bad_set, SplineKind kind,
                                     std::vector<double> source_nodes)
    : interval_(interval),
      k_(k),
      pieces_(std::move(pieces)),
      bad_set_(std::move(bad_set)),
      kind_(kind),
      source_nodes_(std::move(source_nodes)) {
    if (pieces_.empty()) throw ConstructionError("spline has no pieces");
    if (pieces_.front().lo != interval_.a() || pieces_.back().hi != interval_.b()) {
        throw ConstructionError("spline pieces do not cover the interval exactly");
    }
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        if (!(p.lo < p.hi)) throw ConstructionError("spline piece " + std::to_string(i) + " is empty");
        if (i + 1 < pieces_.size() && p.hi != pieces_[i + 1].lo) {
            throw ConstructionError("spline pieces " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                    " are not contiguous");
        }
        if (p.k != k_.value()) throw ConstructionError("spline piece " + std::to_string(i) + " has wrong k");
        if (p.sign < -1 || p.sign > 1) throw ConstructionError("spline piece sign must be -1, 0 or +1");
        if (!std::isfinite(p.center) || !std::isfinite(p.offset)) {
            throw ConstructionError("spline piece " + std::to_string(i) + " has non-finite coefficients");
        }
    }
    if (!std::is_sorted(bad_set_.begin(), bad_set_.end())) throw ConstructionError("bad set must be sorted");
    for (double x : bad_set_) {
        if (!interval_.contains(x)) throw ConstructionError("bad set point outside the interval");
    }
    validate_nodes(source_nodes_, interval_);

    lows_.reserve(pieces_.size());
    for (const auto& p : pieces_) lows_.push_back(p.lo);

    for (double x : source_nodes_) {
        if ((*this)(x) != 0.0) {
            throw ConstructionError("spline is not zero at source node " + num(x));
        }
    }
}

std::vector<double> AdversarialSpline::knots() const {
    std::vector<double> out;
    out.reserve(pieces_.size());
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].lo);
    return out;
}

std::size_t AdversarialSpline::locate(double x, Side side) const {
    if (!(interval_.a() <= x && x <= interval_.b())) {
        throw DomainError("x = " + num(x) + " outside [" + num(interval_.a()) + ", " + num(interval_.b()) + "]");
    }
    std::ptrdiff_t idx = 0;
    if (side == Side::Left) {
        idx = std::lower_bound(lows_.begin(), lows_.end(), x) - lows_.begin() - 1;
    } else {
        idx = std::upper_bound(lows_.begin(), lows_.end(), x) - lows_.begin() - 1;
    }
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(pieces_.size()) - 1);
    return static_cast<std::size_t>(idx);
}

double AdversarialSpline::operator()(double x) const { return pieces_[locate(x)].value(x); }

AdversarialSpline build_global(std::span<const double> nodes, SmoothnessOrder k, const Interval& interval) {
    validate_nodes(nodes, interval);
    validate_magnitude(interval, k);
    const int kv = k.value();
    const bool odd = kv % 2 == 1;

    std::vector<MonomialPiece> pieces;
    pieces.reserve(4 * nodes.size() + 2);
    if (interval.a() < nodes.front()) {
        pieces.push_back({interval.a(), nodes.front(), odd ? -1 : +1, nodes.front(), 0.0, kv});
    }
    std::vector<double> bad;
    bad.reserve(4 * nodes.size());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        append_unit(pieces, nodes[i], nodes[i + 1], kv);
        const auto* unit = &pieces[pieces.size() - 4];
        bad.push_back(unit[0].lo);
        bad.push_back(unit[1].lo);
        bad.push_back(unit[2].lo);
        bad.push_back(unit[3].lo);
    }
    bad.push_back(nodes.back());
    if (nodes.back() < interval.b()) {
        pieces.push_back({nodes.back(), interval.b(), +1, nodes.back(), 0.0, kv});
    }
    return AdversarialSpline(interval, k, std::move(pieces), std::move(bad), SplineKind::Global,
                             std::vector<double>(nodes.begin(), nodes.end()));
}

AdversarialSpline build_local(std::span<const double> nodes, SmoothnessOrder k, const Interval& interval) {
    validate_nodes(nodes, interval);
    validate_magnitude(interval, k);
    const int kv = k.value();

    // Candidate gaps in left-to-right order; strict comparison keeps the first maximum.
    double lo = interval.a();
    double hi = nodes.front();
    auto consider = [&](double l, double h) {
        if (h - l > hi - lo) {
            lo = l;
            hi = h;
        }
    };
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) consider(nodes[i], nodes[i + 1]);
    consider(nodes.back(), interval.b());

    std::vector<MonomialPiece> pieces;
    if (interval.a() < lo) pieces.push_back({interval.a(), lo, 0, lo, 0.0, kv});
    append_unit(pieces, lo, hi, kv);
    if (hi < interval.b()) pieces.push_back({hi, interval.b(), 0, hi, 0.0, kv});

    const GapUnit u = make_unit(lo, hi, kv);
    std::vector<double> bad = kv % 2 == 1 ? std::vector<double>{lo, u.q1, u.mid, u.q3, hi}
                                          : std::vector<double>{lo, u.q1, u.q3, hi};
    return AdversarialSpline(interval, k, std::move(pieces), std::move(bad), SplineKind::Local,
                             std::vector<double>(nodes.begin(), nodes.end()));
}

double eval(const AdversarialSpline& s, double x) { return s(x); }

double eval_derivative(const AdversarialSpline& s, double x, int order, Side side) {
    if (order < 0 || order > s.k()) {
        throw DomainError("derivative order " + std::to_string(order) + " outside 0..k=" + std::to_string(s.k()));
    }
    const auto pieces = s.pieces();
    if (side != Side::TwoSided) return pieces[s.locate(x, side)].derivative(x, order);

    const double left = pieces[s.locate(x, Side::Left)].derivative(x, order);
    const double right = pieces[s.locate(x, Side::Right)].derivative(x, order);
    if (std::abs(left - right) > 1e-9 * (1.0 + std::max(std::abs(left), std::abs(right)))) {
        throw DiscontinuityError("derivative of order " + std::to_string(order) + " jumps at x = " + num(x) +
                                     " (left " + num(left) + ", right " + num(right) + ")",
                                 left, right);
    }
    return right;
}

double unit_integral(double gap, SmoothnessOrder k) {
    if (!(gap >= 0.0)) throw ConstructionError("unit_integral: gap must be nonnegative");
    return ipow(gap, k.value() + 1) / ipow(4.0, k.value());
}

double exact_integral(const AdversarialSpline& s) {
    const int kv = s.k();
    if (s.kind() == SplineKind::Local) {
        const auto bad = s.bad_set();
        return unit_integral(bad.back() - bad.front(), s.order());
    }
    const auto nodes = s.source_nodes();
    const Interval& iv = s.interval();
    CompensatedSum sum;
    sum += ipow(nodes.front() - iv.a(), kv + 1) / (kv + 1);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) sum += unit_integral(nodes[i + 1] - nodes[i], s.order());
    sum += ipow(iv.b() - nodes.back(), kv + 1) / (kv + 1);
    return sum.value();
}

void write_spline(std::ostream& out, const AdversarialSpline& s) {
    out << "quad-adversary-spline 1\n";
    out << "kind " << (s.kind() == SplineKind::Global ? "global" : "local") << '\n';
    out << "k " << s.k() << '\n';
    out << "interval " << num(s.interval().a()) << ' ' << num(s.interval().b()) << '\n';
    out << "nodes " << s.source_nodes().size();
    for (double x : s.source_nodes()) out << ' ' << num(x);
    out << '\n';
    out << "bad_set " << s.bad_set().size();
    for (double x : s.bad_set()) out << ' ' << num(x);
    out << '\n';
    out << "pieces " << s.pieces().size() << '\n';
    for (const auto& p : s.pieces()) {
        out << num(p.lo) << ' ' << num(p.hi) << ' ' << p.sign << ' ' << num(p.center) << ' ' << num(p.offset)
            << ' ' << p.k << '\n';
    }
}

namespace {

std::istringstream expect_line(std::istream& in, const std::string& keyword) {
    std::string line;
    if (!std::getline(in, line)) throw Error("spline file: missing '" + keyword + "' line");
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word != keyword) throw Error("spline file: expected '" + keyword + "', found '" + word + "'");
    return ls;
}

double next_double(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw Error("spline file: truncated line");
    return parse_double(tok);
}

std::vector<double> read_list(std::istringstream ls) {
    std::size_t count = 0;
    if (!(ls >> count)) throw Error("spline file: missing list length");
    std::vector<double> v(count);
    for (auto& x : v) x = next_double(ls);
    return v;
}

}  // namespace

AdversarialSpline read_spline(std::istream& in) {
    {
        auto ls = expect_line(in, "quad-adversary-spline");
        int version = 0;
        if (!(ls >> version) || version != 1) throw Error("spline file: unsupported version");
    }
    std::string kind_word;
    expect_line(in, "kind") >> kind_word;
    if (kind_word != "global" && kind_word != "local") throw Error("spline file: bad kind '" + kind_word + "'");
    int k = 0;
    if (!(expect_line(in, "k") >> k)) throw Error("spline file: bad k");
    auto ivl = expect_line(in, "interval");
    const double a = next_double(ivl);
    const double b = next_double(ivl);
    auto nodes = read_list(expect_line(in, "nodes"));
    auto bad = read_list(expect_line(in, "bad_set"));
    std::size_t count = 0;
    if (!(expect_line(in, "pieces") >> count)) throw Error("spline file: bad piece count");
    std::vector<MonomialPiece> pieces(count);
    for (auto& p : pieces) {
        std::string line;
        if (!std::getline(in, line)) throw Error("spline file: missing piece line");
        std::istringstream ls(line);
        p.lo = next_double(ls);
        p.hi = next_double(ls);
        if (!(ls >> p.sign)) throw Error("spline file: bad piece sign");
        p.center = next_double(ls);
        p.offset = next_double(ls);
        if (!(ls >> p.k)) throw Error("spline file: bad piece k");
    }
    return AdversarialSpline(Interval(a, b), SmoothnessOrder(k), std::move(pieces), std::move(bad),
                             kind_word == "global" ? SplineKind::Global : SplineKind::Local, std::move(nodes));
}

}  // namespace qadv

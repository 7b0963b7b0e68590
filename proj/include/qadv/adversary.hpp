#pragma once

#include "qadv/errors.hpp"
#include "qadv/rules.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace qadv {

/// The smoothness parameter k: the adversary lies in C^{k-1} but not C^k.
class SmoothnessOrder {
public:
    static constexpr int kMax = 12;

    explicit SmoothnessOrder(int k);
    int value() const noexcept { return k_; }
    bool is_even() const noexcept { return k_ % 2 == 0; }

    friend bool operator==(SmoothnessOrder, SmoothnessOrder) = default;

private:
    int k_;
};

enum class SplineKind { Global, Local };

/// Which neighbouring piece a derivative at a knot is taken from.
enum class Side { Left, Right, TwoSided };

/// sign * (x - center)^k + offset on [lo, hi). sign is +1 or -1, or 0 for
/// the zero piece outside a single-gap adversary.
struct MonomialPiece {
    double lo;
    double hi;
    int sign;
    double center;
    double offset;
    int k;

    double value(double x) const noexcept;
    /// Exact derivative of the piece polynomial; order 0 is the value.
    double derivative(double x, int order) const noexcept;

    friend bool operator==(const MonomialPiece&, const MonomialPiece&) = default;
};

/// Piecewise monomial adversary built from a node set. Immutable; pieces
/// tile the interval in order.
class AdversarialSpline {
public:
    AdversarialSpline(Interval interval, SmoothnessOrder k, std::vector<MonomialPiece> pieces,
                      std::vector<double> bad_set, SplineKind kind, std::vector<double> source_nodes);

    const Interval& interval() const noexcept { return interval_; }
    SmoothnessOrder order() const noexcept { return k_; }
    int k() const noexcept { return k_.value(); }
    SplineKind kind() const noexcept { return kind_; }
    std::span<const MonomialPiece> pieces() const noexcept { return pieces_; }
    std::span<const double> bad_set() const noexcept { return bad_set_; }
    std::span<const double> source_nodes() const noexcept { return source_nodes_; }

    /// Piece boundaries strictly inside (a,b).
    std::vector<double> knots() const;

    /// Index of the covering piece. Right: lo <= x < hi (last piece closed);
    /// Left: lo < x <= hi (first piece closed).
    std::size_t locate(double x, Side side = Side::Right) const;

    double operator()(double x) const;

    friend bool operator==(const AdversarialSpline&, const AdversarialSpline&) = default;

private:
    Interval interval_;
    SmoothnessOrder k_;
    std::vector<MonomialPiece> pieces_;
    std::vector<double> bad_set_;
    SplineKind kind_;
    std::vector<double> source_nodes_;
    std::vector<double> lows_;
};

/// Adversary that is nonzero on every gap between consecutive nodes and on
/// both endpoint stretches [a,x_1], [x_n,b].
AdversarialSpline build_global(std::span<const double> nodes, SmoothnessOrder k, const Interval& interval);

/// Adversary confined to the single largest gap. Candidate gaps are
/// [a,x_1], the node gaps, and [x_n,b]; ties go to the leftmost.
AdversarialSpline build_local(std::span<const double> nodes, SmoothnessOrder k, const Interval& interval);

double eval(const AdversarialSpline& s, double x);

/// Derivative of the given order (0..k). TwoSided throws DiscontinuityError
/// when the one-sided values differ by more than 1e-9*(1+|value|).
double eval_derivative(const AdversarialSpline& s, double x, int order, Side side = Side::TwoSided);

/// Integral of one four-piece bump over a gap: gap^{k+1} / 4^k.
double unit_integral(double gap, SmoothnessOrder k);

/// Closed-form integral of the spline over its interval.
double exact_integral(const AdversarialSpline& s);

/// Line-oriented text form; doubles use shortest round-trip decimal.
void write_spline(std::ostream& out, const AdversarialSpline& s);
AdversarialSpline read_spline(std::istream& in);

}  // namespace qadv

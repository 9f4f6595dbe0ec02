#include "invdist/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>
#include <vector>

#include "invdist/errors.hpp"

namespace invdist {

namespace {

constexpr int kInitialPieces = 4;
constexpr std::size_t kMaxIntervals = 200000;
constexpr int kMaxTailDoublings = 20;

double checked_eval(const RealFunction& f, double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os.precision(17);
        os << "integrand is not finite at x = " << x << " (value " << v << ")";
        throw DomainEvaluationError(os.str(), x);
    }
    return v;
}

struct Panel {
    double a, b;
    double fa, fl, fm, fr, fb;
    double value;  // Richardson-corrected composite Simpson on 2 halves
    double error;  // |S2 - S1| / 15
    int depth;
};

Panel make_panel(const RealFunction& f, double a, double b, double fa, double fm, double fb,
                 int depth) {
    Panel p{};
    p.a = a;
    p.b = b;
    p.fa = fa;
    p.fm = fm;
    p.fb = fb;
    const double m = 0.5 * (a + b);
    p.fl = checked_eval(f, 0.5 * (a + m));
    p.fr = checked_eval(f, 0.5 * (m + b));
    const double h = b - a;
    const double s1 = h / 6.0 * (fa + 4.0 * fm + fb);
    const double s2 = h / 12.0 * (fa + 4.0 * p.fl + 2.0 * fm + 4.0 * p.fr + fb);
    p.value = s2 + (s2 - s1) / 15.0;
    p.error = std::abs(s2 - s1) / 15.0;
    p.depth = depth;
    return p;
}

struct ByError {
    bool operator()(const Panel& x, const Panel& y) const { return x.error < y.error; }
};

template <typename Range>
std::pair<double, double> totals(const Range& panels) {
    CompensatedSum v;
    CompensatedSum e;
    for (const Panel& p : panels) {
        v += p.value;
        e += p.error;
    }
    return {v.value(), e.value()};
}

// Tail integral on one side of `anchor`; direction = -1 for the left tail.
QuadResult integrate_tail(const RealFunction& f, double anchor, int direction,
                          const QuadratureSpec& spec) {
    spec.validate();
    const double w0 = spec.initial_halfwidth;
    auto piece = [&](double near, double far) {
        return direction < 0 ? integrate(f, anchor - far, anchor - near, spec)
                             : integrate(f, anchor + near, anchor + far, spec);
    };
    QuadResult acc = piece(0.0, w0);
    double w = w0;
    for (int k = 0; k <= kMaxTailDoublings; ++k) {
        const QuadResult chunk = piece(w, 2.0 * w);
        acc.value += chunk.value;
        acc.error_estimate += chunk.error_estimate;
        acc.converged = acc.converged && chunk.converged;
        if (std::abs(chunk.value) < spec.tail_tol) return acc;
        w *= 2.0;
    }
    std::ostringstream os;
    os << "tail integral did not settle before |x - anchor| reached " << w
       << "; integrand is likely not integrable";
    throw DivergenceError(os.str());
}

}  // namespace

void QuadratureSpec::validate() const {
    std::vector<std::string> bad;
    if (!(abs_tol > 0.0)) bad.emplace_back("abs_tol must be > 0");
    if (!(rel_tol > 0.0)) bad.emplace_back("rel_tol must be > 0");
    if (max_depth < 1) bad.emplace_back("max_depth must be >= 1");
    if (!(tail_tol > 0.0)) bad.emplace_back("tail_tol must be > 0");
    if (!(initial_halfwidth > 0.0)) bad.emplace_back("initial_halfwidth must be > 0");
    if (bad.empty()) return;
    std::string msg = "invalid QuadratureSpec:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
}

QuadResult integrate(const RealFunction& f, double a, double b, const QuadratureSpec& spec) {
    spec.validate();
    if (!(a <= b)) throw ConfigError("integrate: requires a <= b");
    if (a == b) return {};

    std::vector<Panel> open;  // max-heap on error
    std::vector<Panel> frozen;
    const ByError cmp;

    const double width = (b - a) / kInitialPieces;
    double x0 = a;
    double f0 = checked_eval(f, a);
    for (int i = 0; i < kInitialPieces; ++i) {
        const double x1 = (i + 1 == kInitialPieces) ? b : a + width * (i + 1);
        const double f1 = checked_eval(f, x1);
        const double fm = checked_eval(f, 0.5 * (x0 + x1));
        open.push_back(make_panel(f, x0, x1, f0, fm, f1, 1));
        x0 = x1;
        f0 = f1;
    }
    std::make_heap(open.begin(), open.end(), cmp);

    auto exact_totals = [&]() {
        auto [vo, eo] = totals(open);
        auto [vf, ef] = totals(frozen);
        CompensatedSum v;
        CompensatedSum e;
        v += vo;
        v += vf;
        e += eo;
        e += ef;
        return std::pair{v.value(), e.value()};
    };

    double value = 0.0;
    double error = 0.0;
    std::tie(value, error) = exact_totals();
    std::size_t panels = open.size();
    for (;;) {
        if (error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
            // The running totals drift; confirm against a fresh sum.
            std::tie(value, error) = exact_totals();
            if (error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
                return {value, error, true};
            }
        }
        if (open.empty() || panels >= kMaxIntervals) break;

        std::pop_heap(open.begin(), open.end(), cmp);
        const Panel worst = open.back();
        open.pop_back();
        if (worst.depth >= spec.max_depth) {
            frozen.push_back(worst);
            continue;
        }
        const double m = 0.5 * (worst.a + worst.b);
        const Panel left = make_panel(f, worst.a, m, worst.fa, worst.fl, worst.fm, worst.depth + 1);
        const Panel right = make_panel(f, m, worst.b, worst.fm, worst.fr, worst.fb, worst.depth + 1);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        open.push_back(left);
        std::push_heap(open.begin(), open.end(), cmp);
        open.push_back(right);
        std::push_heap(open.begin(), open.end(), cmp);
        ++panels;
    }

    std::tie(value, error) = exact_totals();
    return {value, error, error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value))};
}

QuadResult integrate_signed(const RealFunction& f, double from, double to,
                            const QuadratureSpec& spec) {
    if (from <= to) return integrate(f, from, to, spec);
    QuadResult r = integrate(f, to, from, spec);
    r.value = -r.value;
    return r;
}

QuadResult integrate_with_breaks(const RealFunction& f, double a, double b,
                                 std::span<const double> breaks, const QuadratureSpec& spec) {
    if (!(a <= b)) throw ConfigError("integrate_with_breaks: requires a <= b");
    std::vector<double> cuts{a};
    std::vector<double> inner(breaks.begin(), breaks.end());
    std::sort(inner.begin(), inner.end());
    for (double c : inner) {
        if (c > cuts.back() && c < b) cuts.push_back(c);
    }
    cuts.push_back(b);
    QuadResult out;
    CompensatedSum v;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const QuadResult r = integrate(f, cuts[i], cuts[i + 1], spec);
        v += r.value;
        out.error_estimate += r.error_estimate;
        out.converged = out.converged && r.converged;
    }
    out.value = v.value();
    return out;
}

QuadResult integrate_line(const RealFunction& f, const QuadratureSpec& spec) {
    spec.validate();
    const double l0 = spec.initial_halfwidth;
    QuadResult acc = integrate(f, -l0, l0, spec);
    CompensatedSum v;
    v += acc.value;
    double l = l0;
    for (int k = 0; k <= kMaxTailDoublings; ++k) {
        const QuadResult right = integrate(f, l, 2.0 * l, spec);
        const QuadResult left = integrate(f, -2.0 * l, -l, spec);
        v += right.value;
        v += left.value;
        acc.error_estimate += right.error_estimate + left.error_estimate;
        acc.converged = acc.converged && right.converged && left.converged;
        if (std::abs(right.value) < spec.tail_tol && std::abs(left.value) < spec.tail_tol) {
            acc.value = v.value();
            return acc;
        }
        l *= 2.0;
    }
    std::ostringstream os;
    os << "integral over the real line did not settle before L reached " << l
       << "; integrand is likely not integrable";
    throw DivergenceError(os.str());
}

QuadResult integrate_lower_tail(const RealFunction& f, double x, const QuadratureSpec& spec) {
    return integrate_tail(f, x, -1, spec);
}

QuadResult integrate_upper_tail(const RealFunction& f, double x, const QuadratureSpec& spec) {
    return integrate_tail(f, x, +1, spec);
}

double invert_monotone(const RealFunction& f, double target, double lo, double hi,
                       double tol) {
    if (!(lo <= hi)) throw ConfigError("invert_monotone: requires lo <= hi");
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (!std::isfinite(flo) || !std::isfinite(fhi)) {
        throw BracketError("invert_monotone: function is not finite at the bracket ends");
    }
    if (flo > 0.0 || fhi < 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << "invert_monotone: target " << target << " outside [" << flo + target << ", "
           << fhi + target << "]";
        throw BracketError(os.str());
    }
    if (std::abs(flo) <= tol) return lo;
    if (std::abs(fhi) <= tol) return hi;

    int side = 0;  // which end was retained last, for the Illinois halving
    for (int iter = 0; iter < 400; ++iter) {
        double x;
        if (iter % 4 == 3 || fhi == flo) {
            x = 0.5 * (lo + hi);
        } else {
            x = (lo * fhi - hi * flo) / (fhi - flo);
            if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
        }
        if (x <= lo || x >= hi) return std::abs(flo) < std::abs(fhi) ? lo : hi;
        const double fx = f(x) - target;
        if (!std::isfinite(fx)) throw BracketError("invert_monotone: function is not finite");
        if (std::abs(fx) <= tol) return x;
        if (fx < 0.0) {
            lo = x;
            flo = fx;
            if (side == -1) fhi *= 0.5;
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (side == +1) flo *= 0.5;
            side = +1;
        }
    }
    return 0.5 * (lo + hi);
}

double compensated_sum(std::span<const double> xs, std::string* diagnostic) {
    CompensatedSum s;
    bool reported = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!reported && !std::isfinite(xs[i])) {
            reported = true;
            if (diagnostic != nullptr) {
                *diagnostic = "non-finite summand at index " + std::to_string(i);
            }
        }
        s += xs[i];
    }
    return s.value();
}

}  // namespace invdist

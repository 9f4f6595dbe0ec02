#include "invdist/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "invdist/csv.hpp"
#include "invdist/errors.hpp"

namespace invdist {

namespace {

// Q(t) = int_0^t du / (1 + u^{2p}), odd in t. Cubic Hermite on [0, 2] from
// cumulative quadrature, asymptotic series beyond.
class PolynomialPrimitive {
public:
    explicit PolynomialPrimitive(int p) : p_(p) {
        const double half_pi_over_p = std::numbers::pi / (2.0 * p);
        q_inf_ = half_pi_over_p / std::sin(half_pi_over_p);
        nodes_.assign(kCells + 1, 0.0);
        QuadratureSpec spec;
        spec.abs_tol = 1e-16;
        spec.rel_tol = 1e-14;
        const RealFunction inv_h = [this](double u) { return slope(u); };
        CompensatedSum acc;
        for (std::size_t k = 0; k < kCells; ++k) {
            acc += integrate(inv_h, kStep * k, kStep * (k + 1), spec).value;
            nodes_[k + 1] = acc.value();
        }
    }

    double operator()(double y) const {
        const double t = std::abs(y);
        const double q = t <= kEdge ? hermite(t) : q_inf_ - tail(t);
        return y < 0.0 ? -q : q;
    }

private:
    static constexpr double kEdge = 2.0;
    static constexpr std::size_t kCells = 2048;
    static constexpr double kStep = kEdge / kCells;

    double slope(double u) const { return 1.0 / (1.0 + std::pow(u, 2 * p_)); }

    double hermite(double t) const {
        const auto k = std::min(static_cast<std::size_t>(t / kStep), kCells - 1);
        const double t0 = kStep * k;
        const double s = (t - t0) / kStep;
        const double s2 = s * s;
        const double s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        return h00 * nodes_[k] + h10 * kStep * slope(t0) + h01 * nodes_[k + 1] +
               h11 * kStep * slope(t0 + kStep);
    }

    // int_t^inf du / (1 + u^{2p}) = sum_k (-1)^k t^{1 - 2p(k+1)} / (2p(k+1) - 1), t > 1.
    double tail(double t) const {
        const double r = std::pow(t, -2.0 * p_);
        double term = t * r;  // t^{1-2p}
        double sum = 0.0;
        for (int k = 0; k < 200; ++k) {
            const double add = term / (2.0 * p_ * (k + 1) - 1.0);
            sum += (k % 2 == 0) ? add : -add;
            if (add < 1e-18 * std::abs(sum)) break;
            term *= r;
        }
        return sum;
    }

    int p_;
    double q_inf_ = 0.0;
    std::vector<double> nodes_;
};

// Uniform primitive table of 1/(sigma^2 h) for weights without a closed kernel.
class PrimitiveTable {
public:
    static constexpr double kStep = 1e-3;

    PrimitiveTable(const WeightFunction& wf, const DiffusionModel& model, double lo, double hi)
        : lo_(lo) {
        const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / kStep)) + 1;
        values_.assign(cells + 1, 0.0);
        const RealFunction integrand = [&](double v) {
            return 1.0 / (model.diffusion_sq(v) * wf.eval(v));
        };
        CompensatedSum acc;
        for (std::size_t k = 0; k < cells; ++k) {
            acc += integrate(integrand, lo + kStep * k, lo + kStep * (k + 1), model.quadrature()).value;
            values_[k + 1] = acc.value();
        }
    }

    double operator()(double y) const {
        const double pos = (y - lo_) / kStep;
        const auto k = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), values_.size() - 2);
        const double s = pos - static_cast<double>(k);
        return values_[k] + s * (values_[k + 1] - values_[k]);
    }

private:
    double lo_;
    std::vector<double> values_;
};

double parse_real(std::string_view s, std::string_view what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ConfigError("estimator spec: " + std::string(what) + " must be a finite number, got '" +
                          std::string(s) + "'");
    }
    return v;
}

int parse_int(std::string_view s, std::string_view what) {
    int v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("estimator spec: " + std::string(what) + " must be an integer, got '" +
                          std::string(s) + "'");
    }
    return v;
}

void require_increasing(std::span<const double> xs) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) throw ConfigError("evaluation grid must be strictly increasing");
    }
}

std::vector<double> edf_curve(const Path& path, std::span<const double> xs) {
    const std::size_t n = path.steps();
    if (n == 0) throw ConfigError("edf: path has no steps");
    std::vector<double> sorted(path.values.begin(), path.values.begin() + static_cast<long>(n));
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), xs[j]) - sorted.begin();
        out[j] = static_cast<double>(below) / static_cast<double>(n);
    }
    return out;
}

}  // namespace

// WeightFunction ---------------------------------------------------------

WeightFunction WeightFunction::polynomial(int p) {
    if (p < 1) throw ConfigError("polynomial weight requires p >= 1");
    WeightFunction w;
    w.kind = WeightKind::polynomial;
    w.p = p;
    w.name = "poly:p=" + std::to_string(p);
    const int two_p = 2 * p;
    w.h = [two_p](double y) { return 1.0 + std::pow(y, two_p); };
    w.h_prime = [two_p](double y) { return two_p * std::pow(y, two_p - 1); };
    w.log_slope = [two_p](double y) {
        const double t = std::pow(y, two_p);
        if (std::isinf(t)) return two_p / y;
        return two_p * std::pow(y, two_p - 1) / (1.0 + t);
    };
    if (p == 1) {
        w.primitive = [](double y) { return std::atan(y); };
    } else {
        auto table = std::make_shared<const PolynomialPrimitive>(p);
        w.primitive = [table](double y) { return (*table)(y); };
    }
    return w;
}

WeightFunction WeightFunction::exponential(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ConfigError("exponential weight requires finite delta > 0");
    }
    WeightFunction w;
    w.kind = WeightKind::exponential;
    w.delta = delta;
    w.name = "exp:delta=" + csv::fmt(delta);
    w.h = [delta](double y) { return std::exp(delta * y); };
    w.h_prime = [delta](double y) { return delta * std::exp(delta * y); };
    w.log_slope = [delta](double) { return delta; };
    w.primitive = [delta](double y) { return -std::exp(-delta * y) / delta; };
    return w;
}

WeightFunction WeightFunction::constant(double c) {
    if (c == 0.0 || !std::isfinite(c)) throw ConfigError("constant weight requires finite c != 0");
    WeightFunction w;
    w.kind = WeightKind::constant;
    w.c = c;
    w.name = "const:c=" + csv::fmt(c);
    w.h = [c](double) { return c; };
    w.h_prime = [](double) { return 0.0; };
    w.log_slope = [](double) { return 0.0; };
    w.primitive = [c](double y) { return y / c; };
    return w;
}

WeightFunction WeightFunction::custom(RealFunction h, RealFunction h_prime, RealFunction primitive,
                                      std::string name) {
    if (!h || !h_prime) throw ConfigError("custom weight requires h and h_prime");
    WeightFunction w;
    w.kind = WeightKind::custom;
    w.name = std::move(name);
    w.log_slope = [h, h_prime](double y) { return h_prime(y) / h(y); };
    w.h = std::move(h);
    w.h_prime = std::move(h_prime);
    w.primitive = std::move(primitive);
    return w;
}

double WeightFunction::eval(double y) const {
    const double v = h(y);
    // A constant weight may be negative; the estimator does not depend on c.
    const bool ok = std::isfinite(v) && (kind == WeightKind::constant ? v != 0.0 : v > 0.0);
    if (!ok) throw DomainEvaluationError("weight h must be finite and > 0 at y = " + csv::fmt(y), y);
    return v;
}

// WeightedKernel ---------------------------------------------------------

WeightedKernel::WeightedKernel(WeightFunction wf, const DiffusionModel& model)
    : wf_(std::move(wf)), model_(&model) {
    if (wf_.primitive && model.constant_diffusion_sq()) {
        closed_ = true;
        inv_sigma_sq_ = 1.0 / *model.constant_diffusion_sq();
    }
}

double WeightedKernel::primitive(double y) const {
    if (!closed_) throw ConfigError("kernel primitive requested for a non-closed-form kernel");
    return wf_.primitive(y) * inv_sigma_sq_;
}

double WeightedKernel::K(double x, double y) const {
    if (x == y) return 0.0;
    if (closed_) {
        if (wf_.kind == WeightKind::exponential) {
            // (e^{-delta y} - e^{-delta x}) / delta without cancellation
            const double d = wf_.delta;
            return std::exp(-d * x) * std::expm1(d * (x - y)) / d * inv_sigma_sq_;
        }
        return (wf_.primitive(x) - wf_.primitive(y)) * inv_sigma_sq_;
    }
    const RealFunction integrand = [this](double v) {
        return 1.0 / (model_->diffusion_sq(v) * wf_.eval(v));
    };
    return integrate_signed(integrand, y, x, model_->quadrature()).value;
}

double WeightedKernel::Kh(double x, double y) const {
    if (closed_) {
        switch (wf_.kind) {
            case WeightKind::exponential:
                return -std::expm1(wf_.delta * (y - x)) / wf_.delta * inv_sigma_sq_;
            case WeightKind::constant:
                return (x - y) * inv_sigma_sq_;
            default:
                break;
        }
    }
    return K(x, y) * wf_.eval(y);
}

double WeightedKernel::R(double x, double y) const {
    return y < x ? 2.0 * Kh(x, y) : 0.0;
}

double WeightedKernel::N(double x, double y) const {
    if (!(y < x)) return 0.0;
    return Kh(x, y) * wf_.log_slope(y) * model_->diffusion_sq(y);
}

// Estimators -------------------------------------------------------------

double edf(const Path& path, double x) {
    const std::size_t n = path.steps();
    if (n == 0) throw ConfigError("edf: path has no steps");
    std::size_t below = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (path.values[i] < x) ++below;
    }
    return static_cast<double>(below) / static_cast<double>(n);
}

double kernel_K(const WeightFunction& wf, const DiffusionModel& model, double x, double y) {
    return WeightedKernel(wf, model).K(x, y);
}

double coeff_R(const WeightFunction& wf, const DiffusionModel& model, double x, double y) {
    return WeightedKernel(wf, model).R(x, y);
}

double coeff_N(const WeightFunction& wf, const DiffusionModel& model, double x, double y) {
    return WeightedKernel(wf, model).N(x, y);
}

double unbiased_estimate(const Path& path, const WeightFunction& wf, const DiffusionModel& model,
                         double x) {
    const std::size_t n = path.steps();
    if (n < 1) throw ConfigError("unbiased_estimate: path needs at least two grid points");
    const WeightedKernel kernel(wf, model);
    CompensatedSum ito;
    CompensatedSum drift;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = path.values[i];
        if (!(y < x)) continue;
        ito += kernel.R(x, y) * (path.values[i + 1] - y);
        drift += kernel.N(x, y);
    }
    return (ito.value() + drift.value() * path.dt) / path.horizon();
}

UnbiasedEstimator::UnbiasedEstimator(WeightFunction wf, const DiffusionModel& model)
    : kernel_(std::move(wf), model) {}

std::vector<double> UnbiasedEstimator::curve(const Path& path, std::span<const double> xs) const {
    const std::size_t n = path.steps();
    if (n < 1) throw ConfigError("unbiased estimator: path needs at least two grid points");
    const WeightFunction& wf = kernel_.weight();
    const DiffusionModel& model = kernel_.model();

    // Summand for step i at abscissa x > X_i: (P(x) - P(X_i)) * a_i, where P is
    // the kernel primitive and a_i = h(X_i) (2 dX_i + (h'/h)(X_i) sigma^2(X_i) dt).
    std::function<double(double)> prim;
    std::optional<PrimitiveTable> table;
    if (kernel_.closed_form()) {
        prim = [this](double y) { return kernel_.primitive(y); };
    } else {
        double lo = *std::min_element(path.values.begin(), path.values.end());
        double hi = *std::max_element(path.values.begin(), path.values.end());
        if (!xs.empty()) {
            lo = std::min(lo, xs.front());
            hi = std::max(hi, xs.back());
        }
        table.emplace(wf, model, lo, hi);
        prim = [&table](double y) { return (*table)(y); };
    }

    std::vector<double> b(n);
    std::vector<double> a(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = path.values[i];
        const double s2 = model.diffusion_sq(v);
        y[i] = v;
        b[i] = prim(v);
        a[i] = wf.eval(v) * (2.0 * (path.values[i + 1] - v) + wf.log_slope(v) * s2 * path.dt);
    }
    const double T = path.horizon();

    std::vector<double> out(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double x = xs[j];
        const double px = prim(x);
        CompensatedSum s;
        for (std::size_t i = 0; i < n; ++i) {
            if (y[i] < x) s += (px - b[i]) * a[i];
        }
        out[j] = s.value() / T;
    }
    return out;
}

// Specs ------------------------------------------------------------------

std::string EstimatorSpec::tag() const {
    if (kind == Kind::edf) return "edf";
    switch (weight->kind) {
        case WeightKind::polynomial: return "unbiased_poly";
        case WeightKind::exponential: return "unbiased_exp";
        case WeightKind::constant: return "unbiased_const";
        case WeightKind::custom: return "unbiased_custom";
    }
    return "unbiased";
}

EstimatorSpec parse_estimator_spec(std::string_view text) {
    EstimatorSpec spec;
    if (text == "edf") {
        spec.kind = EstimatorSpec::Kind::edf;
        spec.text = "edf";
        return spec;
    }
    const std::string bad = "unknown estimator spec '" + std::string(text) +
                            "' (expected edf | unbiased:poly:p=<int> | unbiased:exp:delta=<real> | "
                            "unbiased:const:c=<real>)";
    constexpr std::string_view prefix = "unbiased:";
    if (!text.starts_with(prefix)) throw ConfigError(bad);
    const std::string_view rest = text.substr(prefix.size());
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw ConfigError(bad);
    const std::string_view family = rest.substr(0, colon);
    const std::string_view assignment = rest.substr(colon + 1);
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError(bad);
    const std::string_view key = assignment.substr(0, eq);
    const std::string_view value = assignment.substr(eq + 1);

    spec.kind = EstimatorSpec::Kind::unbiased;
    if (family == "poly" && key == "p") {
        spec.weight = WeightFunction::polynomial(parse_int(value, "p"));
    } else if (family == "exp" && key == "delta") {
        spec.weight = WeightFunction::exponential(parse_real(value, "delta"));
    } else if (family == "const" && key == "c") {
        spec.weight = WeightFunction::constant(parse_real(value, "c"));
    } else {
        throw ConfigError(bad);
    }
    spec.text = "unbiased:" + spec.weight->name;
    return spec;
}

CurveEstimator make_curve_estimator(const EstimatorSpec& spec, const DiffusionModel& model) {
    if (spec.kind == EstimatorSpec::Kind::edf) return edf_curve;
    auto est = std::make_shared<UnbiasedEstimator>(*spec.weight, model);
    return [est](const Path& path, std::span<const double> xs) { return est->curve(path, xs); };
}

EstimateCurve estimate_curve(const Path& path, std::span<const double> xs,
                             const EstimatorSpec& spec, const DiffusionModel& model) {
    require_increasing(xs);
    EstimateCurve c;
    c.xs.assign(xs.begin(), xs.end());
    c.estimator_tag = spec.tag();
    c.horizon_T = path.horizon();
    if (xs.empty()) return c;
    c.values = make_curve_estimator(spec, model)(path, xs);
    return c;
}

double r_second_moment(const WeightFunction& wf, const DiffusionModel& model, double x) {
    const WeightedKernel k(wf, model);
    return stationary_expectation(model, [&](double y) {
        const double r = k.R(x, y);
        return r == 0.0 ? 0.0 : r * r * model.diffusion_sq(y);
    });
}

Cond1Report check_cond1(const WeightFunction& wf, const DiffusionModel& model, double x) {
    const WeightedKernel k(wf, model);
    Cond1Report rep;
    try {
        rep.second_moment = r_second_moment(wf, model, x);
        rep.second_moment_finite = std::isfinite(rep.second_moment);
    } catch (const Error&) {
        rep.second_moment_finite = false;
    }
    try {
        rep.abs_n_moment = stationary_expectation(model, [&](double y) { return std::abs(k.N(x, y)); });
        rep.abs_n_finite = std::isfinite(rep.abs_n_moment);
    } catch (const Error&) {
        rep.abs_n_finite = false;
    }
    for (int j = 0; j <= 6; ++j) {
        const double y = -std::ldexp(1.0, j);
        rep.boundary_probes.push_back(y);
        double v = std::numeric_limits<double>::infinity();
        try {
            const double dens = invariant_density(model, y);
            v = dens == 0.0 ? 0.0 : std::abs(k.R(x, y) * model.diffusion_sq(y) * dens);
        } catch (const Error&) {
        }
        rep.boundary_values.push_back(v);
    }
    rep.boundary_vanishes = rep.boundary_values.back() < 1e-10;
    return rep;
}

}  // namespace invdist

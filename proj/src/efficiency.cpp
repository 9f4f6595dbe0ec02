#include "invdist/efficiency.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "invdist/csv.hpp"
#include "invdist/errors.hpp"

namespace invdist {

namespace {

double parse_number(std::string_view s, const std::string& what) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ConfigError("nu spec: " + what + " must be a finite number, got '" + std::string(s) +
                          "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Tolerances for R_S(x, x); the integrand is smooth apart from a kink at y = x.
QuadratureSpec local_spec() {
    QuadratureSpec s;
    s.abs_tol = 1e-13;
    s.rel_tol = 1e-11;
    s.tail_tol = 1e-14;
    s.initial_halfwidth = 2.0;
    return s;
}

// int_0^y g (oriented) with a breakpoint at x.
double oriented_with_break(const RealFunction& g, double y, double x, const QuadratureSpec& spec) {
    if (y == 0.0) return 0.0;
    const double lo = std::min(0.0, y);
    const double hi = std::max(0.0, y);
    const double brk[] = {x};
    const double v = integrate_with_breaks(g, lo, hi, brk, spec).value;
    return y > 0.0 ? v : -v;
}

}  // namespace

// NuMeasure --------------------------------------------------------------

NuMeasure NuMeasure::gaussian(double mean, double sd, double mass) {
    NuMeasure nu;
    nu.kind = Kind::gaussian;
    nu.mean = mean;
    nu.sd = sd;
    nu.total_mass = mass;
    nu.validate();
    return nu;
}

NuMeasure NuMeasure::uniform(double a, double b, double mass) {
    NuMeasure nu;
    nu.kind = Kind::uniform;
    nu.a = a;
    nu.b = b;
    nu.total_mass = mass;
    nu.validate();
    return nu;
}

NuMeasure NuMeasure::point_masses(std::vector<std::pair<double, double>> atoms) {
    NuMeasure nu;
    nu.kind = Kind::point_masses;
    std::sort(atoms.begin(), atoms.end());
    nu.atoms = std::move(atoms);
    nu.total_mass = 0.0;
    for (const auto& [x, w] : nu.atoms) nu.total_mass += w;
    nu.validate();
    return nu;
}

void NuMeasure::validate() const {
    if (!(total_mass > 0.0) || !std::isfinite(total_mass)) {
        throw ConfigError("nu: total mass must be finite and > 0");
    }
    switch (kind) {
        case Kind::gaussian:
            if (!std::isfinite(mean) || !(sd > 0.0) || !std::isfinite(sd)) {
                throw ConfigError("nu: gaussian needs a finite mean and sd > 0");
            }
            break;
        case Kind::uniform:
            if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
                throw ConfigError("nu: uniform needs finite a < b");
            }
            break;
        case Kind::point_masses:
            if (atoms.empty()) throw ConfigError("nu: point masses need at least one atom");
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                const auto& [x, w] = atoms[i];
                if (!std::isfinite(x) || !(w > 0.0) || !std::isfinite(w)) {
                    throw ConfigError("nu: atoms need a finite location and weight > 0");
                }
                if (i > 0 && atoms[i - 1].first == x) throw ConfigError("nu: duplicate atom");
            }
            break;
    }
}

double NuMeasure::density(double x) const {
    switch (kind) {
        case Kind::gaussian: {
            const double z = (x - mean) / sd;
            return total_mass * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
        }
        case Kind::uniform:
            return (x >= a && x <= b) ? total_mass / (b - a) : 0.0;
        case Kind::point_masses:
            break;
    }
    throw ConfigError("nu: point masses have no Lebesgue density");
}

double NuMeasure::mass_outside(double lo, double hi) const {
    switch (kind) {
        case Kind::gaussian:
            return total_mass *
                   (std_normal_cdf((lo - mean) / sd) + std_normal_cdf(-(hi - mean) / sd));
        case Kind::uniform: {
            const double inside = std::max(0.0, std::min(b, hi) - std::max(a, lo));
            return total_mass * (1.0 - inside / (b - a));
        }
        case Kind::point_masses: {
            double m = 0.0;
            for (const auto& [x, w] : atoms) {
                if (x < lo || x > hi) m += w;
            }
            return m;
        }
    }
    return 0.0;
}

std::string NuMeasure::to_string() const {
    std::string s;
    switch (kind) {
        case Kind::gaussian:
            s = "gauss:" + csv::fmt(mean) + "," + csv::fmt(sd);
            break;
        case Kind::uniform:
            s = "uniform:" + csv::fmt(a) + "," + csv::fmt(b);
            break;
        case Kind::point_masses:
            s = "points:";
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                if (i > 0) s += ";";
                s += csv::fmt(atoms[i].first) + "@" + csv::fmt(atoms[i].second);
            }
            return s;
    }
    if (total_mass != 1.0) s += "*" + csv::fmt(total_mass);
    return s;
}

NuMeasure parse_nu_spec(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ConfigError("nu spec must look like gauss:m,s | uniform:a,b | points:x@w;..., got '" +
                          text + "'");
    }
    const std::string family = text.substr(0, colon);
    std::string_view body(text);
    body.remove_prefix(colon + 1);
    if (family == "points") {
        std::vector<std::pair<double, double>> atoms;
        for (auto item : split(body, ';')) {
            const auto at = item.find('@');
            if (at == std::string_view::npos) {
                throw ConfigError("nu spec: atom '" + std::string(item) + "' must be x@w");
            }
            atoms.emplace_back(parse_number(item.substr(0, at), "atom location"),
                               parse_number(item.substr(at + 1), "atom weight"));
        }
        return NuMeasure::point_masses(std::move(atoms));
    }
    double mass = 1.0;
    if (const auto star = body.find('*'); star != std::string_view::npos) {
        mass = parse_number(body.substr(star + 1), "mass");
        body = body.substr(0, star);
    }
    const auto parts = split(body, ',');
    if (parts.size() != 2) throw ConfigError("nu spec: '" + family + "' takes two parameters");
    if (family == "gauss") {
        return NuMeasure::gaussian(parse_number(parts[0], "mean"), parse_number(parts[1], "sd"),
                                   mass);
    }
    if (family == "uniform") {
        return NuMeasure::uniform(parse_number(parts[0], "a"), parse_number(parts[1], "b"), mass);
    }
    throw ConfigError("nu spec: unknown family '" + family + "'");
}

double integrate_nu(const NuMeasure& nu, const RealFunction& g, const QuadratureSpec& spec) {
    nu.validate();
    switch (nu.kind) {
        case NuMeasure::Kind::gaussian: {
            const double norm = nu.total_mass / std::sqrt(2.0 * std::numbers::pi);
            const RealFunction in_z = [&](double z) {
                const double w = std::exp(-0.5 * z * z);
                return w == 0.0 ? 0.0 : norm * w * g(nu.mean + nu.sd * z);
            };
            return integrate_line(in_z, spec).value;
        }
        case NuMeasure::Kind::uniform:
            return nu.total_mass / (nu.b - nu.a) * integrate(g, nu.a, nu.b, spec).value;
        case NuMeasure::Kind::point_masses: {
            CompensatedSum s;
            for (const auto& [x, w] : nu.atoms) s += w * g(x);
            return s.value();
        }
    }
    return 0.0;
}

std::vector<double> nu_grid_weights(const NuMeasure& nu, std::span<const double> xs) {
    nu.validate();
    if (xs.size() < 2) throw ConfigError("nu grid: need at least two abscissae");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) throw ConfigError("nu grid must be strictly increasing");
    }
    std::vector<double> w(xs.size(), 0.0);
    if (nu.kind == NuMeasure::Kind::point_masses) {
        for (const auto& [x, m] : nu.atoms) {
            const auto it = std::find(xs.begin(), xs.end(), x);
            if (it == xs.end()) {
                throw ConfigError("nu grid: atom at " + csv::fmt(x) + " is not a grid point");
            }
            w[static_cast<std::size_t>(it - xs.begin())] = m;
        }
        return w;
    }
    const double outside = nu.mass_outside(xs.front(), xs.back());
    if (outside >= 1e-6 * nu.total_mass) {
        throw ConfigError("nu grid: nu puts mass " + csv::fmt(outside) + " outside [" +
                          csv::fmt(xs.front()) + ", " + csv::fmt(xs.back()) +
                          "]; widen the grid");
    }
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double half = 0.5 * (xs[i + 1] - xs[i]);
        w[i] += half * nu.density(xs[i]);
        w[i + 1] += half * nu.density(xs[i + 1]);
    }
    return w;
}

// Influence and local variance --------------------------------------------

double influence_numerator(const DiffusionModel& model, double x, double y) {
    // F(x ^ y) - F(x) F(y) = F(min) (1 - F(max)); the product form keeps both tails accurate.
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    return invariant_cdf(model, lo) * invariant_survival(model, hi);
}

double influence_over_density(const DiffusionModel& model, double x, double y) {
    if (y >= x) return invariant_cdf(model, x) * upper_density_ratio(model, y);
    return invariant_survival(model, x) * lower_density_ratio(model, y);
}

double local_variance(const DiffusionModel& model, double x) {
    // 4 int infl^2 / (sigma^2 f) = 4 int (infl / f)^2 f / sigma^2.
    const RealFunction g = [&](double y) {
        const double f = invariant_density(model, y);
        if (f == 0.0) return 0.0;
        const double q = influence_over_density(model, x, y);
        return q * q * f / model.diffusion_sq(y);
    };
    const QuadratureSpec spec = local_spec();
    const double left = integrate_lower_tail(g, x, spec).value;
    const double right = integrate_upper_tail(g, x, spec).value;
    const double v = 4.0 * (left + right);
    if (!std::isfinite(v)) throw DivergenceError("local_variance is not finite at x = " + csv::fmt(x));
    return v;
}

double efficiency_bound(const DiffusionModel& model, const NuMeasure& nu) {
    QuadratureSpec spec;
    spec.abs_tol = 1e-10;
    spec.rel_tol = 1e-9;
    spec.tail_tol = 1e-11;
    spec.initial_halfwidth = 8.0;
    return integrate_nu(nu, [&](double x) { return local_variance(model, x); }, spec);
}

// Representation identities -----------------------------------------------

QuadratureSpec identity_spec() {
    QuadratureSpec s;
    s.abs_tol = 1e-14;
    s.rel_tol = 1e-12;
    s.tail_tol = 1e-15;
    s.initial_halfwidth = 2.0;
    return s;
}

QuadratureSpec screen_spec() {
    QuadratureSpec s;
    s.abs_tol = 1e-6;
    s.rel_tol = 1e-6;
    s.tail_tol = 1e-8;
    s.initial_halfwidth = 4.0;
    return s;
}

double H_func(const DiffusionModel& model, double x, double y, const QuadratureSpec& spec) {
    const RealFunction g = [&](double v) {
        return 2.0 * influence_over_density(model, x, v) / model.diffusion_sq(v);
    };
    return oriented_with_break(g, y, x, spec);
}

double G_func(const WeightFunction& wf, const DiffusionModel& model, double x, double y,
              const QuadratureSpec& spec) {
    const WeightedKernel k(wf, model);
    const RealFunction g = [&](double v) { return k.R(x, v); };
    return oriented_with_break(g, y, x, spec);
}

double M_func(const WeightFunction& wf, const DiffusionModel& model, double x, double y,
              const QuadratureSpec& spec) {
    return G_func(wf, model, x, y, spec) + H_func(model, x, y, spec);
}

double M_single_integral(const WeightFunction& wf, const DiffusionModel& model, double x, double y,
                         const QuadratureSpec& spec) {
    const RealFunction g = [&](double v) { return m_closed(wf, model, x, v); };
    return oriented_with_break(g, y, x, spec);
}

double coeff_c(const WeightFunction& wf, const DiffusionModel& model, double x, double y) {
    const double fx = invariant_cdf(model, x);
    if (y >= x) return -fx;
    const WeightedKernel k(wf, model);
    // K h (2 S + (h'/h) sigma^2) = K [2 h S + h' sigma^2].
    return k.Kh(x, y) * (2.0 * model.drift(y) + wf.log_slope(y) * model.diffusion_sq(y)) - fx;
}

double coeff_d(const WeightFunction& wf, const DiffusionModel& model, double x, double y) {
    const WeightedKernel k(wf, model);
    return k.R(x, y) * model.diffusion(y);
}

double m_closed(const WeightFunction& wf, const DiffusionModel& model, double x, double z) {
    const WeightedKernel k(wf, model);
    const double local = z < x ? 2.0 * k.Kh(x, z) : 0.0;
    return local + 2.0 * influence_over_density(model, x, z) / model.diffusion_sq(z);
}

double m_direct(const WeightFunction& wf, const DiffusionModel& model, double x, double z,
                const QuadratureSpec& spec) {
    // f(v) / f(z) through log-density differences. Since E_S c_x = 0, the
    // integral over (-inf, z] equals minus the one over [z, inf); the smaller
    // side is used to avoid cancellation.
    const double lz = log_unnormalized_density(model, z);
    const RealFunction g = [&](double v) {
        const double w = std::exp(log_unnormalized_density(model, v) - lz);
        return w == 0.0 ? 0.0 : coeff_c(wf, model, x, v) * w;
    };
    double integral;
    if (invariant_cdf(model, z) <= 0.5) {
        const double brk[] = {x};
        if (z > x) {
            integral = integrate_lower_tail(g, x, spec).value + integrate_with_breaks(g, x, z, brk, spec).value;
        } else {
            integral = integrate_lower_tail(g, z, spec).value;
        }
    } else {
        if (z < x) {
            integral = -(integrate(g, z, x, spec).value + integrate_upper_tail(g, x, spec).value);
        } else {
            integral = -integrate_upper_tail(g, z, spec).value;
        }
    }
    // u = exp(phi) / sigma^2, so f(v) / (f sigma^2)(z) = (u(v) / u(z)) / sigma^2(z).
    return 2.0 * integral / model.diffusion_sq(z);
}

double ode_residual(const WeightFunction& wf, const DiffusionModel& model, double x, double y,
                    double step) {
    if (!(step > 0.0)) throw ConfigError("ode_residual: step must be > 0");
    const QuadratureSpec spec = identity_spec();
    const double mp = M_func(wf, model, x, y + step, spec);
    const double mm = M_func(wf, model, x, y - step, spec);
    const double d1 = (mp - mm) / (2.0 * step);
    const double d2 =
        (m_closed(wf, model, x, y + step) - m_closed(wf, model, x, y - step)) / (2.0 * step);
    return d1 * model.drift(y) + 0.5 * d2 * model.diffusion_sq(y) - coeff_c(wf, model, x, y);
}

RepresentationCheck pathwise_representation_check(const Path& path, const WeightFunction& wf,
                                                  const DiffusionModel& model, double x) {
    if (!path.wiener_increments) {
        throw ConfigError("pathwise_representation_check: path has no stored Wiener increments");
    }
    const std::size_t n = path.steps();
    const double T = path.horizon();
    const double rt = std::sqrt(T);
    RepresentationCheck rc;
    rc.lhs = rt * (unbiased_estimate(path, wf, model, x) - invariant_cdf(model, x));
    const QuadratureSpec spec = identity_spec();
    rc.boundary =
        (M_func(wf, model, x, path.values[n], spec) - M_func(wf, model, x, path.values[0], spec)) / rt;
    CompensatedSum s;
    const auto& dw = *path.wiener_increments;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = path.values[i];
        s += 2.0 * influence_over_density(model, x, y) / model.diffusion(y) * dw[i];
    }
    rc.martingale = -s.value() / rt;
    rc.discrepancy = std::abs(rc.lhs - rc.boundary - rc.martingale);
    return rc;
}

ConditionCheck check_Q2(const DiffusionModel& model, const NuMeasure& nu,
                        const QuadratureSpec& spec) {
    ConditionCheck c;
    try {
        c.value = integrate_nu(
            nu,
            [&](double x) {
                return stationary_expectation(
                    model,
                    [&](double y) {
                        const double h = H_func(model, x, y, spec);
                        return h * h;
                    },
                    spec);
            },
            spec);
        c.ok = std::isfinite(c.value);
        c.detail = c.ok ? "finite" : "not finite";
    } catch (const Error& e) {
        c.ok = false;
        c.detail = e.what();
    }
    return c;
}

ConditionCheck check_Q3(const WeightFunction& wf, const DiffusionModel& model, const NuMeasure& nu,
                        const QuadratureSpec& spec) {
    ConditionCheck c;
    try {
        c.value = integrate_nu(
            nu,
            [&](double x) {
                return stationary_expectation(
                    model,
                    [&](double y) {
                        const double g = G_func(wf, model, x, y, spec);
                        return g * g;
                    },
                    spec);
            },
            spec);
        c.ok = std::isfinite(c.value);
        c.detail = c.ok ? "finite" : "not finite";
    } catch (const Error& e) {
        c.ok = false;
        c.detail = e.what();
    }
    return c;
}

// Monte Carlo risk ----------------------------------------------------------

NamedEstimator named_estimator(const EstimatorSpec& spec, const DiffusionModel& model) {
    return {spec.tag(), spec.text, make_curve_estimator(spec, model)};
}

std::vector<RiskReport> empirical_risk(const DiffusionModel& model,
                                       std::span<const NamedEstimator> estimators,
                                       const NuMeasure& nu, const SimConfig& sim,
                                       std::size_t replications, std::span<const double> xs,
                                       unsigned workers) {
    if (estimators.empty()) throw ConfigError("empirical_risk: no estimators");
    if (replications < 2) throw ConfigError("empirical_risk: need at least two replications");
    sim.validate();
    const std::vector<double> weights = nu_grid_weights(nu, xs);
    const std::size_t m = xs.size();
    const std::size_t e_count = estimators.size();

    std::vector<double> truth(m);
    std::vector<double> local(m);
    for (std::size_t j = 0; j < m; ++j) {
        truth[j] = invariant_cdf(model, xs[j]);
        local[j] = local_variance(model, xs[j]);
    }

    // errors[r][e * m + j]; an empty row marks a dropped replication.
    std::vector<std::vector<double>> errors(replications);
    std::vector<std::uint64_t> seeds(replications);
    for (std::size_t r = 0; r < replications; ++r) seeds[r] = derive_substream_seed(sim.seed, r);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= replications) return;
            try {
                SimConfig cfg = sim;
                cfg.seed = seeds[r];
                Path path;
                try {
                    path = simulate_path(model, cfg);
                } catch (const SimulationError&) {
                    continue;
                }
                std::vector<double> row(e_count * m);
                for (std::size_t e = 0; e < e_count; ++e) {
                    const auto est = estimators[e].curve(path, xs);
                    for (std::size_t j = 0; j < m; ++j) row[e * m + j] = est[j] - truth[j];
                }
                errors[r] = std::move(row);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(replications);
                return;
            }
        }
    };
    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), replications));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::size_t aborted = 0;
    for (const auto& row : errors) aborted += row.empty() ? 1 : 0;
    if (static_cast<double>(aborted) > 0.01 * static_cast<double>(replications)) {
        throw SimulationError("empirical_risk: " + std::to_string(aborted) + " of " +
                                  std::to_string(replications) + " replications exploded",
                              0);
    }
    const std::size_t kept = replications - aborted;
    if (kept < 2) throw SimulationError("empirical_risk: fewer than two usable replications", 0);

    const double T = static_cast<double>(sim.steps()) * sim.dt;
    const double bound = efficiency_bound(model, nu);

    std::vector<RiskReport> out;
    for (std::size_t e = 0; e < e_count; ++e) {
        RiskReport rep;
        rep.estimator = estimators[e].spec_text;
        rep.tag = estimators[e].tag;
        rep.xs.assign(xs.begin(), xs.end());
        rep.local_bound = local;
        rep.bias.assign(m, 0.0);
        rep.scaled_variance.assign(m, 0.0);
        rep.replications = kept;
        rep.aborted = aborted;
        rep.horizon_T = T;
        rep.dt = sim.dt;
        rep.master_seed = sim.seed;
        rep.path_seeds = seeds;
        CompensatedSum risk;
        for (std::size_t j = 0; j < m; ++j) {
            CompensatedSum s;
            for (const auto& row : errors) {
                if (!row.empty()) s += row[e * m + j];
            }
            const double mean = s.value() / static_cast<double>(kept);
            CompensatedSum ss;
            CompensatedSum sq;
            for (const auto& row : errors) {
                if (row.empty()) continue;
                const double d = row[e * m + j] - mean;
                ss += d * d;
                sq += row[e * m + j] * row[e * m + j];
            }
            rep.bias[j] = mean;
            rep.scaled_variance[j] = T * ss.value() / static_cast<double>(kept - 1);
            risk += weights[j] * sq.value() / static_cast<double>(kept);
        }
        rep.scaled_risk = T * risk.value();
        rep.bound = bound;
        rep.ratio = rep.bound > 0.0 ? rep.scaled_risk / rep.bound
                                    : std::numeric_limits<double>::quiet_NaN();
        out.push_back(std::move(rep));
    }
    return out;
}

RiskReport empirical_risk(const DiffusionModel& model, const EstimatorSpec& estimator,
                          const NuMeasure& nu, const SimConfig& sim, std::size_t replications,
                          std::span<const double> xs, unsigned workers) {
    const NamedEstimator one[] = {named_estimator(estimator, model)};
    return empirical_risk(model, one, nu, sim, replications, xs, workers).front();
}

std::string risk_report_json(const RiskReport& report) {
    nlohmann::ordered_json j;
    j["xs"] = report.xs;
    j["bias"] = report.bias;
    j["scaled_variance"] = report.scaled_variance;
    j["local_bound"] = report.local_bound;
    j["scaled_risk"] = report.scaled_risk;
    j["bound"] = report.bound;
    j["ratio"] = report.ratio;
    j["config"] = {{"estimator", report.estimator},
                   {"tag", report.tag},
                   {"replications", report.replications},
                   {"aborted", report.aborted},
                   {"T", report.horizon_T},
                   {"dt", report.dt},
                   {"master_seed", report.master_seed},
                   {"path_seeds", report.path_seeds}};
    return j.dump(2);
}

void write_risk_csv(std::ostream& os, const RiskReport& report) {
    os << "x,bias,scaled_variance,local_bound\r\n";
    for (std::size_t j = 0; j < report.xs.size(); ++j) {
        os << csv::fmt(report.xs[j]) << ',' << csv::fmt(report.bias[j]) << ','
           << csv::fmt(report.scaled_variance[j]) << ',' << csv::fmt(report.local_bound[j]) << "\r\n";
    }
}

}  // namespace invdist

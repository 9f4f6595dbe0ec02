#include "invdist/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include "invdist/errors.hpp"
#include "json.hpp"

namespace invdist {

namespace detail {

// Cumulative integrals of the unnormalized density on a uniform grid
// [lo, hi]. left[k] = int_{-inf}^{lo + k step}, right[k] = int_{lo + k step}^{+inf}.
struct CdfTable {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
    std::size_t cells = 0;
    std::vector<double> left;
    std::vector<double> right;
};

struct LawCache {
    std::once_flag g_flag;
    double g = 0.0;
    std::once_flag table_flag;
    CdfTable table;
};

}  // namespace detail

namespace {

constexpr double kTableStep = 1.0 / 16.0;
constexpr std::size_t kMaxTableCells = 1u << 16;
constexpr int kMaxDoublings = 20;
constexpr double kQuantileTol = 1e-10;

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Tight settings for cumulative tables: the CDF must dominate Monte Carlo
// noise and survive division by small densities.
QuadratureSpec table_spec(const DiffusionModel& model) {
    QuadratureSpec s = model.quadrature();
    s.abs_tol = std::min(s.abs_tol, 1e-15);
    s.rel_tol = std::min(s.rel_tol, 1e-13);
    s.tail_tol = std::min(s.tail_tol, 1e-16);
    return s;
}

RealFunction unnormalized(const DiffusionModel& model) {
    return [&model](double y) { return unnormalized_density(model, y); };
}

// Smallest L = L0 * 2^k with int_L^{2L} u < tail (direction +1) or the mirror.
double table_edge(const DiffusionModel& model, int direction, double tail) {
    const QuadratureSpec spec = table_spec(model);
    const RealFunction u = unnormalized(model);
    double l = spec.initial_halfwidth;
    for (int k = 0; k <= kMaxDoublings; ++k) {
        const double chunk = direction > 0 ? integrate(u, l, 2.0 * l, spec).value
                                           : integrate(u, -2.0 * l, -l, spec).value;
        if (chunk < tail) return direction * l;
        l *= 2.0;
    }
    throw DivergenceError("invariant law: tail mass does not vanish; model is not ergodic");
}

const detail::CdfTable& cdf_table(const DiffusionModel& model) {
    detail::LawCache& cache = model.cache();
    std::call_once(cache.table_flag, [&] {
        const double g = normalizing_constant(model);
        const QuadratureSpec spec = table_spec(model);
        const RealFunction u = unnormalized(model);
        detail::CdfTable t;
        t.lo = table_edge(model, -1, 1e-16 * g);
        t.hi = table_edge(model, +1, 1e-16 * g);
        t.step = kTableStep;
        t.cells = static_cast<std::size_t>(std::ceil((t.hi - t.lo) / t.step));
        if (t.cells > kMaxTableCells) {
            t.cells = kMaxTableCells;
        }
        t.step = (t.hi - t.lo) / static_cast<double>(t.cells);

        std::vector<double> cell(t.cells);
        for (std::size_t k = 0; k < t.cells; ++k) {
            const double a = t.lo + t.step * static_cast<double>(k);
            const double b = (k + 1 == t.cells) ? t.hi : t.lo + t.step * static_cast<double>(k + 1);
            cell[k] = integrate(u, a, b, spec).value;
        }
        t.left.assign(t.cells + 1, 0.0);
        t.right.assign(t.cells + 1, 0.0);
        CompensatedSum acc;
        acc += integrate_lower_tail(u, t.lo, spec).value;
        t.left[0] = acc.value();
        for (std::size_t k = 0; k < t.cells; ++k) {
            acc += cell[k];
            t.left[k + 1] = acc.value();
        }
        CompensatedSum racc;
        racc += integrate_upper_tail(u, t.hi, spec).value;
        t.right[t.cells] = racc.value();
        for (std::size_t k = t.cells; k-- > 0;) {
            racc += cell[k];
            t.right[k] = racc.value();
        }
        cache.table = std::move(t);
    });
    return cache.table;
}

std::size_t cell_index(const detail::CdfTable& t, double x) {
    const double pos = std::floor((x - t.lo) / t.step);
    if (pos <= 0.0) return 0;
    std::size_t k = std::min(static_cast<std::size_t>(pos), t.cells - 1);
    // The quotient can round across a cell edge; settle on the cell whose bounds contain x.
    while (k > 0 && t.lo + t.step * static_cast<double>(k) > x) --k;
    while (k + 1 < t.cells && t.lo + t.step * static_cast<double>(k + 1) <= x) ++k;
    return k;
}

double cell_start(const detail::CdfTable& t, std::size_t k) {
    return t.lo + t.step * static_cast<double>(k);
}

double cell_end(const detail::CdfTable& t, std::size_t k) {
    return (k + 1 == t.cells) ? t.hi : t.lo + t.step * static_cast<double>(k + 1);
}

// Unnormalized mass below x.
double mass_below(const DiffusionModel& model, double x) {
    const detail::CdfTable& t = cdf_table(model);
    const QuadratureSpec spec = table_spec(model);
    const RealFunction u = unnormalized(model);
    if (x <= t.lo) return integrate_lower_tail(u, x, spec).value;
    if (x >= t.hi) {
        return t.left[t.cells] + integrate(u, t.hi, x, spec).value;
    }
    const std::size_t k = cell_index(t, x);
    return t.left[k] + integrate(u, cell_start(t, k), x, spec).value;
}

// Unnormalized mass above x.
double mass_above(const DiffusionModel& model, double x) {
    const detail::CdfTable& t = cdf_table(model);
    const QuadratureSpec spec = table_spec(model);
    const RealFunction u = unnormalized(model);
    if (x >= t.hi) return integrate_upper_tail(u, x, spec).value;
    if (x <= t.lo) {
        return t.right[0] + integrate(u, x, t.lo, spec).value;
    }
    const std::size_t k = cell_index(t, x);
    return t.right[k + 1] + integrate(u, x, cell_end(t, k), spec).value;
}

// int over the tail beyond x of u(v)/u(x) dv, evaluated through log-density
// differences so that nothing underflows.
double tail_ratio(const DiffusionModel& model, double x, int direction) {
    const double lx = log_unnormalized_density(model, x);
    const RealFunction w = [&](double v) {
        return std::exp(log_unnormalized_density(model, v) - lx);
    };
    QuadratureSpec spec = model.quadrature();
    spec.initial_halfwidth = 1.0;
    return direction < 0 ? integrate_lower_tail(w, x, spec).value
                         : integrate_upper_tail(w, x, spec).value;
}

}  // namespace

// DiffusionModel ---------------------------------------------------------

DiffusionModel::DiffusionModel(RealFunction drift, RealFunction diffusion,
                               RealFunction diffusion_sq, std::string label)
    : drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      diffusion_sq_(std::move(diffusion_sq)),
      label_(std::move(label)),
      cache_(std::make_shared<detail::LawCache>()) {
    if (!drift_ || !diffusion_ || !diffusion_sq_) {
        throw ConfigError("DiffusionModel: drift, diffusion and diffusion_sq are required");
    }
}

DiffusionModel& DiffusionModel::with_scale_exponent(RealFunction closed_form) {
    scale_exponent_ = std::move(closed_form);
    cache_ = std::make_shared<detail::LawCache>();
    return *this;
}

DiffusionModel& DiffusionModel::with_constant_diffusion_sq(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError("constant diffusion_sq must be finite and > 0");
    }
    constant_sigma_sq_ = value;
    return *this;
}

DiffusionModel& DiffusionModel::with_quadrature(const QuadratureSpec& spec) {
    spec.validate();
    quad_ = spec;
    cache_ = std::make_shared<detail::LawCache>();
    return *this;
}

double DiffusionModel::drift(double x) const {
    const double v = drift_(x);
    if (!std::isfinite(v)) {
        throw DomainEvaluationError("drift is not finite at x = " + num(x), x);
    }
    return v;
}

double DiffusionModel::diffusion(double x) const {
    const double v = diffusion_(x);
    if (!std::isfinite(v) || !(v > 0.0)) {
        throw DomainEvaluationError("diffusion must be finite and > 0 at x = " + num(x), x);
    }
    return v;
}

double DiffusionModel::diffusion_sq(double x) const {
    const double v = diffusion_sq_(x);
    if (!std::isfinite(v) || !(v > 0.0)) {
        throw DomainEvaluationError("diffusion_sq must be finite and > 0 at x = " + num(x), x);
    }
    return v;
}

// Invariant law ----------------------------------------------------------

double scale_exponent(const DiffusionModel& model, double y) {
    if (model.has_closed_scale_exponent()) return model.closed_scale_exponent()(y);
    const RealFunction integrand = [&model](double v) {
        return model.drift(v) / model.diffusion_sq(v);
    };
    return 2.0 * integrate_signed(integrand, 0.0, y, model.quadrature()).value;
}

double scale_function(const DiffusionModel& model, double x) {
    const RealFunction integrand = [&model](double y) {
        const double e = std::exp(-scale_exponent(model, y));
        if (!std::isfinite(e)) {
            throw OverflowError("scale function integrand overflows at y = " + num(y), y);
        }
        return e;
    };
    return integrate_signed(integrand, 0.0, x, model.quadrature()).value;
}

double log_unnormalized_density(const DiffusionModel& model, double y) {
    return scale_exponent(model, y) - std::log(model.diffusion_sq(y));
}

double unnormalized_density(const DiffusionModel& model, double y) {
    return std::exp(scale_exponent(model, y)) / model.diffusion_sq(y);
}

double normalizing_constant(const DiffusionModel& model) {
    detail::LawCache& cache = model.cache();
    std::call_once(cache.g_flag, [&] {
        const RealFunction integrand = [&model](double y) {
            const double v = unnormalized_density(model, y);
            if (v == std::numeric_limits<double>::infinity()) {
                throw DivergenceError("G(S) integrand overflows at y = " + num(y) +
                                      "; model is not ergodic");
            }
            return v;
        };
        const double g = integrate_line(integrand, model.quadrature()).value;
        if (!(g > 0.0) || !std::isfinite(g)) {
            throw DivergenceError("G(S) is not a finite positive number");
        }
        cache.g = g;
    });
    return cache.g;
}

double invariant_density(const DiffusionModel& model, double y) {
    return unnormalized_density(model, y) / normalizing_constant(model);
}

double invariant_cdf(const DiffusionModel& model, double x) {
    const double g = normalizing_constant(model);
    const detail::CdfTable& t = cdf_table(model);
    const double f = (x > t.hi) ? 1.0 - mass_above(model, x) / g : mass_below(model, x) / g;
    return std::clamp(f, 0.0, 1.0);
}

double invariant_survival(const DiffusionModel& model, double x) {
    const double g = normalizing_constant(model);
    const detail::CdfTable& t = cdf_table(model);
    const double s = (x < t.lo) ? 1.0 - mass_below(model, x) / g : mass_above(model, x) / g;
    return std::clamp(s, 0.0, 1.0);
}

double lower_density_ratio(const DiffusionModel& model, double x) {
    const detail::CdfTable& t = cdf_table(model);
    if (x < t.lo) return tail_ratio(model, x, -1);
    const double u = unnormalized_density(model, x);
    if (!(u > 0.0)) {
        throw TailError("lower_density_ratio: density underflows at x = " + num(x));
    }
    return mass_below(model, x) / u;
}

double upper_density_ratio(const DiffusionModel& model, double x) {
    const detail::CdfTable& t = cdf_table(model);
    if (x > t.hi) return tail_ratio(model, x, +1);
    const double u = unnormalized_density(model, x);
    if (!(u > 0.0)) {
        throw TailError("upper_density_ratio: density underflows at x = " + num(x));
    }
    return mass_above(model, x) / u;
}

double invariant_quantile(const DiffusionModel& model, double u) {
    if (!(u > 0.0 && u < 1.0)) throw ConfigError("invariant_quantile: u must lie in (0, 1)");
    const double l0 = model.quadrature().initial_halfwidth;
    const double limit = l0 * std::ldexp(1.0, kMaxDoublings);
    const RealFunction cdf = [&model](double x) { return invariant_cdf(model, x); };
    double lo = -l0;
    while (cdf(lo) > u) {
        lo *= 2.0;
        if (-lo > limit) throw TailError("invariant_quantile: lower bracket diverged");
    }
    double hi = l0;
    while (cdf(hi) < u) {
        hi *= 2.0;
        if (hi > limit) throw TailError("invariant_quantile: upper bracket diverged");
    }
    return invert_monotone(cdf, u, lo, hi, kQuantileTol);
}

double stationary_expectation(const DiffusionModel& model, const RealFunction& g) {
    return stationary_expectation(model, g, model.quadrature());
}

double stationary_expectation(const DiffusionModel& model, const RealFunction& g,
                              const QuadratureSpec& spec) {
    const double norm = normalizing_constant(model);
    const RealFunction integrand = [&](double z) {
        const double dens = unnormalized_density(model, z) / norm;
        if (dens == 0.0) return 0.0;
        return g(z) * dens;
    };
    return integrate_line(integrand, spec).value;
}

ErgodicityReport check_ergodicity(const DiffusionModel& model, double probe_radius) {
    if (!(probe_radius > 0.0)) throw ConfigError("check_ergodicity: probe_radius must be > 0");
    constexpr int kShells = 7;
    constexpr int kPerShell = 16;

    ErgodicityReport rep;
    std::vector<double> shell_max(kShells, -std::numeric_limits<double>::infinity());
    bool finite = true;
    double inner = 0.0;
    for (int k = 0; k < kShells; ++k) {
        const double outer = probe_radius * std::ldexp(1.0, k);
        for (int j = 1; j <= kPerShell; ++j) {
            const double r = inner + (outer - inner) * j / kPerShell;
            for (double x : {-r, r}) {
                rep.probe_points.push_back(x);
                double ratio = std::numeric_limits<double>::infinity();
                try {
                    ratio = (x * model.drift(x) + model.diffusion_sq(x)) / (1.0 + x * x);
                } catch (const DomainEvaluationError&) {
                    finite = false;
                }
                if (!std::isfinite(ratio)) finite = false;
                shell_max[k] = std::max(shell_max[k], ratio);
            }
        }
        inner = outer;
    }
    const double inner_max =
        *std::max_element(shell_max.begin(), shell_max.end() - 1);
    rep.a_fit = *std::max_element(shell_max.begin(), shell_max.end());
    rep.es_ok = finite && shell_max.back() <= inner_max + std::abs(inner_max) + 1e-12;

    bool diverges = true;
    for (int side : {-1, +1}) {
        std::vector<double> mags;
        bool overflow = false;
        for (int k = 0; k < kShells; ++k) {
            const double x = side * probe_radius * std::ldexp(1.0, k);
            try {
                mags.push_back(std::abs(scale_function(model, x)));
            } catch (const OverflowError&) {
                overflow = true;
                break;
            } catch (const DomainEvaluationError&) {
                overflow = true;
                break;
            }
        }
        if (overflow) continue;
        bool increasing = true;
        for (std::size_t k = 1; k < mags.size(); ++k) {
            if (!(mags[k] > mags[k - 1])) increasing = false;
        }
        const std::size_t n = mags.size();
        const double last = mags[n - 1] - mags[n - 2];
        const double prev = mags[n - 2] - mags[n - 3];
        if (!increasing || last < 0.75 * prev) diverges = false;
    }
    rep.vs_diverges = diverges;

    try {
        rep.g_value = normalizing_constant(model);
        rep.g_finite = rep.g_value > 0.0;
    } catch (const Error&) {
        rep.g_finite = false;
        rep.g_value = std::numeric_limits<double>::infinity();
    }
    return rep;
}

// Catalog ----------------------------------------------------------------

DiffusionModel ou_model(double theta, double sigma) {
    if (!(theta > 0.0) || !(sigma > 0.0)) throw ConfigError("ou: theta and sigma must be > 0");
    const double s2 = sigma * sigma;
    DiffusionModel m([theta](double x) { return -theta * x; },
                     [sigma](double) { return sigma; }, [s2](double) { return s2; },
                     "ou(theta=" + num(theta) + ",sigma=" + num(sigma) + ")");
    m.with_scale_exponent([theta, s2](double y) { return -theta * y * y / s2; })
        .with_constant_diffusion_sq(s2);
    return m;
}

DiffusionModel quartic_model() {
    DiffusionModel m([](double x) { return -x * x * x; }, [](double) { return 1.0; },
                     [](double) { return 1.0; }, "quartic");
    m.with_scale_exponent([](double y) { return -0.5 * y * y * y * y; })
        .with_constant_diffusion_sq(1.0);
    return m;
}

DiffusionModel shifted_ou_model(double mean, double theta, double sigma) {
    if (!(theta > 0.0) || !(sigma > 0.0)) {
        throw ConfigError("shifted_ou: theta and sigma must be > 0");
    }
    const double s2 = sigma * sigma;
    DiffusionModel m([mean, theta](double x) { return -theta * (x - mean); },
                     [sigma](double) { return sigma; }, [s2](double) { return s2; },
                     "shifted_ou(mean=" + num(mean) + ",theta=" + num(theta) +
                         ",sigma=" + num(sigma) + ")");
    // 2/s2 int_0^y -theta (v - mean) dv = -theta y (y - 2 mean) / s2
    m.with_scale_exponent([mean, theta, s2](double y) { return -theta * y * (y - 2.0 * mean) / s2; })
        .with_constant_diffusion_sq(s2);
    return m;
}

DiffusionModel make_model(const ModelSpec& spec) {
    std::set<std::string> allowed;
    if (spec.family == "ou") {
        allowed = {"theta", "sigma"};
    } else if (spec.family == "quartic") {
        allowed = {};
    } else if (spec.family == "shifted_ou") {
        allowed = {"mean", "theta", "sigma"};
    } else {
        throw ConfigError("unknown model family '" + spec.family +
                          "' (expected ou, quartic or shifted_ou)");
    }
    for (const auto& [k, v] : spec.params) {
        if (!allowed.contains(k)) {
            throw ConfigError("model family '" + spec.family + "' has no parameter '" + k + "'");
        }
        if (!std::isfinite(v)) throw ConfigError("model parameter '" + k + "' is not finite");
    }
    auto get = [&](const std::string& k, double def) {
        auto it = spec.params.find(k);
        return it == spec.params.end() ? def : it->second;
    };
    if (spec.family == "ou") return ou_model(get("theta", 1.0), get("sigma", 1.0));
    if (spec.family == "quartic") return quartic_model();
    return shifted_ou_model(get("mean", 0.0), get("theta", 1.0), get("sigma", 1.0));
}

ModelSpec parse_model_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model spec is not valid JSON: ") + e.what());
    }
    ModelSpec spec;
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
        throw ConfigError("model spec requires a string field 'family'");
    }
    spec.family = j["family"].get<std::string>();
    if (j.contains("params")) {
        if (!j["params"].is_object()) throw ConfigError("model 'params' must be an object");
        for (const auto& [k, v] : j["params"].items()) {
            if (!v.is_number()) throw ConfigError("model parameter '" + k + "' must be a number");
            spec.params[k] = v.get<double>();
        }
    }
    return spec;
}

std::string to_json_string(const ModelSpec& spec) {
    nlohmann::json j;
    j["family"] = spec.family;
    j["params"] = nlohmann::json::object();
    for (const auto& [k, v] : spec.params) j["params"][k] = v;
    return j.dump();
}

}  // namespace invdist

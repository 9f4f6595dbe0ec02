#include "invdist/simulate.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "invdist/csv.hpp"
#include "invdist/errors.hpp"

namespace invdist {

namespace {

constexpr double kMaxSteps = 1e9;

std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform on the open interval (0, 1) from the top 53 bits.
double open_uniform(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

double euler_step(const DiffusionModel& model, double x, double dt, double dw, std::size_t step) {
    double next;
    try {
        next = x + model.drift(x) * dt + model.diffusion(x) * dw;
    } catch (const DomainEvaluationError& e) {
        throw SimulationError("simulation exploded at step " + std::to_string(step) + ": " +
                                  e.what(),
                              step);
    }
    if (!std::isfinite(next)) {
        throw SimulationError("simulation exploded at step " + std::to_string(step), step);
    }
    return next;
}

}  // namespace

void SimConfig::validate() const {
    std::vector<std::string> bad;
    if (!(dt > 0.0) || !std::isfinite(dt)) bad.emplace_back("dt must be finite and > 0");
    if (!(horizon >= dt) || !std::isfinite(horizon)) bad.emplace_back("horizon must be >= dt");
    if (!(burn_in >= 0.0)) bad.emplace_back("burn_in must be >= 0");
    if (burn_in > 0.0 && std::holds_alternative<StationaryInit>(init)) {
        bad.emplace_back("burn_in applies to fixed initialization only");
    }
    if (bad.empty() && horizon / dt > kMaxSteps) bad.emplace_back("horizon / dt exceeds 1e9 steps");
    if (const auto* f = std::get_if<FixedInit>(&init); f != nullptr && !std::isfinite(f->x0)) {
        bad.emplace_back("x0 must be finite");
    }
    if (bad.empty()) return;
    std::string msg = "invalid SimConfig:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
}

std::size_t SimConfig::steps() const {
    validate();
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
    return n == 0 ? 1 : n;
}

std::uint64_t derive_substream_seed(std::uint64_t master_seed, std::uint64_t replication_index) {
    // master + (i + 1) * gamma is injective in i (gamma odd), and splitmix64's
    // finalizer is a bijection, so distinct indices never collide.
    return splitmix64(master_seed + (replication_index + 1) * 0x9e3779b97f4a7c15ULL);
}

Path simulate_path(const DiffusionModel& model, const SimConfig& cfg) {
    const std::size_t n = cfg.steps();
    std::mt19937_64 gen(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sqdt = std::sqrt(cfg.dt);

    Path path;
    path.dt = cfg.dt;
    path.seed_used = cfg.seed;
    path.values.resize(n + 1);

    double x;
    if (const auto* fixed = std::get_if<FixedInit>(&cfg.init)) {
        x = fixed->x0;
        const auto burn = static_cast<std::size_t>(std::llround(cfg.burn_in / cfg.dt));
        for (std::size_t i = 0; i < burn; ++i) {
            x = euler_step(model, x, cfg.dt, sqdt * normal(gen), i);
        }
    } else {
        x = invariant_quantile(model, open_uniform(gen));
    }
    path.values[0] = x;

    if (cfg.store_wiener) path.wiener_increments.emplace(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dw = sqdt * normal(gen);
        if (cfg.store_wiener) (*path.wiener_increments)[i] = dw;
        x = euler_step(model, x, cfg.dt, dw, i);
        path.values[i + 1] = x;
    }
    return path;
}

Path simulate_from_increments(const DiffusionModel& model, double x0, double dt,
                              std::span<const double> increments) {
    if (!(dt > 0.0)) throw ConfigError("simulate_from_increments: dt must be > 0");
    if (increments.empty()) throw ConfigError("simulate_from_increments: need >= 1 increment");
    Path path;
    path.dt = dt;
    path.values.resize(increments.size() + 1);
    path.values[0] = x0;
    double x = x0;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        x = euler_step(model, x, dt, increments[i], i);
        path.values[i + 1] = x;
    }
    path.wiener_increments.emplace(increments.begin(), increments.end());
    return path;
}

std::vector<double> coarsen_increments(std::span<const double> increments) {
    if (increments.size() % 2 != 0) {
        throw ConfigError("coarsen_increments: need an even number of increments");
    }
    std::vector<double> out(increments.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = increments[2 * i] + increments[2 * i + 1];
    }
    return out;
}

double occupation_mean(const Path& path, const RealFunction& g) {
    const std::size_t n = path.steps();
    if (n == 0) throw ConfigError("occupation_mean: path has no steps");
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = g(path.values[i]);
        if (!std::isfinite(v)) {
            throw DomainEvaluationError("occupation_mean: g is not finite", path.values[i]);
        }
        s += v;
    }
    return s.value() / static_cast<double>(n);
}

void write_path_csv(std::ostream& os, const Path& path) {
    const bool dw = path.wiener_increments.has_value();
    os << (dw ? "t,x,dW\r\n" : "t,x\r\n");
    const std::size_t n = path.steps();
    for (std::size_t i = 0; i <= n; ++i) {
        os << csv::fmt(path.dt * static_cast<double>(i)) << ',' << csv::fmt(path.values[i]);
        if (dw) {
            os << ',';
            if (i < n) os << csv::fmt((*path.wiener_increments)[i]);
        }
        os << "\r\n";
    }
}

Path read_path_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("path CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool dw;
    if (line == "t,x") {
        dw = false;
    } else if (line == "t,x,dW") {
        dw = true;
    } else {
        throw ConfigError("path CSV header must be 't,x' or 't,x,dW', got '" + line + "'");
    }
    std::vector<double> ts;
    Path path;
    std::vector<double> incs;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (dw && cells.size() == 2 && line.back() == ',') cells.emplace_back();
        if (cells.size() != (dw ? 3u : 2u)) {
            throw ConfigError("path CSV row " + std::to_string(row) + " has the wrong arity");
        }
        try {
            ts.push_back(std::stod(cells[0]));
            path.values.push_back(std::stod(cells[1]));
            if (dw && !cells[2].empty()) incs.push_back(std::stod(cells[2]));
        } catch (const std::exception&) {
            throw ConfigError("path CSV row " + std::to_string(row) + " is not numeric");
        }
    }
    if (path.values.size() < 2) throw ConfigError("path CSV needs at least two rows");
    const std::size_t n = path.values.size() - 1;
    path.dt = (ts.back() - ts.front()) / static_cast<double>(n);
    if (!(path.dt > 0.0)) throw ConfigError("path CSV times must increase");
    if (dw) {
        if (incs.size() != n) throw ConfigError("path CSV must hold exactly n increments");
        path.wiener_increments = std::move(incs);
    }
    return path;
}

}  // namespace invdist

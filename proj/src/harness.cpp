#include "invdist/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "invdist/errors.hpp"

namespace invdist {

namespace {

constexpr double kMaxStepsPerPath = 1e8;

using nlohmann::json;
using nlohmann::ordered_json;

std::string join_problems(const std::vector<std::string>& problems) {
    std::string msg = "invalid experiment config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    return msg;
}

std::optional<double> number_field(const json& obj, const char* key, const std::string& where,
                                   std::vector<std::string>& problems) {
    if (!obj.contains(key)) {
        problems.push_back(where + "." + key + " is required");
        return std::nullopt;
    }
    if (!obj[key].is_number()) {
        problems.push_back(where + "." + key + " must be a number");
        return std::nullopt;
    }
    return obj[key].get<double>();
}

std::optional<unsigned> parse_workers_text(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (*end != '\0' || v < 1 || v > 1024) return std::nullopt;
    return static_cast<unsigned>(v);
}

unsigned hardware_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

ordered_json model_json(const ModelSpec& spec) {
    ordered_json j;
    j["family"] = spec.family;
    j["params"] = ordered_json::object();
    for (const auto& [k, v] : spec.params) j["params"][k] = v;
    return j;
}

ordered_json report_json(const RiskReport& r, const std::string& csv_file) {
    ordered_json j;
    j["estimator"] = r.estimator;
    j["tag"] = r.tag;
    j["csv"] = csv_file;
    j["xs"] = r.xs;
    j["bias"] = r.bias;
    j["scaled_variance"] = r.scaled_variance;
    j["local_bound"] = r.local_bound;
    j["scaled_risk"] = r.scaled_risk;
    j["bound"] = r.bound;
    j["ratio"] = r.ratio;
    j["config"] = {{"replications", r.replications},
                   {"aborted", r.aborted},
                   {"T", r.horizon_T},
                   {"dt", r.dt},
                   {"master_seed", r.master_seed}};
    return j;
}

}  // namespace

std::string artifact_version() { return std::string("invdist ") + INVDIST_VERSION; }

std::vector<double> GridSpec::points() const {
    if (count < 2 || !(lo < hi)) throw ConfigError("grid needs lo < hi and count >= 2");
    std::vector<double> xs(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) xs[i] = lo + step * static_cast<double>(i);
    xs.back() = hi;
    return xs;
}

GridSpec parse_grid_spec(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("grid must be lo:hi:count, got '" + text + "'");
    GridSpec g;
    try {
        std::size_t used = 0;
        g.lo = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("lo");
        g.hi = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("hi");
        const long long c = std::stoll(parts[2], &used);
        if (used != parts[2].size() || c < 2) throw std::invalid_argument("count");
        g.count = static_cast<std::size_t>(c);
    } catch (const std::exception&) {
        throw ConfigError("grid must be lo:hi:count with count >= 2, got '" + text + "'");
    }
    if (!std::isfinite(g.lo) || !std::isfinite(g.hi) || !(g.lo < g.hi)) {
        throw ConfigError("grid needs finite lo < hi, got '" + text + "'");
    }
    return g;
}

unsigned default_worker_count() {
    if (const char* env = std::getenv("INVDIST_WORKERS")) {
        const std::string s(env);
        if (s == "auto") return hardware_workers();
        if (const auto w = parse_workers_text(s)) return *w;
    }
    return 1;
}

namespace {

std::vector<std::string> semantic_problems(const ExperimentConfig& c);

// Leading field name of a problem message, e.g. "sim" for "sim.seed is required".
std::string problem_field(const std::string& msg) {
    return msg.substr(0, msg.find_first_of(" .:"));
}

}  // namespace

void ExperimentConfig::validate() const {
    const auto problems = semantic_problems(*this);
    if (!problems.empty()) throw ConfigError(join_problems(problems));
}

namespace {

std::vector<std::string> semantic_problems(const ExperimentConfig& c) {
    std::vector<std::string> problems;
    try {
        make_model(c.model);
    } catch (const ConfigError& e) {
        problems.emplace_back(std::string("model: ") + e.what());
    }
    if (c.estimators.empty()) problems.emplace_back("estimators must list at least one estimator");
    for (const auto& e : c.estimators) {
        try {
            parse_estimator_spec(e);
        } catch (const ConfigError& err) {
            problems.emplace_back(std::string("estimators: ") + err.what());
        }
    }
    const bool times_ok = std::isfinite(c.T) && std::isfinite(c.dt) && c.dt > 0.0 && c.T >= c.dt;
    if (!times_ok) problems.emplace_back("sim: need finite dt > 0 and T >= dt");
    if (times_ok && c.T / c.dt > kMaxStepsPerPath) problems.emplace_back("sim: T / dt exceeds 1e8");
    if (c.replications < 2) problems.emplace_back("replications must be >= 2");
    if (c.workers == 0) problems.emplace_back("workers must be >= 1");
    if (c.output_dir.empty()) problems.emplace_back("output_dir must be non-empty");
    bool grid_ok = true;
    const GridSpec& g = c.grid;
    if (g.count < 2 || !std::isfinite(g.lo) || !std::isfinite(g.hi) || !(g.lo < g.hi)) {
        problems.emplace_back("grid: need finite lo < hi and count >= 2");
        grid_ok = false;
    }
    try {
        const NuMeasure m = parse_nu_spec(c.nu);
        if (grid_ok) {
            const auto xs = c.grid.points();
            nu_grid_weights(m, xs);
        }
    } catch (const ConfigError& e) {
        problems.emplace_back(std::string("nu: ") + e.what());
    }
    return problems;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");

    static const std::vector<std::string> known = {"model", "estimators", "sim",  "replications",
                                                   "nu",    "grid",       "output_dir", "workers"};
    std::vector<std::string> problems;
    for (const auto& [k, v] : j.items()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            problems.push_back("unknown field '" + k + "'");
        }
    }

    ExperimentConfig cfg;
    if (!j.contains("model")) {
        problems.emplace_back("model is required");
    } else {
        try {
            cfg.model = parse_model_spec(j["model"].dump());
        } catch (const ConfigError& e) {
            problems.emplace_back(std::string("model: ") + e.what());
        }
    }

    if (!j.contains("estimators")) {
        problems.emplace_back("estimators is required");
    } else if (j["estimators"].is_string()) {
        cfg.estimators.push_back(j["estimators"].get<std::string>());
    } else if (j["estimators"].is_array()) {
        for (const auto& e : j["estimators"]) {
            if (e.is_string()) {
                cfg.estimators.push_back(e.get<std::string>());
            } else {
                problems.emplace_back("estimators entries must be strings");
            }
        }
    } else {
        problems.emplace_back("estimators must be a string or an array of strings");
    }

    if (!j.contains("sim") || !j["sim"].is_object()) {
        problems.emplace_back("sim is required and must be an object {T, dt, seed}");
    } else {
        const json& sim = j["sim"];
        if (const auto v = number_field(sim, "T", "sim", problems)) cfg.T = *v;
        if (const auto v = number_field(sim, "dt", "sim", problems)) cfg.dt = *v;
        if (!sim.contains("seed")) {
            problems.emplace_back("sim.seed is required");
        } else if (!sim["seed"].is_number_integer() ||
                   (sim["seed"].is_number_integer() && !sim["seed"].is_number_unsigned() &&
                    sim["seed"].get<long long>() < 0)) {
            problems.emplace_back("sim.seed must be a non-negative integer");
        } else {
            cfg.seed = sim["seed"].get<std::uint64_t>();
        }
    }

    if (!j.contains("replications")) {
        problems.emplace_back("replications is required");
    } else if (!j["replications"].is_number_integer() || j["replications"].get<long long>() < 2) {
        problems.emplace_back("replications must be an integer >= 2");
    } else {
        cfg.replications = j["replications"].get<std::size_t>();
    }

    if (j.contains("nu")) {
        if (j["nu"].is_string()) {
            cfg.nu = j["nu"].get<std::string>();
        } else {
            problems.emplace_back("nu must be a string such as \"gauss:0,1\"");
        }
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (g.is_string()) {
            try {
                cfg.grid = parse_grid_spec(g.get<std::string>());
            } catch (const ConfigError& e) {
                problems.emplace_back(e.what());
            }
        } else if (g.is_object()) {
            if (const auto v = number_field(g, "lo", "grid", problems)) cfg.grid.lo = *v;
            if (const auto v = number_field(g, "hi", "grid", problems)) cfg.grid.hi = *v;
            if (!g.contains("count") || !g["count"].is_number_integer() ||
                g["count"].get<long long>() < 2) {
                problems.emplace_back("grid.count must be an integer >= 2");
            } else {
                cfg.grid.count = g["count"].get<std::size_t>();
            }
        } else {
            problems.emplace_back("grid must be an object {lo, hi, count} or \"lo:hi:count\"");
        }
    }

    if (!j.contains("output_dir") || !j["output_dir"].is_string()) {
        problems.emplace_back("output_dir is required and must be a string");
    } else {
        cfg.output_dir = j["output_dir"].get<std::string>();
    }

    if (!j.contains("workers")) {
        cfg.workers = default_worker_count();
    } else if (j["workers"].is_string() && j["workers"].get<std::string>() == "auto") {
        cfg.workers = hardware_workers();
    } else if (j["workers"].is_number_integer() && j["workers"].get<long long>() >= 1) {
        cfg.workers = static_cast<unsigned>(j["workers"].get<long long>());
    } else {
        problems.emplace_back("workers must be a positive integer or \"auto\"");
    }

    // Semantic checks run on whatever parsed, skipping fields already reported.
    for (auto& p : semantic_problems(cfg)) {
        const auto field = problem_field(p);
        const bool seen = std::any_of(problems.begin(), problems.end(),
                                      [&](const std::string& q) { return problem_field(q) == field; });
        if (!seen) problems.push_back(std::move(p));
    }
    if (!problems.empty()) throw ConfigError(join_problems(problems));
    return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    const DiffusionModel model = make_model(cfg.model);
    const NuMeasure nu = parse_nu_spec(cfg.nu);
    const std::vector<double> xs = cfg.grid.points();

    std::vector<NamedEstimator> named;
    std::vector<std::string> files;
    std::map<std::string, int> seen;
    for (const auto& text : cfg.estimators) {
        NamedEstimator e = named_estimator(parse_estimator_spec(text), model);
        const int n = ++seen[e.tag];
        files.push_back("risk_" + e.tag + (n > 1 ? "_" + std::to_string(n) : "") + ".csv");
        named.push_back(std::move(e));
    }

    SimConfig sim;
    sim.horizon = cfg.T;
    sim.dt = cfg.dt;
    sim.seed = cfg.seed;

    ExperimentResult result;
    result.version = artifact_version();
    result.config = cfg;
    result.reports = empirical_risk(model, named, nu, sim, cfg.replications, xs, cfg.workers);
    result.csv_files = files;
    result.master_seed = cfg.seed;
    result.path_seeds = result.reports.front().path_seeds;

    const std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        std::ofstream os(dir / files[i], std::ios::binary);
        if (!os) throw ConfigError("cannot write " + (dir / files[i]).string());
        write_risk_csv(os, result.reports[i]);
    }
    {
        std::ofstream os(dir / "result.json", std::ios::binary);
        if (!os) throw ConfigError("cannot write " + (dir / "result.json").string());
        os << experiment_result_json(result) << '\n';
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::string experiment_result_json(const ExperimentResult& result) {
    const ExperimentConfig& c = result.config;
    ordered_json j;
    j["version"] = result.version;
    ordered_json cfg;
    cfg["model"] = model_json(c.model);
    cfg["estimators"] = c.estimators;
    cfg["sim"] = {{"T", c.T}, {"dt", c.dt}, {"seed", c.seed}};
    cfg["replications"] = c.replications;
    cfg["nu"] = c.nu;
    cfg["grid"] = {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"count", c.grid.count}};
    j["config"] = cfg;
    // Every report is computed from these same paths.
    j["seed_provenance"] = {{"master_seed", result.master_seed},
                            {"derivation", "splitmix64(master + (r + 1) * 0x9e3779b97f4a7c15)"},
                            {"path_seeds", result.path_seeds}};
    ordered_json reports = ordered_json::array();
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        reports.push_back(report_json(result.reports[i], result.csv_files.at(i)));
    }
    j["reports"] = reports;
    return j.dump(2);
}

}  // namespace invdist

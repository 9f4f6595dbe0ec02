// invdist command-line front end. Exit codes: 0 ok, 2 invalid input,
// 3 numerical divergence, 4 simulation explosion.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "invdist/csv.hpp"
#include "invdist/efficiency.hpp"
#include "invdist/errors.hpp"
#include "invdist/estimators.hpp"
#include "invdist/harness.hpp"
#include "invdist/model.hpp"
#include "invdist/simulate.hpp"

namespace {

using invdist::ConfigError;
using nlohmann::ordered_json;

struct ModelOptions {
    std::string family = "ou";
    std::vector<std::string> params;

    invdist::DiffusionModel build() const {
        invdist::ModelSpec spec;
        if (!family.empty() && family.front() == '{') {
            spec = invdist::parse_model_spec(family);
        } else {
            spec.family = family;
        }
        for (const auto& p : params) {
            const auto eq = p.find('=');
            if (eq == std::string::npos) throw ConfigError("--param expects name=value, got '" + p + "'");
            try {
                std::size_t used = 0;
                const double v = std::stod(p.substr(eq + 1), &used);
                if (used != p.size() - eq - 1) throw std::invalid_argument(p);
                spec.params[p.substr(0, eq)] = v;
            } catch (const std::exception&) {
                throw ConfigError("--param value is not a number: '" + p + "'");
            }
        }
        return invdist::make_model(spec);
    }
};

void add_model_options(CLI::App* cmd, ModelOptions& m) {
    cmd->add_option("--model", m.family, "catalog family (ou | quartic | shifted_ou) or model JSON")
        ->capture_default_str();
    cmd->add_option("--param", m.params, "model parameter name=value (repeatable)");
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw ConfigError("cannot write '" + path + "'");
    return file;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("not a number in list: '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Invariant distribution estimation for ergodic diffusions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", invdist::artifact_version());

    // check-model
    ModelOptions cm_model;
    double cm_radius = 1.0;
    auto* check_model = app.add_subcommand("check-model", "ergodicity screen as JSON");
    add_model_options(check_model, cm_model);
    check_model->add_option("--probe-radius", cm_radius, "innermost probe radius")->capture_default_str();

    // truth
    ModelOptions tr_model;
    std::string tr_grid = "-3:3:61";
    std::string tr_out;
    auto* truth = app.add_subcommand("truth", "F_S and f_S on a grid as CSV x,F,f");
    add_model_options(truth, tr_model);
    truth->add_option("--grid", tr_grid, "lo:hi:count")->capture_default_str();
    truth->add_option("--out", tr_out, "output file (default stdout)");

    // simulate
    ModelOptions sm_model;
    double sm_T = 10.0;
    double sm_dt = 0.01;
    std::uint64_t sm_seed = 1;
    std::optional<double> sm_x0;
    bool sm_dw = false;
    std::string sm_out;
    auto* simulate = app.add_subcommand("simulate", "Euler path as CSV t,x[,dW]");
    add_model_options(simulate, sm_model);
    simulate->add_option("--T", sm_T, "horizon")->capture_default_str();
    simulate->add_option("--dt", sm_dt, "time step")->capture_default_str();
    simulate->add_option("--seed", sm_seed, "generator seed")->capture_default_str();
    simulate->add_option("--x0", sm_x0, "fixed start (default: stationary draw)");
    simulate->add_flag("--store-dw", sm_dw, "write Wiener increments");
    simulate->add_option("--out", sm_out, "output file (default stdout)");

    // estimate
    ModelOptions es_model;
    std::string es_path;
    std::string es_estimator = "edf";
    std::string es_grid = "-3:3:61";
    std::string es_out;
    auto* estimate = app.add_subcommand("estimate", "estimate curve from a path CSV as x,estimate");
    add_model_options(estimate, es_model);
    estimate->add_option("--path", es_path, "path CSV")->required();
    estimate->add_option("--estimator", es_estimator, "edf | unbiased:poly:p=N | unbiased:exp:delta=D | unbiased:const:c=C")
        ->capture_default_str();
    estimate->add_option("--grid", es_grid, "lo:hi:count")->capture_default_str();
    estimate->add_option("--out", es_out, "output file (default stdout)");

    // bound
    ModelOptions bd_model;
    std::string bd_nu = "gauss:0,1";
    std::string bd_grid = "-5:5:101";
    std::string bd_csv;
    auto* bound = app.add_subcommand("bound", "efficiency bound and R_S(x,x) as JSON");
    add_model_options(bound, bd_model);
    bound->add_option("--nu", bd_nu, "gauss:m,s | uniform:a,b | points:x@w;...")->capture_default_str();
    bound->add_option("--grid", bd_grid, "grid for the per-x values")->capture_default_str();
    bound->add_option("--csv", bd_csv, "also write x,local_bound CSV here");

    // check-conditions
    ModelOptions cc_model;
    std::string cc_weight = "unbiased:exp:delta=1";
    std::string cc_xs = "-1,0,1";
    std::string cc_nu = "gauss:0,1";
    auto* check_cond = app.add_subcommand("check-conditions", "integrability screens as JSON");
    add_model_options(check_cond, cc_model);
    check_cond->add_option("--estimator", cc_weight, "unbiased estimator spec")->capture_default_str();
    check_cond->add_option("--x", cc_xs, "comma-separated abscissae")->capture_default_str();
    check_cond->add_option("--nu", cc_nu, "weighting measure")->capture_default_str();

    // experiment
    std::string ex_config;
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo risk experiment");
    experiment->add_option("--config", ex_config, "experiment JSON")->required();

    // identity-checks
    ModelOptions id_model;
    std::string id_weight = "unbiased:exp:delta=1";
    double id_x = 0.0;
    double id_T = 20.0;
    double id_dt = 1e-3;
    std::uint64_t id_seed = 1;
    auto* identities = app.add_subcommand("identity-checks", "representation identities as JSON");
    add_model_options(identities, id_model);
    identities->add_option("--estimator", id_weight, "unbiased estimator spec")->capture_default_str();
    identities->add_option("--x", id_x, "abscissa")->capture_default_str();
    identities->add_option("--T", id_T, "horizon of the pathwise check")->capture_default_str();
    identities->add_option("--dt", id_dt, "time step of the pathwise check")->capture_default_str();
    identities->add_option("--seed", id_seed, "seed of the pathwise check")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    if (*check_model) {
        const auto model = cm_model.build();
        const auto r = invdist::check_ergodicity(model, cm_radius);
        ordered_json j;
        j["model"] = model.label();
        j["es_ok"] = r.es_ok;
        j["vs_diverges"] = r.vs_diverges;
        j["g_finite"] = r.g_finite;
        j["g_value"] = r.g_value;
        j["a_fit"] = r.a_fit;
        j["probe_points"] = r.probe_points;
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    if (*truth) {
        const auto model = tr_model.build();
        const auto xs = invdist::parse_grid_spec(tr_grid).points();
        std::ofstream file;
        std::ostream& os = open_out(tr_out, file);
        os << "x,F,f\r\n";
        for (double x : xs) {
            os << invdist::csv::fmt(x) << ',' << invdist::csv::fmt(invdist::invariant_cdf(model, x))
               << ',' << invdist::csv::fmt(invdist::invariant_density(model, x)) << "\r\n";
        }
        return 0;
    }
    if (*simulate) {
        const auto model = sm_model.build();
        invdist::SimConfig cfg;
        cfg.horizon = sm_T;
        cfg.dt = sm_dt;
        cfg.seed = sm_seed;
        cfg.store_wiener = sm_dw;
        if (sm_x0) cfg.init = invdist::FixedInit{*sm_x0};
        const auto path = invdist::simulate_path(model, cfg);
        std::ofstream file;
        invdist::write_path_csv(open_out(sm_out, file), path);
        return 0;
    }
    if (*estimate) {
        const auto model = es_model.build();
        std::ifstream in(es_path, std::ios::binary);
        if (!in) throw ConfigError("cannot read '" + es_path + "'");
        const auto path = invdist::read_path_csv(in);
        const auto xs = invdist::parse_grid_spec(es_grid).points();
        const auto curve =
            invdist::estimate_curve(path, xs, invdist::parse_estimator_spec(es_estimator), model);
        std::ofstream file;
        std::ostream& os = open_out(es_out, file);
        os << "x,estimate\r\n";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            os << invdist::csv::fmt(xs[i]) << ',' << invdist::csv::fmt(curve.values[i]) << "\r\n";
        }
        return 0;
    }
    if (*bound) {
        const auto model = bd_model.build();
        const auto nu = invdist::parse_nu_spec(bd_nu);
        const auto xs = invdist::parse_grid_spec(bd_grid).points();
        std::vector<double> local;
        for (double x : xs) local.push_back(invdist::local_variance(model, x));
        ordered_json j;
        j["model"] = model.label();
        j["nu"] = nu.to_string();
        j["bound"] = invdist::efficiency_bound(model, nu);
        j["xs"] = xs;
        j["local_bound"] = local;
        if (!bd_csv.empty()) {
            std::ofstream file;
            std::ostream& os = open_out(bd_csv, file);
            os << "x,local_bound\r\n";
            for (std::size_t i = 0; i < xs.size(); ++i) {
                os << invdist::csv::fmt(xs[i]) << ',' << invdist::csv::fmt(local[i]) << "\r\n";
            }
        }
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    if (*check_cond) {
        const auto model = cc_model.build();
        const auto spec = invdist::parse_estimator_spec(cc_weight);
        if (!spec.weight) throw ConfigError("check-conditions needs an unbiased estimator spec");
        const auto nu = invdist::parse_nu_spec(cc_nu);
        ordered_json j;
        j["model"] = model.label();
        j["estimator"] = spec.text;
        ordered_json cond1 = ordered_json::array();
        for (double x : parse_list(cc_xs)) {
            const auto r = invdist::check_cond1(*spec.weight, model, x);
            cond1.push_back({{"x", x},
                             {"ok", r.all()},
                             {"second_moment_finite", r.second_moment_finite},
                             {"abs_n_finite", r.abs_n_finite},
                             {"boundary_vanishes", r.boundary_vanishes},
                             {"second_moment", r.second_moment},
                             {"abs_n_moment", r.abs_n_moment}});
        }
        j["cond1"] = cond1;
        const auto q2 = invdist::check_Q2(model, nu);
        const auto q3 = invdist::check_Q3(*spec.weight, model, nu);
        j["Q2"] = {{"ok", q2.ok}, {"value", q2.value}, {"detail", q2.detail}};
        j["Q3"] = {{"ok", q3.ok}, {"value", q3.value}, {"detail", q3.detail}};
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    if (*experiment) {
        std::ifstream in(ex_config, std::ios::binary);
        if (!in) throw ConfigError("cannot read '" + ex_config + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        const auto cfg = invdist::parse_experiment_config(ss.str());
        const auto result = invdist::run_experiment(cfg);
        for (std::size_t i = 0; i < result.reports.size(); ++i) {
            std::cerr << result.reports[i].tag << ": ratio " << result.reports[i].ratio << " -> "
                      << result.csv_files[i] << '\n';
        }
        std::cerr << "wall-clock " << result.wall_seconds << " s\n";
        return 0;
    }
    if (*identities) {
        const auto model = id_model.build();
        const auto spec = invdist::parse_estimator_spec(id_weight);
        if (!spec.weight) throw ConfigError("identity-checks needs an unbiased estimator spec");
        const auto& wf = *spec.weight;
        double m_rel = 0.0;
        double ode = 0.0;
        double regroup = 0.0;
        for (int i = 0; i <= 20; ++i) {
            const double z = -3.0 + 0.3 * i;
            if (z == id_x) continue;
            const double a = invdist::m_direct(wf, model, id_x, z);
            const double b = invdist::m_closed(wf, model, id_x, z);
            m_rel = std::max(m_rel, std::abs(a - b) / std::max(std::abs(b), 1e-300));
            ode = std::max(ode, std::abs(invdist::ode_residual(wf, model, id_x, z + 0.05)));
            regroup = std::max(regroup, std::abs(invdist::M_func(wf, model, id_x, z) -
                                                 invdist::M_single_integral(wf, model, id_x, z)));
        }
        invdist::SimConfig cfg;
        cfg.horizon = id_T;
        cfg.dt = id_dt;
        cfg.seed = id_seed;
        cfg.store_wiener = true;
        const auto path = invdist::simulate_path(model, cfg);
        const auto rc = invdist::pathwise_representation_check(path, wf, model, id_x);
        ordered_json j;
        j["model"] = model.label();
        j["estimator"] = spec.text;
        j["x"] = id_x;
        j["m_direct_vs_closed_max_rel"] = m_rel;
        j["ode_residual_max"] = ode;
        j["M_regroup_max_abs"] = regroup;
        j["representation"] = {{"lhs", rc.lhs},
                               {"boundary", rc.boundary},
                               {"martingale", rc.martingale},
                               {"discrepancy", rc.discrepancy}};
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const invdist::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const invdist::BracketError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const invdist::SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << '\n';
        return 4;
    } catch (const invdist::Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

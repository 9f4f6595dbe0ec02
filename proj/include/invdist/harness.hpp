/**
 * @file harness.hpp
 * @brief Experiment configuration, orchestration and report files.
 *
 * Config (single JSON document):
 *
 *     {
 *       "model": {"family": "ou", "params": {"theta": 1, "sigma": 1}},
 *       "estimators": ["edf", "unbiased:exp:delta=1"],
 *       "sim": {"T": 100, "dt": 0.005, "seed": 20240611},
 *       "replications": 400,
 *       "nu": "gauss:0,1",
 *       "grid": {"lo": -5, "hi": 5, "count": 101},
 *       "output_dir": "out",
 *       "workers": 1
 *     }
 *
 * `nu`, `grid` and `workers` are optional. `workers` is a positive integer
 * or "auto"; when absent, INVDIST_WORKERS is consulted, then 1.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "invdist/efficiency.hpp"
#include "invdist/model.hpp"

namespace invdist {

struct GridSpec {
    double lo = -5.0;
    double hi = 5.0;
    std::size_t count = 101;

    std::vector<double> points() const;
};

/// Parses `lo:hi:count`.
GridSpec parse_grid_spec(const std::string& text);

struct ExperimentConfig {
    ModelSpec model;
    std::vector<std::string> estimators;
    double T = 100.0;
    double dt = 0.01;
    std::uint64_t seed = 0;
    std::size_t replications = 2;
    std::string nu = "gauss:0,1";
    GridSpec grid;
    std::string output_dir = ".";
    unsigned workers = 1;  ///< resolved; never 0

    /// Throws ConfigError listing every violated field.
    void validate() const;
};

/// Parses and validates a config document; all problems are reported together.
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// Worker count for a missing `workers` field: INVDIST_WORKERS if set and valid, else 1.
unsigned default_worker_count();

struct ExperimentResult {
    std::string version;
    ExperimentConfig config;
    std::vector<RiskReport> reports;
    std::vector<std::string> csv_files;  ///< one per report, same order
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> path_seeds;
    double wall_seconds = 0.0;  ///< not written to result.json
};

/// Runs every estimator on shared paths and writes result.json plus risk_<tag>.csv.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// result.json content; excludes wall-clock time so reruns are byte-identical.
std::string experiment_result_json(const ExperimentResult& result);

std::string artifact_version();

}  // namespace invdist

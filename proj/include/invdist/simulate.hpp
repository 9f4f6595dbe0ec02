/**
 * @file simulate.hpp
 * @brief Euler-Maruyama trajectories with a deterministic, splittable seeding contract.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "invdist/model.hpp"

namespace invdist {

struct StationaryInit {};
struct FixedInit {
    double x0 = 0.0;
};
using InitialCondition = std::variant<StationaryInit, FixedInit>;

struct SimConfig {
    double horizon = 1.0;  ///< T; redefined internally as n * dt with n = round(T / dt)
    double dt = 0.01;
    std::uint64_t seed = 0;
    InitialCondition init = StationaryInit{};
    bool store_wiener = false;
    double burn_in = 0.0;  ///< discarded lead-in time, fixed init only

    /// Number of Euler steps; throws ConfigError on invalid settings.
    std::size_t steps() const;
    void validate() const;
};

struct Path {
    double dt = 0.0;
    std::vector<double> values;                          ///< X(i dt), i = 0..n
    std::optional<std::vector<double>> wiener_increments;  ///< dW_i, i = 0..n-1
    std::uint64_t seed_used = 0;

    std::size_t steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
    double horizon() const noexcept { return dt * static_cast<double>(steps()); }
};

/// splitmix64-style stateless mix of (master, index); injective in index for a fixed master.
std::uint64_t derive_substream_seed(std::uint64_t master_seed, std::uint64_t replication_index);

/// Euler-Maruyama: X_{i+1} = X_i + S(X_i) dt + sigma(X_i) dW_i.
Path simulate_path(const DiffusionModel& model, const SimConfig& cfg);

/// Euler-Maruyama driven by given Wiener increments (kept on the result).
Path simulate_from_increments(const DiffusionModel& model, double x0, double dt,
                              std::span<const double> increments);

/// Sums consecutive pairs of increments: the same Brownian path on a grid of step 2 dt.
std::vector<double> coarsen_increments(std::span<const double> increments);

/// (1/n) sum_{i<n} g(X_i). Throws DomainEvaluationError on non-finite g.
double occupation_mean(const Path& path, const RealFunction& g);

/// Writes `t,x` (or `t,x,dW`) with one row per grid point; the last dW cell is empty.
void write_path_csv(std::ostream& os, const Path& path);

/// Reads the format written by write_path_csv.
Path read_path_csv(std::istream& is);

}  // namespace invdist

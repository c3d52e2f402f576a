#pragma once

#include "switching/experiment.hpp"

#include <memory>
#include <random>

namespace switching::testing {

/// Default discretization (mesh_edge 0.1, 200 intervals on [0, 10]) for N
/// components, built once per N and process.
inline const ExperimentSetup& default_setup(int components) {
    static std::map<int, ExperimentSetup> cache;
    auto it = cache.find(components);
    if (it == cache.end()) {
        RunConfig config;
        config.components = components;
        config.alpha = 1e-1;
        it = cache.emplace(components, build_setup(config)).first;
    }
    return it->second;
}

/// Small instance for dense comparisons.
inline ExperimentSetup small_setup(int intervals, int components, double mesh_edge = 0.25) {
    RunConfig config;
    config.components = components;
    config.alpha = 1e-2;
    config.time_intervals = intervals;
    config.mesh_edge = mesh_edge;
    return build_setup(config);
}

inline std::shared_ptr<const StateTrajectory> zero_target(const HeatSolver& heat) {
    return std::make_shared<StateTrajectory>(StateTrajectory::zero(heat.intervals() + 1, heat.vertices()));
}

inline TimeSeries random_series(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    TimeSeries out(rows, cols);
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out.data()[i] = normal(rng);
    return out;
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out[i] = normal(rng);
    return out;
}

} // namespace switching::testing

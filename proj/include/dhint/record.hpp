#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dhint/spatial.hpp"

namespace dhint {

enum class RunStatus { ok, non_convergence, blow_up };

struct NamedSeries {
    std::string name;
    std::vector<double> values;
    /// Decay rate used for the residual; absent for quantities without one.
    std::optional<double> rate;
};

/// Per-step scalar history of a run. Every series holds one entry per time
/// level 0..steps; the solver counters are aligned with the levels, entry n
/// counting the work of the step that produced level n (entry 0 is zero).
struct RunRecord {
    std::string model;
    std::string scheme;
    double dt = 0.0;
    std::size_t steps = 0;
    double printed_gamma = 0.0;
    std::vector<double> times;
    std::vector<NamedSeries> invariants;
    NamedSeries hamiltonian{"H_paper", {}, std::nullopt};
    /// Generator Hamiltonian when it differs from the reported one.
    std::optional<NamedSeries> generator;
    /// Re-anchored polarized energy of a two-step run, one entry per
    /// consecutive pair (u^n, u^{n+1}), so one fewer than the levels.
    std::optional<std::vector<double>> polarized_transformed;
    /// |H(e^{X1} u^{n+1}) - H(e^{X0} u^n)| of one-step exponential runs.
    std::optional<std::vector<double>> transformed_energy_jump;
    std::vector<int> newton_iterations;
    std::vector<int> linear_solves;
    /// Cost of computing u^1 for two-step kinds, kept out of the per-step counters.
    int bootstrap_newton_iterations = 0;
    int bootstrap_linear_solves = 0;
    Vector final_state;
    double wall_seconds = 0.0;
    RunStatus status = RunStatus::ok;
    std::string message;

    std::size_t levels() const noexcept { return times.size(); }
    const NamedSeries* find_invariant(const std::string& name) const;
};

}  // namespace dhint

#pragma once

#include "partopt/energy.hpp"

#include <array>
#include <cstdint>

namespace partopt {

enum class SegregationMode { Hard, Soft };

struct SolverConfig {
    int k = 2;
    double a = 0.1;
    int resolution = 64;
    std::uint64_t seed = 1;
    double step = 1e-5;                                     // initial gradient step, adapted online
    std::vector<double> beta_schedule{0.0};                 // segregation weights, increasing
    std::vector<double> eps_measure_schedule{1e-2, 3e-3, 1e-3};  // smoothing widths, decreasing
    double mu_safety = 2.0;                                 // factor applied to mu_threshold
    double mu_override = -1.0;                              // >= 0 pins μ (ablations)
    SegregationMode mode = SegregationMode::Hard;
    int max_outer = 9;
    int max_inner = 4000;
    double tol_energy = 1e-9;                               // relative stagnation tolerance
    double eps_support = 1e-3;                              // support threshold for measures

    void validate(double domain_measure) const;
};

struct SolverState {
    PhaseVector U;
    EnergyBreakdown breakdown;
    int outer_rounds = 0;
    long long inner_steps = 0;
    std::vector<double> energy_history;
    // One row per energy_history entry: dirichlet sum, measure penalty,
    // segregation penalty.
    std::vector<std::array<double, 3>> parts_history;
    double mu = 0.0, beta = 0.0, eps_measure = 1e-2;
    double step = 1e-5;
    long long backtrack_halvings = 0;
};

/// k seed bumps on Voronoi regions, hard-segregated, unit L² norm, total
/// support close to the budget a. Deterministic in (grid, k, seed, a).
PhaseVector initialize_phases(const DomainGrid& grid, int k, std::uint64_t seed, double a);

/// Hard mode: positive part, then at each cell only the max-magnitude phase
/// survives (ties to the lowest index), then each phase rescaled to unit L²
/// norm. Soft mode: positive part and rescale only.
PhaseVector project_constraints(const PhaseVector& U, SegregationMode mode);

/// One backtracking gradient step on the smoothed penalized energy followed by
/// the constraint projection. Throws after 30 rejected halvings.
void descent_step(const DomainGrid& grid, SolverState& state, const SolverConfig& config);

SolverState solve(const DomainGrid& grid, const SolverConfig& config);
SolverState solve_from(const DomainGrid& grid, const SolverConfig& config, PhaseVector initial);

}  // namespace partopt

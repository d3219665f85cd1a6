#pragma once

#include "partopt/grid.hpp"

namespace partopt {

/// k nonnegative phase fields sharing one grid, with the total volume budget a.
struct PhaseVector {
    int k = 0;
    double a = 0.0;
    std::vector<ScalarField> fields;
};

struct EnergyBreakdown {
    std::vector<double> dirichlet;     // per-phase Rayleigh quotients
    double measure_excess = 0.0;       // [Σ|Ω_i| - a]^+ from thresholded supports
    double measure_penalty = 0.0;      // μ × smoothed excess
    double segregation_penalty = 0.0;  // β Σ_{i<j} ∫ u_i² u_j²
    double total = 0.0;

    double dirichlet_sum() const {
        double s = 0.0;
        for (double d : dirichlet) s += d;
        return s;
    }
};

/// cell_volume × #{cells : |u| > eps_rel · ||u||_∞}.
double support_measure(const DomainGrid& grid, const ScalarField& u, double eps_rel);

/// Σ ∫ ρ_ε(u²) with ρ_ε(s) = min(s/ε², 1); converges to the support measure
/// from below as ε → 0 and is differentiable below saturation.
double smoothed_support_measure(const DomainGrid& grid, const ScalarField& u, double eps);

EnergyBreakdown penalized_energy(const DomainGrid& grid, const PhaseVector& U, double mu,
                                 double beta, double eps_measure, double eps_support_rel = 1e-3);

/// Penalty weight above which the penalized functional shares a minimizer with
/// the constrained one: ( 2^{(k-1)/2} c̃ a^{(2-N)/(2N)} / (N |B₁|^{1/N}) )².
double mu_threshold(double c_tilde, int N, double a, int k);

}  // namespace partopt

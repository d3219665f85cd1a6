#pragma once

#include "partopt/grid.hpp"

namespace partopt {

struct EigenResult {
    double lambda = 0.0;
    ScalarField eigenfunction;   // L2-normalized, nonnegative on connected subsets
    int iterations = 0;
    double residual = 0.0;       // || -Δ_h u - λ u ||_2
};

/// Smallest Dirichlet eigenpair of -Δ_h restricted to `subset` (a nonempty set
/// of interior cells), by inverse power iteration with conjugate-gradient
/// inner solves from a zero initial guess.
EigenResult smallest_dirichlet_eig(const DomainGrid& grid, const std::vector<std::uint8_t>& subset,
                                   double tol, double inner_tol = 1e-8, int max_iterations = 400);

/// dirichlet_energy(u) / ∫u²; scale invariant.
double rayleigh_quotient(const DomainGrid& grid, const ScalarField& u);

}  // namespace partopt

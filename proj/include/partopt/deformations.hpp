#pragma once

#include "partopt/energy.hpp"

namespace partopt {

/// û_i = u_i - Σ_{j≠i} u_j. For hard-segregated U, (û_i)^+ = u_i exactly.
ScalarField hat_transform(const PhaseVector& U, int i);

/// Truncation deformation: phase i becomes (u_i - tφ)^+ renormalized, the
/// other phases are untouched. Exactly preserves unit norms, support
/// inclusions and pairwise disjointness.
PhaseVector deform_simple(const PhaseVector& U, int i, const ScalarField& phi, double t);

/// Transfer deformation: phase i becomes (û_i + tφ)^+ renormalized, every
/// other phase j becomes (û_j - tφ)^+ renormalized. The receiving phase may
/// grow only into supp(φ); all other supports shrink; disjointness preserved.
PhaseVector deform_transfer(const PhaseVector& U, int i, const ScalarField& phi, double t);

struct ExpansionFit {
    double slope = 0.0;                 // fitted log-log order of the remainder
    std::vector<double> remainders;     // |LHS - first-order expansion| per t
};

/// Checks the second-order accuracy of
///   1/||(u + sign·tφ)^+||² = 1/||u^+||² - sign·(2t/||u^+||⁴)∫u^+φ + O(t²).
ExpansionFit expansion_check(const ScalarField& u, const ScalarField& phi,
                             const std::vector<double>& t_list, int sign = -1);

}  // namespace partopt

#pragma once

#include "partopt/eigensolver.hpp"
#include "partopt/energy.hpp"

namespace partopt {

struct PartitionResult {
    std::vector<std::vector<std::uint8_t>> supports;   // per-phase cell masks
    std::vector<int> components_per_phase;
    std::vector<double> measures;
    std::vector<double> lambdas;                       // re-solved on each support
    std::vector<ScalarField> eigenfunctions;
    double objective = 0.0;                            // Σ lambdas
    double rayleigh_gap = 0.0;                         // Σ quotients - Σ lambdas
    double saturation_gap = 0.0;                       // |Σ measures - a|
};

struct AuditReport {
    bool saturation_ok = false;
    bool connected_ok = false;
    bool disjoint_ok = false;
    bool faber_krahn_ok = false;
    bool subsolution_ok = false;
    bool eigen_residual_ok = false;
    // Numeric evidence behind each flag.
    double saturation_gap = 0.0;
    int max_components = 0;
    double overlap_measure = 0.0;
    double faber_krahn_bound = 0.0;     // Σ λ₁(ball of measure m_i)
    double objective = 0.0;
    double subsolution_margin = 0.0;    // min over hat tests of λ⟨u,φ⟩ - ⟨∇u,∇φ⟩
    double eigen_residual_max = 0.0;    // max over phases of residual / λ

    bool all_ok() const {
        return saturation_ok && connected_ok && disjoint_ok && faber_krahn_ok &&
               subsolution_ok && eigen_residual_ok;
    }
};

PartitionResult extract_partition(const DomainGrid& grid, const PhaseVector& U, double eps_rel);

AuditReport audit_partition(const DomainGrid& grid, const PartitionResult& result,
                            const PhaseVector& U, double a);

/// Caffarelli-Jerison-Kenig diagnostic ψ(r) for every phase pair i<j, one list
/// of radii values per pair, pairs ordered (0,1), (0,2), (1,2), ...
std::vector<std::vector<double>> cjk_diagnostic(const DomainGrid& grid, const PhaseVector& U,
                                                long long center_cell,
                                                const std::vector<double>& radii);

/// Count of face-connected components of a cell set.
int count_components(const DomainGrid& grid, const std::vector<std::uint8_t>& cells);

}  // namespace partopt

#pragma once

#include "partopt/optimizer.hpp"
#include "partopt/oracles.hpp"
#include "partopt/partition.hpp"

#include <string>

namespace partopt {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ShapeSpec shape;
    SolverConfig solver;
    int restarts = 1;
};

/// Line-based "key = value" config. Unknown and duplicate keys are rejected.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

/// Field dump: mask-file header, then cell values in row-major order with 17
/// significant digits, so a write/read round trip is bitwise exact.
void write_field(const ScalarField& u, const std::string& path);
ScalarField read_field(const DomainGrid& grid, const std::string& path);

struct RunManifest {
    std::string config_echo;
    std::uint64_t seed = 0;
    std::vector<double> per_seed_objectives;
    int outer_rounds = 0;
    long long inner_steps = 0;
    long long backtrack_halvings = 0;
    EnergyBreakdown breakdown;
    PartitionResult partition;
    AuditReport audit;
    bool has_oracle = false;
    BallPrediction oracle;
    double oracle_gap = 0.0;            // relative gap vs the equal-ball total
    double symmetry_defect = 0.0;       // Σ_i ||u_i - u_i∘reflect||₂ across axis 0
};

/// Runs the solver (with restarts), extracts and audits the partition, and
/// writes manifest.txt, phase_<i>.field, support.ppm and history.csv.
RunManifest run_experiment(const RunConfig& config, const std::string& out_dir);

/// Loads phase_<i>.field dumps from a directory and audits them.
RunManifest audit_only(const RunConfig& config, const std::string& fields_dir,
                       const std::string& out_dir);

void write_manifest(const RunManifest& m, const std::string& path);
void write_support_raster(const DomainGrid& grid, const PartitionResult& part,
                          const std::string& path);
void write_history(const std::vector<double>& history,
                   const std::vector<std::array<double, 3>>& parts, const std::string& path);

}  // namespace partopt

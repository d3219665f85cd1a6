#include "partopt/partition.hpp"

#include "partopt/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace partopt {

int count_components(const DomainGrid& g, const std::vector<std::uint8_t>& cells) {
    std::vector<std::uint8_t> seen(cells.size(), 0);
    int components = 0;
    const int d[6][3] = {{-1,0,0},{1,0,0},{0,-1,0},{0,1,0},{0,0,-1},{0,0,1}};
    for (long long start = 0; start < g.ncells(); ++start) {
        if (!cells[start] || seen[start]) continue;
        ++components;
        std::queue<long long> q;
        seen[start] = 1;
        q.push(start);
        while (!q.empty()) {
            long long c = q.front();
            q.pop();
            int ix, iy, iz;
            g.cell_coords(c, ix, iy, iz);
            for (int f = 0; f < 2 * g.dim; ++f) {
                int jx = ix + d[f][0], jy = iy + d[f][1], jz = iz + d[f][2];
                if (!g.in_bounds(jx, jy, jz)) continue;
                long long nb = g.cell_index(jx, jy, jz);
                if (cells[nb] && !seen[nb]) { seen[nb] = 1; q.push(nb); }
            }
        }
    }
    return components;
}

PartitionResult extract_partition(const DomainGrid& g, const PhaseVector& U, double eps_rel) {
    PartitionResult r;
    double quotient_sum = 0.0;
    for (int i = 0; i < U.k; ++i) {
        const ScalarField& u = U.fields[i];
        double cutoff = eps_rel * max_abs(u);
        std::vector<std::uint8_t> supp(static_cast<std::size_t>(g.ncells()), 0);
        long long count = 0;
        for (long long c = 0; c < g.ncells(); ++c)
            if (std::abs(u[c]) > cutoff && u[c] != 0.0) { supp[c] = 1; ++count; }
        if (count == 0) throw std::runtime_error("extract_partition: phase has empty support");
        r.components_per_phase.push_back(count_components(g, supp));
        r.measures.push_back(static_cast<double>(count) * g.cell_volume());
        EigenResult eig = smallest_dirichlet_eig(g, supp, 1e-9, 1e-11, 600);
        r.lambdas.push_back(eig.lambda);
        r.eigenfunctions.push_back(std::move(eig.eigenfunction));
        r.supports.push_back(std::move(supp));
        quotient_sum += rayleigh_quotient(g, u);
        r.objective += r.lambdas.back();
    }
    r.rayleigh_gap = quotient_sum - r.objective;
    double total_measure = 0.0;
    for (double m : r.measures) total_measure += m;
    r.saturation_gap = std::abs(total_measure - U.a);
    return r;
}

AuditReport audit_partition(const DomainGrid& g, const PartitionResult& result,
                            const PhaseVector& U, double a) {
    AuditReport rep;
    rep.objective = result.objective;
    double total_measure = 0.0;
    for (double m : result.measures) total_measure += m;
    rep.saturation_gap = std::abs(total_measure - a);
    rep.saturation_ok = rep.saturation_gap <= 0.02 * a;

    rep.max_components = 0;
    for (int c : result.components_per_phase) rep.max_components = std::max(rep.max_components, c);
    rep.connected_ok = rep.max_components == 1;

    // Exact pairwise disjointness of the extracted supports.
    long long overlap = 0;
    for (std::size_t i = 0; i < result.supports.size(); ++i)
        for (std::size_t j = i + 1; j < result.supports.size(); ++j)
            for (long long c = 0; c < g.ncells(); ++c)
                overlap += (result.supports[i][c] && result.supports[j][c]);
    rep.overlap_measure = static_cast<double>(overlap) * g.cell_volume();
    rep.disjoint_ok = overlap == 0;

    rep.faber_krahn_bound = 0.0;
    for (double m : result.measures) {
        double r_ball = std::pow(m / unit_ball_volume(g.dim), 1.0 / g.dim);
        rep.faber_krahn_bound += ball_lambda1(g.dim, r_ball);
    }
    rep.faber_krahn_ok = result.objective >= rep.faber_krahn_bound * (1.0 - 0.05);

    // Subsolution and interior eigen-equation residuals on the re-solved
    // eigenpairs. The nonnegative test family is the discrete hat basis:
    // φ = indicator of a cell, so λ⟨u,φ⟩ - ⟨∇u,∇φ⟩ = h^N (λ u_c - (-Δ_h u)_c).
    double lambda_max = 0.0;
    for (double l : result.lambdas) lambda_max = std::max(lambda_max, l);
    double margin = std::numeric_limits<double>::infinity();
    double worst_residual = 0.0;
    for (std::size_t i = 0; i < result.eigenfunctions.size(); ++i) {
        const ScalarField& u = result.eigenfunctions[i];
        const double lambda = result.lambdas[i];
        ScalarField Au(g);
        neg_laplacian_apply(g, {}, u, Au);
        for (long long c = 0; c < g.ncells(); ++c) {
            if (!g.mask[c]) continue;
            margin = std::min(margin, g.cell_volume() * (lambda * u[c] - Au[c]));
        }
        // Residual over cells of the support whose face neighbors all belong
        // to it (the discrete interior of {u_i > 0}).
        const auto& supp = result.supports[i];
        double r2 = g.cell_volume() * g.reduce([&](long long c) {
            if (!supp[c]) return 0.0;
            int ix, iy, iz;
            g.cell_coords(c, ix, iy, iz);
            const int d[6][3] = {{-1,0,0},{1,0,0},{0,-1,0},{0,1,0},{0,0,-1},{0,0,1}};
            for (int f = 0; f < 2 * g.dim; ++f) {
                int jx = ix + d[f][0], jy = iy + d[f][1], jz = iz + d[f][2];
                if (!g.in_bounds(jx, jy, jz) || !supp[g.cell_index(jx, jy, jz)]) return 0.0;
            }
            double res = Au[c] - lambda * u[c];
            return res * res;
        });
        worst_residual = std::max(worst_residual, std::sqrt(r2) / lambda);
    }
    rep.subsolution_margin = margin;
    rep.subsolution_ok = margin >= -1e-6 * lambda_max;
    rep.eigen_residual_max = worst_residual;
    rep.eigen_residual_ok = worst_residual <= 1e-4;
    (void)U;
    return rep;
}

std::vector<std::vector<double>> cjk_diagnostic(const DomainGrid& g, const PhaseVector& U,
                                                long long center_cell,
                                                const std::vector<double>& radii) {
    if (center_cell < 0 || center_cell >= g.ncells())
        throw std::invalid_argument("cjk_diagnostic: center cell out of range");
    for (double r : radii)
        if (r < 2.0 * g.h) throw std::invalid_argument("cjk_diagnostic: radius below 2h");
    const auto x0 = g.cell_center(center_cell);

    // Per-cell gradient energy density: each face contributes half of its
    // squared difference to both adjacent cells.
    auto density = [&](const ScalarField& u, long long c) {
        int ix, iy, iz;
        g.cell_coords(c, ix, iy, iz);
        const double uc = u[c];
        auto face = [&](int jx, int jy, int jz) {
            if (!g.inside(jx, jy, jz)) {
                double d = uc;  // zero Dirichlet value on the far side
                return 0.5 * d * d;
            }
            double d = uc - u[g.cell_index(jx, jy, jz)];
            return 0.5 * d * d;
        };
        double s = face(ix - 1, iy, iz) + face(ix + 1, iy, iz) + face(ix, iy - 1, iz) +
                   face(ix, iy + 1, iz);
        if (g.dim == 3) s += face(ix, iy, iz - 1) + face(ix, iy, iz + 1);
        return s / (g.h * g.h);
    };

    // Singular weight |x - x0|^{2-N}; in 3D the center cell uses the midpoint
    // cell-average of the weight, keeping the quadrature finite.
    auto weight = [&](long long c) {
        if (g.dim == 2) return 1.0;
        if (c != center_cell) {
            auto p = g.cell_center(c);
            double d = std::sqrt((p[0] - x0[0]) * (p[0] - x0[0]) + (p[1] - x0[1]) * (p[1] - x0[1]) +
                                 (p[2] - x0[2]) * (p[2] - x0[2]));
            return 1.0 / d;
        }
        double avg = 0.0;
        const int q = 5;
        for (int az = 0; az < q; ++az)
            for (int ay = 0; ay < q; ++ay)
                for (int ax = 0; ax < q; ++ax) {
                    double dx = ((ax + 0.5) / q - 0.5) * g.h;
                    double dy = ((ay + 0.5) / q - 0.5) * g.h;
                    double dz = ((az + 0.5) / q - 0.5) * g.h;
                    avg += 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
                }
        return avg / (q * q * q);
    };

    auto weighted_energy = [&](const ScalarField& u, double r) {
        return g.cell_volume() * g.reduce([&](long long c) {
            if (!g.mask[c]) return 0.0;
            auto p = g.cell_center(c);
            double d2 = 0.0;
            for (int dd = 0; dd < g.dim; ++dd) d2 += (p[dd] - x0[dd]) * (p[dd] - x0[dd]);
            if (d2 >= r * r) return 0.0;
            double dens = density(u, c);
            return dens == 0.0 ? 0.0 : dens * weight(c);
        });
    };

    std::vector<std::vector<double>> out;
    for (int i = 0; i < U.k; ++i)
        for (int j = i + 1; j < U.k; ++j) {
            std::vector<double> psi;
            for (double r : radii) {
                double ei = weighted_energy(U.fields[i], r) / (r * r);
                double ej = weighted_energy(U.fields[j], r) / (r * r);
                psi.push_back(ei * ej);
            }
            out.push_back(std::move(psi));
        }
    return out;
}

}  // namespace partopt

#include "partopt/grid.hpp"

#include <fstream>
#include <iostream>
#include <queue>
#include <sstream>

namespace partopt {

void DomainGrid::finalize() {
    if (dim != 2 && dim != 3) throw std::invalid_argument("grid dimension must be 2 or 3");
    if (h <= 0.0) throw std::invalid_argument("grid spacing must be positive");
    if (dim == 2 && n[2] != 1) throw std::invalid_argument("2D grid must have n[2] == 1");
    if (static_cast<long long>(mask.size()) != ncells())
        throw std::invalid_argument("mask size does not match cell count");
    interior = 0;
    for (auto m : mask) interior += (m != 0);
    if (interior == 0) throw std::invalid_argument("domain has no interior cells");
}

bool DomainGrid::interior_connected() const {
    long long start = -1;
    for (long long c = 0; c < ncells(); ++c)
        if (mask[c]) { start = c; break; }
    if (start < 0) return false;
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::queue<long long> q;
    seen[start] = 1;
    q.push(start);
    long long count = 0;
    while (!q.empty()) {
        long long c = q.front();
        q.pop();
        ++count;
        int ix, iy, iz;
        cell_coords(c, ix, iy, iz);
        const int d[6][3] = {{-1,0,0},{1,0,0},{0,-1,0},{0,1,0},{0,0,-1},{0,0,1}};
        for (int f = 0; f < 2 * dim; ++f) {
            int jx = ix + d[f][0], jy = iy + d[f][1], jz = iz + d[f][2];
            if (!inside(jx, jy, jz)) continue;
            long long nb = cell_index(jx, jy, jz);
            if (!seen[nb]) { seen[nb] = 1; q.push(nb); }
        }
    }
    return count == interior;
}

DomainGrid build_domain(const ShapeSpec& spec, int resolution) {
    if (spec.kind == ShapeSpec::Kind::MaskFile) return read_mask_file(spec.path);
    if (resolution < 8) throw std::invalid_argument("resolution must be at least 8 cells per unit length");

    DomainGrid g;
    g.h = 1.0 / resolution;
    if (spec.kind == ShapeSpec::Kind::Rectangle) {
        if (spec.lengths.size() != 2 && spec.lengths.size() != 3)
            throw std::invalid_argument("rectangle needs 2 or 3 edge lengths");
        g.dim = static_cast<int>(spec.lengths.size());
        for (int d = 0; d < g.dim; ++d) {
            if (spec.lengths[d] <= 0.0) throw std::invalid_argument("rectangle edge lengths must be positive");
            g.n[d] = static_cast<int>(std::lround(spec.lengths[d] * resolution));
            if (g.n[d] < 1) throw std::invalid_argument("resolution too coarse for rectangle edge");
        }
        g.mask.assign(static_cast<std::size_t>(g.ncells()), 1);
    } else {
        if (spec.radius <= 0.0) throw std::invalid_argument("disk radius must be positive");
        double box = spec.box > 0.0 ? spec.box : 2.0 * spec.radius;
        if (box < 2.0 * spec.radius) throw std::invalid_argument("disk does not fit in its box");
        g.dim = 2;
        g.n[0] = g.n[1] = static_cast<int>(std::lround(box * resolution));
        g.mask.assign(static_cast<std::size_t>(g.ncells()), 0);
        const double cx = 0.5 * g.n[0] * g.h, cy = 0.5 * g.n[1] * g.h;
        const double r2 = spec.radius * spec.radius;
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix) {
                double dx = (ix + 0.5) * g.h - cx, dy = (iy + 0.5) * g.h - cy;
                if (dx * dx + dy * dy < r2) g.mask[g.cell_index(ix, iy)] = 1;
            }
    }
    g.finalize();
    if (!g.interior_connected())
        throw std::invalid_argument("resolution too coarse: interior is disconnected");
    return g;
}

DomainGrid read_mask_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open mask file: " + path);
    DomainGrid g;
    in >> g.dim;
    if (g.dim != 2 && g.dim != 3) throw std::invalid_argument("mask file: dimension must be 2 or 3");
    for (int d = 0; d < g.dim; ++d) in >> g.n[d];
    in >> g.h;
    if (!in) throw std::invalid_argument("mask file: malformed header");
    g.mask.assign(static_cast<std::size_t>(g.ncells()), 0);
    for (long long c = 0; c < g.ncells(); ++c) {
        int flag;
        in >> flag;
        if (!in) throw std::invalid_argument("mask file: too few cell flags");
        g.mask[c] = flag ? 1 : 0;
    }
    g.finalize();
    if (!g.interior_connected())
        std::cerr << "warning: mask interior is disconnected\n";
    return g;
}

void write_mask_file(const DomainGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write mask file: " + path);
    out << grid.dim;
    for (int d = 0; d < grid.dim; ++d) out << ' ' << grid.n[d];
    out << ' ' << grid.h << '\n';
    for (int iz = 0; iz < grid.n[2]; ++iz)
        for (int iy = 0; iy < grid.n[1]; ++iy) {
            for (int ix = 0; ix < grid.n[0]; ++ix)
                out << (ix ? " " : "") << int(grid.mask[grid.cell_index(ix, iy, iz)]);
            out << '\n';
        }
}

namespace {

// Neighbor value as seen by the stencil. Outside the mask the boundary sits on
// the shared face, enforced by the reflected ghost value -u_c; a neighbor that
// is interior but outside the subset contributes a plain zero at its center.
inline double stencil_fetch(const DomainGrid& g, const std::vector<std::uint8_t>& subset,
                            const ScalarField& u, double uc, int ix, int iy, int iz) {
    if (!g.in_bounds(ix, iy, iz)) return -uc;
    long long nb = g.cell_index(ix, iy, iz);
    if (!g.mask[nb]) return -uc;
    if (!subset.empty() && !subset[nb]) return -uc;
    return u[nb];
}

}  // namespace

void neg_laplacian_apply(const DomainGrid& g, const std::vector<std::uint8_t>& subset,
                         const ScalarField& u, ScalarField& out) {
    if (u.grid != &g || out.grid != &g) throw std::invalid_argument("field/grid mismatch");
    if (!subset.empty() && static_cast<long long>(subset.size()) != g.ncells())
        throw std::invalid_argument("subset size mismatch");
    const double inv_h2 = 1.0 / (g.h * g.h);
    const int deg = 2 * g.dim;
    for (long long c = 0; c < g.ncells(); ++c) {
        bool active = g.mask[c] && (subset.empty() || subset[c]);
        if (!active) { out[c] = 0.0; continue; }
        int ix, iy, iz;
        g.cell_coords(c, ix, iy, iz);
        const double uc = u[c];
        double sx = stencil_fetch(g, subset, u, uc, ix - 1, iy, iz) +
                    stencil_fetch(g, subset, u, uc, ix + 1, iy, iz);
        double sy = stencil_fetch(g, subset, u, uc, ix, iy - 1, iz) +
                    stencil_fetch(g, subset, u, uc, ix, iy + 1, iz);
        double s = sx + sy;
        if (g.dim == 3)
            s += stencil_fetch(g, subset, u, uc, ix, iy, iz - 1) +
                 stencil_fetch(g, subset, u, uc, ix, iy, iz + 1);
        out[c] = (deg * uc - s) * inv_h2;
    }
}

ScalarField laplacian_apply(const DomainGrid& g, const ScalarField& u) {
    ScalarField out(g);
    neg_laplacian_apply(g, {}, u, out);
    return out;
}

double dirichlet_energy(const DomainGrid& g, const ScalarField& u) {
    if (u.grid != &g) throw std::invalid_argument("field/grid mismatch");
    // Interior-interior faces contribute (u_a - u_b)^2, split half to each side;
    // mask-boundary faces contribute 2 u_c^2 (zero on the face at half spacing),
    // matching <-Δ_h u, u> h^N exactly.
    auto face = [&](double uc, int ix, int iy, int iz) {
        if (!g.inside(ix, iy, iz)) return 2.0 * uc * uc;
        double d = uc - u[g.cell_index(ix, iy, iz)];
        return 0.5 * d * d;
    };
    double sum = g.reduce([&](long long c) {
        if (!g.mask[c]) return 0.0;
        int ix, iy, iz;
        g.cell_coords(c, ix, iy, iz);
        const double uc = u[c];
        double sx = face(uc, ix - 1, iy, iz) + face(uc, ix + 1, iy, iz);
        double sy = face(uc, ix, iy - 1, iz) + face(uc, ix, iy + 1, iz);
        double s = sx + sy;
        if (g.dim == 3) s += face(uc, ix, iy, iz - 1) + face(uc, ix, iy, iz + 1);
        return s;
    });
    return sum * std::pow(g.h, g.dim - 2);
}

double integrate(const DomainGrid& g, const ScalarField& u) {
    return g.cell_volume() * g.reduce([&](long long c) { return u[c]; });
}

double dot_l2(const ScalarField& a, const ScalarField& b) {
    const DomainGrid& g = *a.grid;
    if (b.grid != &g) throw std::invalid_argument("field/grid mismatch");
    return g.cell_volume() * g.reduce([&](long long c) { return a[c] * b[c]; });
}

double norm_l2_sq(const ScalarField& u) { return dot_l2(u, u); }

double norm_l2(const ScalarField& u) { return std::sqrt(norm_l2_sq(u)); }

double max_abs(const ScalarField& u) {
    double m = 0.0;
    for (double x : u.v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace partopt

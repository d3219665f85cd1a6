#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace partopt {

/// Uniform Cartesian grid over a box, with an interior mask.
/// Cells outside the mask act as zero-Dirichlet exterior in every operator.
struct DomainGrid {
    int dim = 2;                      // 2 or 3
    std::array<int, 3> n{1, 1, 1};    // cell counts per axis, n[2] == 1 in 2D
    double h = 0.0;                   // grid spacing
    std::vector<std::uint8_t> mask;   // 1 = interior cell
    long long interior = 0;

    long long ncells() const { return static_cast<long long>(n[0]) * n[1] * n[2]; }
    double cell_volume() const { return std::pow(h, dim); }
    double domain_measure() const { return static_cast<double>(interior) * cell_volume(); }

    long long cell_index(int ix, int iy, int iz = 0) const {
        return (static_cast<long long>(iz) * n[1] + iy) * n[0] + ix;
    }
    void cell_coords(long long c, int& ix, int& iy, int& iz) const {
        ix = static_cast<int>(c % n[0]);
        iy = static_cast<int>((c / n[0]) % n[1]);
        iz = static_cast<int>(c / (static_cast<long long>(n[0]) * n[1]));
    }
    std::array<double, 3> cell_center(long long c) const {
        int ix, iy, iz;
        cell_coords(c, ix, iy, iz);
        return {(ix + 0.5) * h, (iy + 0.5) * h, dim == 3 ? (iz + 0.5) * h : 0.0};
    }
    bool in_bounds(int ix, int iy, int iz) const {
        return ix >= 0 && ix < n[0] && iy >= 0 && iy < n[1] && iz >= 0 && iz < n[2];
    }
    bool inside(int ix, int iy, int iz) const {
        return in_bounds(ix, iy, iz) && mask[cell_index(ix, iy, iz)] != 0;
    }

    // Validates invariants and counts interior cells. Throws on an empty interior.
    void finalize();
    bool interior_connected() const;

    // Sum of f(cell) over all cells, accumulated with axis-symmetric pairing so
    // that reflecting the integrand across any axis midplane yields the exact
    // same floating-point value. All global reductions go through here.
    template <class F>
    double reduce(F&& f) const {
        const int nx = n[0], ny = n[1], nz = n[2];
        auto line = [&](int iy, int iz) {
            double s = 0.0;
            for (int ix = 0; ix < nx / 2; ++ix)
                s += f(cell_index(ix, iy, iz)) + f(cell_index(nx - 1 - ix, iy, iz));
            if (nx & 1) s += f(cell_index(nx / 2, iy, iz));
            return s;
        };
        auto plane = [&](int iz) {
            double s = 0.0;
            for (int iy = 0; iy < ny / 2; ++iy) s += line(iy, iz) + line(ny - 1 - iy, iz);
            if (ny & 1) s += line(ny / 2, iz);
            return s;
        };
        double s = 0.0;
        for (int iz = 0; iz < nz / 2; ++iz) s += plane(iz) + plane(nz - 1 - iz);
        if (nz & 1) s += plane(nz / 2);
        return s;
    }
};

/// One real value per cell; identically zero on exterior cells by convention.
struct ScalarField {
    const DomainGrid* grid = nullptr;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const DomainGrid& g) : grid(&g), v(static_cast<std::size_t>(g.ncells()), 0.0) {}

    double& operator[](long long c) { return v[static_cast<std::size_t>(c)]; }
    double operator[](long long c) const { return v[static_cast<std::size_t>(c)]; }
};

struct ShapeSpec {
    enum class Kind { Rectangle, Disk, MaskFile };
    Kind kind = Kind::Rectangle;
    std::vector<double> lengths;   // rectangle edge lengths
    double radius = 0.0;           // disk
    double box = 0.0;              // disk bounding box edge (0 -> 2*radius)
    std::string path;              // mask file
};

DomainGrid build_domain(const ShapeSpec& spec, int resolution);

DomainGrid read_mask_file(const std::string& path);
void write_mask_file(const DomainGrid& grid, const std::string& path);

/// Negative discrete Laplacian -Δ_h u with zero-Dirichlet exterior.
/// Faces to cells outside the mask, or to interior cells excluded by `subset`,
/// see the boundary halfway to the neighbor center (ghost value -u), which
/// keeps eigenvalues second-order accurate. `subset` empty means the full
/// interior.
void neg_laplacian_apply(const DomainGrid& grid, const std::vector<std::uint8_t>& subset,
                         const ScalarField& u, ScalarField& out);
ScalarField laplacian_apply(const DomainGrid& grid, const ScalarField& u);

/// Sum of squared face differences times h^{N-2}; equals <-Δ_h u, u> h^N.
double dirichlet_energy(const DomainGrid& grid, const ScalarField& u);

double integrate(const DomainGrid& grid, const ScalarField& u);
double dot_l2(const ScalarField& a, const ScalarField& b);   // ∫ a b
double norm_l2_sq(const ScalarField& u);                     // ∫ u²
double norm_l2(const ScalarField& u);
double max_abs(const ScalarField& u);

}  // namespace partopt

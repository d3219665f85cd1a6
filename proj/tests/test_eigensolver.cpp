#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "partopt/eigensolver.hpp"
#include "partopt/oracles.hpp"

#include <cmath>
#include <random>

using namespace partopt;

namespace {

DomainGrid unit_square(int res) {
    ShapeSpec s;
    s.kind = ShapeSpec::Kind::Rectangle;
    s.lengths = {1.0, 1.0};
    return build_domain(s, res);
}

std::vector<std::uint8_t> full_interior(const DomainGrid& g) {
    return std::vector<std::uint8_t>(g.mask.begin(), g.mask.end());
}

}  // namespace

TEST_CASE("unit square ground state") {
    DomainGrid g = unit_square(64);
    EigenResult e = smallest_dirichlet_eig(g, full_interior(g), 1e-7);
    double sq[2] = {1.0, 1.0};
    CHECK(e.lambda == doctest::Approx(box_lambda1(sq, 2)).epsilon(0.01));
    CHECK(e.residual <= 1e-7 * e.lambda);
    CHECK(norm_l2(e.eigenfunction) == doctest::Approx(1.0).epsilon(1e-12));
    for (long long c = 0; c < g.ncells(); ++c) CHECK(e.eigenfunction[c] >= -1e-12);
}

TEST_CASE("unit disk ground state") {
    ShapeSpec s;
    s.kind = ShapeSpec::Kind::Disk;
    s.radius = 1.0;
    DomainGrid g = build_domain(s, 64);
    EigenResult e = smallest_dirichlet_eig(g, full_interior(g), 1e-7);
    CHECK(e.lambda == doctest::Approx(ball_lambda1(2, 1.0)).epsilon(0.02));
}

TEST_CASE("single interior cell has lambda 4N/h^2") {
    // each face sees a ghost boundary halfway to the neighbor: (2N + 2N)/h²
    DomainGrid g = unit_square(16);
    std::vector<std::uint8_t> subset(g.ncells(), 0);
    subset[g.cell_index(8, 8)] = 1;
    EigenResult e = smallest_dirichlet_eig(g, subset, 1e-12);
    CHECK(e.lambda == doctest::Approx(8.0 / (g.h * g.h)).epsilon(1e-12));
    CHECK(e.residual <= 1e-10);
}

TEST_CASE("empty subset is rejected") {
    DomainGrid g = unit_square(16);
    std::vector<std::uint8_t> subset(g.ncells(), 0);
    CHECK_THROWS_AS(smallest_dirichlet_eig(g, subset, 1e-8), std::invalid_argument);
}

TEST_CASE("rayleigh quotient properties") {
    DomainGrid g = unit_square(48);
    EigenResult e = smallest_dirichlet_eig(g, full_interior(g), 1e-8);
    CHECK(rayleigh_quotient(g, e.eigenfunction) == doctest::Approx(e.lambda).epsilon(1e-8));

    ScalarField scaled(g);
    for (long long c = 0; c < g.ncells(); ++c) scaled[c] = 5.0 * e.eigenfunction[c];
    CHECK(rayleigh_quotient(g, scaled) == doctest::Approx(e.lambda).epsilon(1e-13));

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    ScalarField r(g);
    for (long long c = 0; c < g.ncells(); ++c)
        if (g.mask[c]) r[c] = unif(rng);
    CHECK(rayleigh_quotient(g, r) >= e.lambda * (1.0 - 1e-12));

    ScalarField z(g);
    CHECK_THROWS_AS(rayleigh_quotient(g, z), std::invalid_argument);
}

TEST_CASE("domain monotonicity on nested squares") {
    DomainGrid g = unit_square(48);
    std::vector<std::uint8_t> inner(g.ncells(), 0), outer(g.ncells(), 0);
    for (int iy = 0; iy < g.n[1]; ++iy)
        for (int ix = 0; ix < g.n[0]; ++ix) {
            if (ix >= 8 && ix < 40 && iy >= 8 && iy < 40) outer[g.cell_index(ix, iy)] = 1;
            if (ix >= 14 && ix < 34 && iy >= 14 && iy < 34) inner[g.cell_index(ix, iy)] = 1;
        }
    double li = smallest_dirichlet_eig(g, inner, 1e-8).lambda;
    double lo = smallest_dirichlet_eig(g, outer, 1e-8).lambda;
    CHECK(li >= lo);
}

TEST_CASE("disk eigenvalue scaling law") {
    auto lambda_disk = [](double r) {
        ShapeSpec s;
        s.kind = ShapeSpec::Kind::Disk;
        s.radius = r;
        DomainGrid g = build_domain(s, 96);
        std::vector<std::uint8_t> subset(g.mask.begin(), g.mask.end());
        return smallest_dirichlet_eig(g, subset, 1e-7).lambda;
    };
    double l1 = lambda_disk(1.0), lh = lambda_disk(0.5);
    CHECK(lh == doctest::Approx(4.0 * l1).epsilon(0.02));
}

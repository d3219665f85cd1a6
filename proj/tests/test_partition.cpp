#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "partopt/oracles.hpp"
#include "partopt/partition.hpp"

#include <cmath>

using namespace partopt;

namespace {

DomainGrid unit_square(int res) {
    ShapeSpec s;
    s.kind = ShapeSpec::Kind::Rectangle;
    s.lengths = {1.0, 1.0};
    return build_domain(s, res);
}

std::vector<std::uint8_t> box_subset(const DomainGrid& g, int x0, int x1, int y0, int y1) {
    std::vector<std::uint8_t> s(g.ncells(), 0);
    for (int iy = y0; iy < y1; ++iy)
        for (int ix = x0; ix < x1; ++ix) s[g.cell_index(ix, iy)] = 1;
    return s;
}

std::vector<std::uint8_t> disk_subset(const DomainGrid& g, double cx, double cy, double r) {
    std::vector<std::uint8_t> s(g.ncells(), 0);
    for (long long c = 0; c < g.ncells(); ++c) {
        auto p = g.cell_center(c);
        double d2 = (p[0] - cx) * (p[0] - cx) + (p[1] - cy) * (p[1] - cy);
        if (d2 < r * r) s[c] = 1;
    }
    return s;
}

PhaseVector eig_phases(const DomainGrid& g, const std::vector<std::vector<std::uint8_t>>& subsets,
                       double a) {
    PhaseVector U;
    U.k = static_cast<int>(subsets.size());
    U.a = a;
    for (const auto& s : subsets)
        U.fields.push_back(smallest_dirichlet_eig(g, s, 1e-10, 1e-12).eigenfunction);
    return U;
}

}  // namespace

TEST_CASE("component counting") {
    DomainGrid g = unit_square(32);
    std::vector<std::uint8_t> empty(g.ncells(), 0);
    CHECK(count_components(g, empty) == 0);
    auto one = box_subset(g, 4, 10, 4, 10);
    CHECK(count_components(g, one) == 1);
    auto two = one;
    for (long long c = 0; c < g.ncells(); ++c)
        if (box_subset(g, 20, 26, 20, 26)[c]) two[c] = 1;
    CHECK(count_components(g, two) == 2);
    // diagonal adjacency does not connect
    std::vector<std::uint8_t> diag(g.ncells(), 0);
    diag[g.cell_index(3, 3)] = 1;
    diag[g.cell_index(4, 4)] = 1;
    CHECK(count_components(g, diag) == 2);
}

TEST_CASE("extraction on two disjoint sub-squares") {
    DomainGrid g = unit_square(64);
    int n = g.n[0];
    auto s0 = box_subset(g, n / 8, 3 * n / 8, n / 4, n / 2);
    auto s1 = box_subset(g, 5 * n / 8, 7 * n / 8, n / 4, n / 2);
    double m0 = 0.0, m1 = 0.0;
    for (long long c = 0; c < g.ncells(); ++c) {
        m0 += s0[c] ? g.cell_volume() : 0.0;
        m1 += s1[c] ? g.cell_volume() : 0.0;
    }
    PhaseVector U = eig_phases(g, {s0, s1}, m0 + m1);

    PartitionResult pr = extract_partition(g, U, 1e-6);
    REQUIRE(pr.supports.size() == 2);
    CHECK(pr.measures[0] == doctest::Approx(m0).epsilon(1e-14));
    CHECK(pr.measures[1] == doctest::Approx(m1).epsilon(1e-14));
    CHECK(pr.components_per_phase[0] == 1);
    CHECK(pr.components_per_phase[1] == 1);
    CHECK(pr.saturation_gap == doctest::Approx(0.0).epsilon(1e-12));

    // supports end at cell faces, so the re-solved eigenvalue sits above the
    // free-grid Rayleigh quotient of the zero-extended input by an O(h) edge
    // term, but stays within the same ballpark
    double qsum = 0.0;
    for (int i = 0; i < 2; ++i) {
        double q = rayleigh_quotient(g, U.fields[i]);
        qsum += q;
        CHECK(pr.lambdas[i] >= q * (1.0 - 1e-9));
        CHECK(pr.lambdas[i] <= q * 1.25);
    }
    CHECK(pr.objective == doctest::Approx(pr.lambdas[0] + pr.lambdas[1]).epsilon(1e-14));
    CHECK(pr.rayleigh_gap == doctest::Approx(qsum - pr.objective).epsilon(1e-12));
}

TEST_CASE("audit accepts a clean two-ball configuration") {
    DomainGrid g = unit_square(64);
    auto s0 = disk_subset(g, 0.27, 0.5, 0.17);
    auto s1 = disk_subset(g, 0.73, 0.5, 0.17);
    double total = 0.0;
    for (long long c = 0; c < g.ncells(); ++c)
        total += (s0[c] || s1[c]) ? g.cell_volume() : 0.0;
    PhaseVector U = eig_phases(g, {s0, s1}, total);  // budget exactly saturated

    PartitionResult pr = extract_partition(g, U, 1e-6);
    AuditReport rep = audit_partition(g, pr, U, total);
    CHECK(rep.saturation_ok);
    CHECK(rep.connected_ok);
    CHECK(rep.disjoint_ok);
    CHECK(rep.faber_krahn_ok);
    CHECK(rep.subsolution_ok);
    CHECK(rep.eigen_residual_ok);
    CHECK(rep.all_ok());
    CHECK(rep.max_components == 1);
    CHECK(rep.overlap_measure == 0.0);
    CHECK(rep.objective >= rep.faber_krahn_bound * 0.95);
}

TEST_CASE("audit rejects a split phase and a slack budget") {
    DomainGrid g = unit_square(64);
    auto split = box_subset(g, 4, 12, 4, 12);
    for (long long c = 0; c < g.ncells(); ++c)
        if (box_subset(g, 40, 48, 40, 48)[c]) split[c] = 1;
    auto other = box_subset(g, 4, 12, 40, 56);
    double total = 0.0;
    for (long long c = 0; c < g.ncells(); ++c)
        total += (split[c] || other[c]) ? g.cell_volume() : 0.0;

    PhaseVector U = eig_phases(g, {split, other}, total);
    PartitionResult pr = extract_partition(g, U, 1e-6);
    AuditReport rep = audit_partition(g, pr, U, total);
    CHECK_FALSE(rep.connected_ok);
    CHECK(rep.max_components == 2);
    CHECK_FALSE(rep.all_ok());

    // same partition audited against a doubled budget: saturation fails
    AuditReport rep2 = audit_partition(g, pr, U, 2.0 * total);
    CHECK_FALSE(rep2.saturation_ok);
}

TEST_CASE("cjk diagnostic") {
    DomainGrid g = unit_square(64);
    auto s0 = disk_subset(g, 0.3, 0.5, 0.15);
    auto s1 = disk_subset(g, 0.7, 0.5, 0.15);
    PhaseVector U = eig_phases(g, {s0, s1}, 0.2);

    // center far from phase 1: every ball that misses supp(u1) gives psi = 0
    long long center = g.cell_index(g.n[0] * 3 / 10, g.n[1] / 2);
    auto psi = cjk_diagnostic(g, U, center, {0.05, 0.1});
    REQUIRE(psi.size() == 1);
    for (double v : psi[0]) CHECK(v == 0.0);

    // center between the disks, large radii reach both supports
    long long mid = g.cell_index(g.n[0] / 2, g.n[1] / 2);
    auto psi_mid = cjk_diagnostic(g, U, mid, {0.3, 0.4});
    for (double v : psi_mid[0]) CHECK(v > 0.0);

    CHECK_THROWS_AS(cjk_diagnostic(g, U, mid, {0.5 * g.h}), std::invalid_argument);
}

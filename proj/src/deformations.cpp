#include "partopt/deformations.hpp"

#include <cmath>
#include <limits>

namespace partopt {

namespace {

void check_index(const PhaseVector& U, int i) {
    if (i < 0 || i >= U.k) throw std::invalid_argument("deformation: phase index out of range");
}

void check_step(const PhaseVector& U, int i, const ScalarField& phi, double t) {
    if (t < 0.0) throw std::invalid_argument("deformation: step must be nonnegative");
    for (long long c = 0; c < static_cast<long long>(phi.v.size()); ++c)
        if (phi[c] < 0.0) throw std::invalid_argument("deformation: phi must be nonnegative");
    double mphi = max_abs(phi);
    double mu = max_abs(U.fields[i]);
    // Annihilation guard: the lemmas hold only for small t.
    if (mphi > 0.0 && t * mphi > 0.5 * mu)
        throw std::invalid_argument("deformation: step too large, phase would be annihilated");
}

ScalarField positive_part_normalized(const DomainGrid& g, const ScalarField& w) {
    ScalarField out(g);
    for (long long c = 0; c < g.ncells(); ++c) out[c] = w[c] > 0.0 ? w[c] : 0.0;
    double n = norm_l2(out);
    if (n == 0.0) throw std::invalid_argument("deformation: positive part vanished");
    for (auto& x : out.v) x /= n;
    return out;
}

}  // namespace

ScalarField hat_transform(const PhaseVector& U, int i) {
    check_index(U, i);
    const DomainGrid& g = *U.fields[i].grid;
    ScalarField out(g);
    for (long long c = 0; c < g.ncells(); ++c) {
        double s = 0.0;
        for (int j = 0; j < U.k; ++j)
            if (j != i) s += U.fields[j][c];
        out[c] = U.fields[i][c] - s;
    }
    return out;
}

PhaseVector deform_simple(const PhaseVector& U, int i, const ScalarField& phi, double t) {
    check_index(U, i);
    check_step(U, i, phi, t);
    const DomainGrid& g = *U.fields[i].grid;
    ScalarField w(g);
    for (long long c = 0; c < g.ncells(); ++c) w[c] = U.fields[i][c] - t * phi[c];
    PhaseVector out = U;
    out.fields[i] = positive_part_normalized(g, w);
    return out;
}

PhaseVector deform_transfer(const PhaseVector& U, int i, const ScalarField& phi, double t) {
    check_index(U, i);
    check_step(U, i, phi, t);
    const DomainGrid& g = *U.fields[i].grid;
    PhaseVector out = U;
    for (int j = 0; j < U.k; ++j) {
        ScalarField hat = hat_transform(U, j);
        ScalarField w(g);
        double s = (j == i) ? t : -t;
        for (long long c = 0; c < g.ncells(); ++c) w[c] = hat[c] + s * phi[c];
        out.fields[j] = positive_part_normalized(g, w);
    }
    return out;
}

ExpansionFit expansion_check(const ScalarField& u, const ScalarField& phi,
                             const std::vector<double>& t_list, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("expansion_check: sign must be ±1");
    const DomainGrid& g = *u.grid;
    ScalarField up(g);
    for (long long c = 0; c < g.ncells(); ++c) up[c] = u[c] > 0.0 ? u[c] : 0.0;
    double n2 = norm_l2_sq(up);
    if (n2 == 0.0) throw std::invalid_argument("expansion_check: u^+ vanishes");
    double coeff = 2.0 * dot_l2(up, phi) / (n2 * n2);

    ExpansionFit fit;
    std::vector<double> log_t, log_r;
    for (double t : t_list) {
        if (t <= 0.0) throw std::invalid_argument("expansion_check: steps must be positive");
        ScalarField w(g);
        for (long long c = 0; c < g.ncells(); ++c) {
            double x = u[c] + sign * t * phi[c];
            w[c] = x > 0.0 ? x : 0.0;
        }
        double wn2 = norm_l2_sq(w);
        if (wn2 == 0.0) throw std::invalid_argument("expansion_check: (u + sign t phi)^+ vanishes");
        double lhs = 1.0 / wn2;
        double first_order = 1.0 / n2 + sign * (-coeff) * t;  // ∓ coefficient per sign
        double rem = std::abs(lhs - first_order);
        fit.remainders.push_back(rem);
        if (rem > 0.0) {
            log_t.push_back(std::log(t));
            log_r.push_back(std::log(rem));
        }
    }
    if (log_t.size() < 2) {
        fit.slope = std::numeric_limits<double>::infinity();
        return fit;
    }
    // Least-squares slope of log r vs log t.
    double mt = 0.0, mr = 0.0;
    for (std::size_t q = 0; q < log_t.size(); ++q) {
        mt += log_t[q];
        mr += log_r[q];
    }
    mt /= log_t.size();
    mr /= log_t.size();
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < log_t.size(); ++q) {
        num += (log_t[q] - mt) * (log_r[q] - mr);
        den += (log_t[q] - mt) * (log_t[q] - mt);
    }
    fit.slope = num / den;
    return fit;
}

}  // namespace partopt

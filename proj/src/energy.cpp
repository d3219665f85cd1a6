#include "partopt/energy.hpp"

#include "partopt/oracles.hpp"

namespace partopt {

double support_measure(const DomainGrid& g, const ScalarField& u, double eps_rel) {
    if (u.grid != &g) throw std::invalid_argument("field/grid mismatch");
    if (eps_rel < 0.0 || eps_rel >= 1.0) throw std::invalid_argument("eps_rel must lie in [0, 1)");
    double cutoff = eps_rel * max_abs(u);
    double count = g.reduce([&](long long c) { return std::abs(u[c]) > cutoff && u[c] != 0.0 ? 1.0 : 0.0; });
    return count * g.cell_volume();
}

double smoothed_support_measure(const DomainGrid& g, const ScalarField& u, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("smoothing width must be positive");
    const double e2 = eps * eps;
    return g.cell_volume() * g.reduce([&](long long c) {
        double s = u[c] * u[c];
        return s >= e2 ? 1.0 : s / e2;
    });
}

EnergyBreakdown penalized_energy(const DomainGrid& g, const PhaseVector& U, double mu,
                                 double beta, double eps_measure, double eps_support_rel) {
    if (mu < 0.0 || beta < 0.0) throw std::invalid_argument("penalty weights must be nonnegative");
    EnergyBreakdown b;
    b.dirichlet.reserve(U.k);
    double smoothed = 0.0, thresholded = 0.0;
    for (const ScalarField& u : U.fields) {
        double m = norm_l2_sq(u);
        if (m == 0.0) throw std::invalid_argument("penalized_energy: a phase is identically zero");
        b.dirichlet.push_back(dirichlet_energy(g, u) / m);
        smoothed += smoothed_support_measure(g, u, eps_measure);
        thresholded += support_measure(g, u, eps_support_rel);
    }
    b.measure_excess = std::max(thresholded - U.a, 0.0);
    b.measure_penalty = mu * std::max(smoothed - U.a, 0.0);
    for (int i = 0; i < U.k; ++i)
        for (int j = i + 1; j < U.k; ++j) {
            const ScalarField &ui = U.fields[i], &uj = U.fields[j];
            b.segregation_penalty += beta * g.cell_volume() * g.reduce([&](long long c) {
                double p = ui[c] * uj[c];
                return p * p;
            });
        }
    b.total = b.dirichlet_sum() + b.measure_penalty + b.segregation_penalty;
    return b;
}

double mu_threshold(double c_tilde, int N, double a, int k) {
    if (c_tilde < 0.0) throw std::invalid_argument("mu_threshold: energy level must be nonnegative");
    if (a <= 0.0) throw std::invalid_argument("mu_threshold: budget must be positive");
    if (k < 2) throw std::invalid_argument("mu_threshold: need at least two phases");
    double ball = unit_ball_volume(N);  // validates N
    double root = std::pow(2.0, 0.5 * (k - 1)) * c_tilde * std::pow(a, (2.0 - N) / (2.0 * N)) /
                  (N * std::pow(ball, 1.0 / N));
    return root * root;
}

}  // namespace partopt

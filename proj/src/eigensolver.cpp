#include "partopt/eigensolver.hpp"

#include <sstream>

namespace partopt {

namespace {

// CG on the masked stencil. Solves A x = b over `subset`, zero initial guess.
void cg_solve(const DomainGrid& g, const std::vector<std::uint8_t>& subset,
              const ScalarField& b, ScalarField& x, double rel_tol, int max_iter) {
    for (auto& xv : x.v) xv = 0.0;
    ScalarField r = b, p = b, Ap(g);
    double rr = dot_l2(r, r);
    const double stop = rel_tol * rel_tol * rr;
    if (rr == 0.0) return;
    for (int it = 0; it < max_iter; ++it) {
        neg_laplacian_apply(g, subset, p, Ap);
        double pAp = dot_l2(p, Ap);
        if (pAp <= 0.0) break;
        double alpha = rr / pAp;
        for (long long c = 0; c < g.ncells(); ++c) {
            x[c] += alpha * p[c];
            r[c] -= alpha * Ap[c];
        }
        double rr_new = dot_l2(r, r);
        if (rr_new <= stop) return;
        double beta = rr_new / rr;
        rr = rr_new;
        for (long long c = 0; c < g.ncells(); ++c) p[c] = r[c] + beta * p[c];
    }
}

}  // namespace

EigenResult smallest_dirichlet_eig(const DomainGrid& g, const std::vector<std::uint8_t>& subset,
                                   double tol, double inner_tol, int max_iterations) {
    if (static_cast<long long>(subset.size()) != g.ncells())
        throw std::invalid_argument("eigensolver: subset size mismatch");
    long long count = 0;
    for (long long c = 0; c < g.ncells(); ++c) {
        if (!subset[c]) continue;
        if (!g.mask[c]) throw std::invalid_argument("eigensolver: subset not contained in grid interior");
        ++count;
    }
    if (count == 0) throw std::invalid_argument("eigensolver: empty subset");

    // The eigen-residual plateaus near the inner solve accuracy, so tighten
    // the CG tolerance whenever the requested tolerance is below it.
    inner_tol = std::min(inner_tol, 0.01 * tol);

    const int cg_cap = static_cast<int>(20 * std::sqrt(double(g.ncells())) + 2000);
    ScalarField x(g), y(g), Ay(g);
    for (long long c = 0; c < g.ncells(); ++c) x[c] = subset[c] ? 1.0 : 0.0;
    double nx = norm_l2(x);
    for (auto& xv : x.v) xv /= nx;

    double lambda = 0.0, lambda_prev = -1.0, residual = 0.0;
    int it = 0;
    for (it = 1; it <= max_iterations; ++it) {
        cg_solve(g, subset, x, y, inner_tol, cg_cap);
        double ny = norm_l2(y);
        if (!(ny > 0.0)) throw std::runtime_error("eigensolver: inner solve produced zero vector");
        for (long long c = 0; c < g.ncells(); ++c) x[c] = y[c] / ny;
        neg_laplacian_apply(g, subset, x, Ay);
        lambda = dot_l2(Ay, x);
        double r2 = 0.0;
        {
            ScalarField res(g);
            for (long long c = 0; c < g.ncells(); ++c) res[c] = Ay[c] - lambda * x[c];
            r2 = norm_l2(res);
        }
        residual = r2;
        bool stagnant = lambda_prev > 0.0 && std::abs(lambda - lambda_prev) <= 1e-9 * lambda;
        if (residual <= tol * lambda && stagnant) break;
        if (residual <= tol * lambda && it > 2) break;
        lambda_prev = lambda;
    }
    if (residual > tol * lambda) {
        std::ostringstream msg;
        msg << "eigensolver did not converge: residual " << residual << " vs tol " << tol * lambda;
        throw std::runtime_error(msg.str());
    }

    // Principal eigenfunction is signless; fix the sign by the mean.
    if (integrate(g, x) < 0.0)
        for (auto& xv : x.v) xv = -xv;
    double nfinal = norm_l2(x);
    for (auto& xv : x.v) xv /= nfinal;

    EigenResult out;
    out.lambda = lambda;
    out.eigenfunction = std::move(x);
    out.iterations = it;
    out.residual = residual;
    return out;
}

double rayleigh_quotient(const DomainGrid& g, const ScalarField& u) {
    double m = norm_l2_sq(u);
    if (m == 0.0) throw std::invalid_argument("rayleigh_quotient: zero field");
    return dirichlet_energy(g, u) / m;
}

}  // namespace partopt

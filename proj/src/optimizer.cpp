#include "partopt/optimizer.hpp"

#include "partopt/eigensolver.hpp"
#include "partopt/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace partopt {

void SolverConfig::validate(double domain_measure) const {
    if (k < 2) throw std::invalid_argument("config: k must be at least 2");
    if (!(a > 0.0) || a >= domain_measure)
        throw std::invalid_argument("config: a must satisfy 0 < a < |Omega|");
    if (step <= 0.0) throw std::invalid_argument("config: step must be positive");
    if (mu_safety < 1.0) throw std::invalid_argument("config: mu_safety must be >= 1");
    if (beta_schedule.empty() || eps_measure_schedule.empty())
        throw std::invalid_argument("config: schedules must be nonempty");
    for (std::size_t i = 1; i < beta_schedule.size(); ++i)
        if (beta_schedule[i] < beta_schedule[i - 1])
            throw std::invalid_argument("config: beta schedule must be nondecreasing");
    for (std::size_t i = 1; i < eps_measure_schedule.size(); ++i)
        if (eps_measure_schedule[i] > eps_measure_schedule[i - 1])
            throw std::invalid_argument("config: eps_measure schedule must be nonincreasing");
    if (eps_measure_schedule.back() <= 0.0)
        throw std::invalid_argument("config: eps_measure must stay positive");
    if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("config: iteration caps must be positive");
    if (tol_energy <= 0.0) throw std::invalid_argument("config: tol_energy must be positive");
}

namespace {

double dist2(const std::array<double, 3>& p, const std::array<double, 3>& q, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += (p[d] - q[d]) * (p[d] - q[d]);
    return s;
}

// True when every cell center within radius r of the seed center is interior.
bool ball_clear(const DomainGrid& g, const std::array<double, 3>& ctr, double r) {
    int span = static_cast<int>(std::ceil(r / g.h)) + 1;
    int sx = static_cast<int>(ctr[0] / g.h), sy = static_cast<int>(ctr[1] / g.h);
    int sz = g.dim == 3 ? static_cast<int>(ctr[2] / g.h) : 0;
    int zlo = g.dim == 3 ? sz - span : 0, zhi = g.dim == 3 ? sz + span : 0;
    for (int iz = zlo; iz <= zhi; ++iz)
        for (int iy = sy - span; iy <= sy + span; ++iy)
            for (int ix = sx - span; ix <= sx + span; ++ix) {
                std::array<double, 3> p{(ix + 0.5) * g.h, (iy + 0.5) * g.h,
                                        g.dim == 3 ? (iz + 0.5) * g.h : 0.0};
                if (dist2(p, ctr, g.dim) >= r * r) continue;
                if (!g.inside(ix, iy, iz)) return false;
            }
    return true;
}

}  // namespace

PhaseVector initialize_phases(const DomainGrid& g, int k, std::uint64_t seed, double a) {
    if (k < 2) throw std::invalid_argument("initialize_phases: k must be at least 2");
    if (k > g.interior) throw std::invalid_argument("initialize_phases: more phases than interior cells");

    std::vector<long long> interior_cells;
    interior_cells.reserve(static_cast<std::size_t>(g.interior));
    for (long long c = 0; c < g.ncells(); ++c)
        if (g.mask[c]) interior_cells.push_back(c);

    const double r = std::pow(a / (k * unit_ball_volume(g.dim)), 1.0 / g.dim);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, interior_cells.size() - 1);

    // Seed points with clearance from each other and from the exterior, so the
    // initial bumps really carry the intended support; fall back to
    // unconstrained placement if the budget leaves no room.
    std::vector<std::array<double, 3>> seeds;
    const double min_sep = 2.0 * r + 2.0 * g.h;
    for (int attempt = 0; attempt < 4000 && static_cast<int>(seeds.size()) < k; ++attempt) {
        auto ctr = g.cell_center(interior_cells[pick(rng)]);
        bool ok = ball_clear(g, ctr, r + g.h);
        for (const auto& s : seeds)
            if (dist2(s, ctr, g.dim) < min_sep * min_sep) ok = false;
        if (ok) seeds.push_back(ctr);
    }
    while (static_cast<int>(seeds.size()) < k) {
        auto ctr = g.cell_center(interior_cells[pick(rng)]);
        bool distinct = true;
        for (const auto& s : seeds)
            if (dist2(s, ctr, g.dim) == 0.0) distinct = false;
        if (distinct) seeds.push_back(ctr);
    }

    // Nearest-seed assignment with the squared distance per cell.
    std::vector<int> owner(interior_cells.size());
    std::vector<double> d2(interior_cells.size());
    for (std::size_t q = 0; q < interior_cells.size(); ++q) {
        auto p = g.cell_center(interior_cells[q]);
        int best = 0;
        double bestd = dist2(p, seeds[0], g.dim);
        for (int i = 1; i < k; ++i) {
            double d = dist2(p, seeds[i], g.dim);
            if (d < bestd) { bestd = d; best = i; }
        }
        owner[q] = best;
        d2[q] = bestd;
    }

    // The discrete cell count rarely matches k|B_r| exactly; bisect the bump
    // radius so the realized support measure sits just under the budget.
    auto measure_at = [&](double rr) {
        long long cnt = 0;
        for (double d : d2)
            if (d < rr * rr) ++cnt;
        return cnt * g.cell_volume();
    };
    double lo = 0.0, hi = r + g.h;  // growth past r + h could clip or collide
    if (measure_at(hi) <= 0.995 * a) {
        lo = hi;
    } else {
        for (int iter = 0; iter < 60; ++iter) {
            double mid = 0.5 * (lo + hi);
            if (measure_at(mid) <= 0.995 * a)
                lo = mid;
            else
                hi = mid;
        }
    }
    const double r_eff = lo > 0.0 ? lo : r;

    PhaseVector U;
    U.k = k;
    U.a = a;
    U.fields.assign(k, ScalarField(g));
    for (std::size_t q = 0; q < interior_cells.size(); ++q)
        if (d2[q] < r_eff * r_eff)
            U.fields[owner[q]][interior_cells[q]] = r_eff * r_eff - d2[q];
    for (int i = 0; i < k; ++i) {
        double n = norm_l2(U.fields[i]);
        if (n == 0.0) throw std::runtime_error("initialize_phases: a phase received no support");
        for (auto& x : U.fields[i].v) x /= n;
    }
    return U;
}

PhaseVector project_constraints(const PhaseVector& U, SegregationMode mode) {
    if (U.k < 1 || U.fields.empty()) throw std::invalid_argument("project_constraints: empty phase vector");
    const DomainGrid& g = *U.fields[0].grid;
    PhaseVector out = U;
    for (auto& f : out.fields)
        for (auto& x : f.v)
            if (x < 0.0) x = 0.0;
    if (mode == SegregationMode::Hard) {
        for (long long c = 0; c < g.ncells(); ++c) {
            int best = 0;
            double bestv = out.fields[0][c];
            for (int i = 1; i < out.k; ++i)
                if (out.fields[i][c] > bestv) { bestv = out.fields[i][c]; best = i; }
            for (int i = 0; i < out.k; ++i)
                if (i != best) out.fields[i][c] = 0.0;
        }
    }
    for (int i = 0; i < out.k; ++i) {
        double n = norm_l2(out.fields[i]);
        if (n == 0.0) throw std::runtime_error("project_constraints: phase collapsed");
        for (auto& x : out.fields[i].v) x /= n;
    }
    return out;
}

namespace {

// Forward (explicit) gradient of the smooth parts only: Rayleigh quotients and
// the segregation penalty. The measure penalty has curvature mu/eps², many
// orders stiffer than the Laplacian, so an explicit step on it collapses the
// line search; it is handled by the backward half-step below instead.
std::vector<ScalarField> energy_gradient(const DomainGrid& g, const SolverState& st) {
    const PhaseVector& U = st.U;
    std::vector<ScalarField> grad(U.k, ScalarField(g));
    for (int i = 0; i < U.k; ++i) {
        const ScalarField& u = U.fields[i];
        ScalarField Au(g);
        neg_laplacian_apply(g, {}, u, Au);
        double m = norm_l2_sq(u);
        double q = st.breakdown.dirichlet[i];
        for (long long c = 0; c < g.ncells(); ++c) {
            if (!g.mask[c]) continue;
            double gi = 2.0 * (Au[c] - q * u[c]) / m;
            if (st.beta > 0.0) {
                double s = 0.0;
                for (int j = 0; j < U.k; ++j)
                    if (j != i) s += U.fields[j][c] * U.fields[j][c];
                gi += st.beta * 2.0 * u[c] * s;
            }
            grad[i][c] = gi;
        }
    }
    return grad;
}

// Backward half-step for the measure penalty. Cells below the smoothing width
// eps form the active band of rho_eps. Two rules, both mirror-symmetric
// (global scalars and per-cell value comparisons only):
//  - growth gate: band cells may grow only while the fully-counted support
//    stays within the budget; the number of admitted growth slots equals the
//    remaining headroom in cells, granted to the largest candidate values;
//  - proximal shrink: while the smoothed measure exceeds the budget, band
//    cells take the implicit (proximal) update of mu * u²/eps², which is
//    unconditionally stable where an explicit step would oscillate.
void measure_backward_step(const DomainGrid& g, const SolverState& st, const SolverConfig& cfg,
                           double tau, PhaseVector& cand) {
    if (st.mu <= 0.0) return;
    const double eps = st.eps_measure;
    const double cellvol = g.cell_volume();

    double locked_cells = 0.0;
    for (const auto& u : st.U.fields)
        locked_cells += g.reduce([&](long long c) { return u[c] >= eps ? 1.0 : 0.0; });
    const double headroom = cfg.a - locked_cells * cellvol;
    const long long slots = headroom > 0.0 ? static_cast<long long>(headroom / cellvol + 1e-12) : 0;

    // Escape threshold: the slots-th largest candidate value among band cells
    // that want to grow. Ties do not escape, which keeps mirror pairs together.
    double theta = std::numeric_limits<double>::infinity();
    if (slots > 0) {
        std::vector<double> grower_values;
        for (int i = 0; i < st.U.k; ++i)
            for (long long c = 0; c < g.ncells(); ++c) {
                double uc = st.U.fields[i][c];
                if (g.mask[c] && uc < eps && cand.fields[i][c] > uc)
                    grower_values.push_back(cand.fields[i][c]);
            }
        if (static_cast<long long>(grower_values.size()) <= slots) {
            theta = -std::numeric_limits<double>::infinity();
        } else {
            std::nth_element(grower_values.begin(), grower_values.begin() + slots,
                             grower_values.end(), std::greater<double>());
            theta = grower_values[static_cast<std::size_t>(slots)];
        }
    }

    const bool over_budget = st.breakdown.measure_excess > 0.0;
    const double prox = 1.0 + tau * 2.0 * st.mu / (eps * eps);
    for (int i = 0; i < st.U.k; ++i)
        for (long long c = 0; c < g.ncells(); ++c) {
            double uc = st.U.fields[i][c];
            if (!g.mask[c] || uc >= eps) continue;  // the penalty is flat above the band
            double& vc = cand.fields[i][c];
            if (vc > uc && vc <= theta) vc = uc;    // growth slot not granted
            if (over_budget) vc /= prox;
        }
}

}  // namespace

void descent_step(const DomainGrid& g, SolverState& st, const SolverConfig& cfg) {
    const double prev = st.breakdown.total;
    const double accept_bound = prev + cfg.tol_energy * std::max(1.0, std::abs(prev));
    std::vector<ScalarField> grad = energy_gradient(g, st);

    double tau = st.step;
    for (int tries = 0; tries < 30; ++tries) {
        PhaseVector cand = st.U;
        for (int i = 0; i < st.U.k; ++i)
            for (long long c = 0; c < g.ncells(); ++c) cand.fields[i][c] -= tau * grad[i][c];
        measure_backward_step(g, st, cfg, tau, cand);
        bool ok = true;
        EnergyBreakdown eb;
        try {
            cand = project_constraints(cand, cfg.mode);
            eb = penalized_energy(g, cand, st.mu, st.beta, st.eps_measure, cfg.eps_support);
        } catch (const std::exception&) {
            ok = false;
        }
        if (ok && eb.total <= accept_bound) {
            st.U = std::move(cand);
            st.breakdown = std::move(eb);
            st.step = (tries == 0) ? std::min(tau * 1.5, 1.0) : tau;
            st.inner_steps += 1;
            st.energy_history.push_back(st.breakdown.total);
            st.parts_history.push_back({st.breakdown.dirichlet_sum(), st.breakdown.measure_penalty,
                                        st.breakdown.segregation_penalty});
            return;
        }
        tau *= 0.5;
        st.backtrack_halvings += 1;
    }
    throw std::runtime_error("descent_step: stalled after 30 backtracking halvings");
}

SolverState solve_from(const DomainGrid& g, const SolverConfig& cfg, PhaseVector initial) {
    cfg.validate(g.domain_measure());
    SolverState st;
    st.U = project_constraints(std::move(initial), cfg.mode);
    st.step = cfg.step;

    const std::size_t nstages =
        std::max(cfg.beta_schedule.size(), cfg.eps_measure_schedule.size());
    auto stage_of = [&](const std::vector<double>& sched, int round) {
        return sched[std::min<std::size_t>(round, sched.size() - 1)];
    };

    for (int round = 0; round < cfg.max_outer; ++round) {
        st.beta = stage_of(cfg.beta_schedule, round);
        st.eps_measure = stage_of(cfg.eps_measure_schedule, round);
        // Running upper bound for the optimal level drives the penalty weight.
        double c_tilde = 0.0;
        for (const auto& u : st.U.fields) c_tilde += rayleigh_quotient(g, u);
        st.mu = cfg.mu_override >= 0.0
                    ? cfg.mu_override
                    : mu_threshold(c_tilde, g.dim, cfg.a, cfg.k) * cfg.mu_safety;
        st.breakdown = penalized_energy(g, st.U, st.mu, st.beta, st.eps_measure, cfg.eps_support);
        st.energy_history.push_back(st.breakdown.total);
        st.parts_history.push_back({st.breakdown.dirichlet_sum(), st.breakdown.measure_penalty,
                                    st.breakdown.segregation_penalty});
        const double round_start = st.breakdown.total;

        int inner = 0;
        double window_energy = round_start;
        bool stalled = false;
        for (inner = 0; inner < cfg.max_inner; ++inner) {
            try {
                descent_step(g, st, cfg);
            } catch (const std::exception&) {
                stalled = true;  // keep the best-so-far state
                break;
            }
            if ((inner + 1) % 50 == 0) {
                double e = st.breakdown.total;
                if (window_energy - e <= 50.0 * cfg.tol_energy * std::max(1.0, std::abs(e))) break;
                window_energy = e;
            }
        }
        st.outer_rounds = round + 1;
        bool schedule_done = static_cast<std::size_t>(round) + 1 >= nstages;
        double round_gain = round_start - st.breakdown.total;
        if (stalled ||
            (schedule_done &&
             round_gain <= cfg.tol_energy * std::max(1.0, std::abs(st.breakdown.total))))
            break;
    }

    st.U = project_constraints(st.U, SegregationMode::Hard);
    st.breakdown = penalized_energy(g, st.U, st.mu, st.beta, st.eps_measure, cfg.eps_support);
    return st;
}

SolverState solve(const DomainGrid& g, const SolverConfig& cfg) {
    cfg.validate(g.domain_measure());
    return solve_from(g, cfg, initialize_phases(g, cfg.k, cfg.seed, cfg.a));
}

}  // namespace partopt

#include "partopt/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace partopt {

namespace {

constexpr double kPi = 3.14159265358979323846;

double bessel_j0(double x) {
    // Power series Σ (-1)^m (x²/4)^m / (m!)², ample for x in [0, 4].
    double term = 1.0, sum = 1.0;
    const double q = 0.25 * x * x;
    for (int m = 1; m < 40; ++m) {
        term *= -q / (double(m) * m);
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

double bessel_j_half(double x) { return std::sin(x) / std::sqrt(x); }

template <class F>
double bisect_root(F f, double lo, double hi) {
    double flo = f(lo);
    if (flo * f(hi) > 0.0) throw std::logic_error("bisection interval does not bracket a root");
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0 || hi - lo < 1e-14) return mid;
        if (flo * fm < 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
        if (hi - lo < 1e-13) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double unit_ball_volume(int N) {
    if (N == 2) return kPi;
    if (N == 3) return 4.0 * kPi / 3.0;
    throw std::invalid_argument("unit_ball_volume: only dimensions 2 and 3 are supported");
}

double bessel_j0_first_root() {
    static const double root = bisect_root(bessel_j0, 2.0, 3.0);
    return root;
}

double ball_lambda1(int N, double r) {
    if (r <= 0.0) throw std::invalid_argument("ball_lambda1: radius must be positive");
    double j;
    if (N == 2)
        j = bessel_j0_first_root();
    else if (N == 3)
        j = bisect_root(bessel_j_half, 3.0, 4.0);
    else
        throw std::invalid_argument("ball_lambda1: only dimensions 2 and 3 are supported");
    return (j / r) * (j / r);
}

double box_lambda1(const double* lengths, int N) {
    double s = 0.0;
    for (int d = 0; d < N; ++d) {
        if (lengths[d] <= 0.0) throw std::invalid_argument("box_lambda1: edge lengths must be positive");
        s += 1.0 / (lengths[d] * lengths[d]);
    }
    return kPi * kPi * s;
}

BallPrediction equal_ball_prediction(int N, int k, double a) {
    if (a <= 0.0) throw std::invalid_argument("equal_ball_prediction: budget must be positive");
    if (k < 1) throw std::invalid_argument("equal_ball_prediction: need at least one ball");
    BallPrediction p;
    p.radius = std::pow(a / (k * unit_ball_volume(N)), 1.0 / N);
    p.per_ball_lambda = ball_lambda1(N, p.radius);
    p.total_objective = k * p.per_ball_lambda;
    return p;
}

}  // namespace partopt

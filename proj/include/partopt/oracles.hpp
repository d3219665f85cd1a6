#pragma once

namespace partopt {

struct BallPrediction {
    double radius = 0.0;
    double per_ball_lambda = 0.0;
    double total_objective = 0.0;
};

double unit_ball_volume(int N);        // π in 2D, 4π/3 in 3D
double bessel_j0_first_root();         // j_{0,1}, bisection on the power series
double ball_lambda1(int N, double r);  // (j_{N/2-1,1} / r)²
double box_lambda1(const double* lengths, int N);

/// Optimal k equal balls for budget a: radius (a / (k|B₁|))^{1/N}.
BallPrediction equal_ball_prediction(int N, int k, double a);

}  // namespace partopt

#pragma once

#include <Eigen/Dense>

namespace icsel {

// Coordinate descent for  min_b  0.5 b'Qb - q'b + lambda ||b||_1  with Q
// symmetric positive definite. Soft-thresholding leaves exact zeros.
// start is the initial iterate; sweeps stop once the largest coordinate move
// falls below tol.
Eigen::VectorXd quadratic_lasso(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q, double lambda,
                                const Eigen::VectorXd& start, double tol = 1e-14,
                                int max_sweeps = 10000);

inline double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

} // namespace icsel

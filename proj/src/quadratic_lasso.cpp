#include "icsel/quadratic_lasso.hpp"

#include <algorithm>
#include <cmath>

namespace icsel {

Eigen::VectorXd quadratic_lasso(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q, double lambda,
                                const Eigen::VectorXd& start, double tol, int max_sweeps) {
    Eigen::VectorXd b = start;
    Eigen::VectorXd Qb = Q * b;
    const double scale = std::max(1.0, q.lpNorm<Eigen::Infinity>());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double largest = 0.0;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            const double qjj = Q(j, j);
            const double partial = q[j] - (Qb[j] - qjj * b[j]);
            const double next = soft_threshold(partial, lambda) / qjj;
            const double delta = next - b[j];
            if (delta != 0.0) {
                Qb.noalias() += delta * Q.col(j);
                b[j] = next;
                largest = std::max(largest, std::abs(delta) * qjj);
            }
        }
        if (largest <= tol * scale) break;
    }
    return b;
}

} // namespace icsel

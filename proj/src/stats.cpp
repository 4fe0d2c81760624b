#include "icsel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace icsel {

double ks_statistic_uniform(std::vector<double> sample) {
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double u = std::clamp(sample[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
    }
    return d;
}

double ks_pvalue(double statistic, std::size_t n) {
    if (n == 0) return 1.0;
    const double rn = std::sqrt(static_cast<double>(n));
    const double x = (rn + 0.12 + 0.11 / rn) * statistic;
    if (x < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

std::vector<double> uniform_quantiles(std::size_t n) {
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return q;
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

} // namespace icsel

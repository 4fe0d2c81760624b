#include "icsel/truncnorm.hpp"

#include "icsel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace icsel {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log sqrt(2 pi)

// Mills ratio (1 - Phi(x)) / phi(x) for large x, continued fraction
// 1 / (x + 1 / (x + 2 / (x + 3 / (x + ...)))) evaluated from the tail.
double mills_ratio(double x) {
    double tail = x;
    for (int k = 80; k >= 1; --k) tail = x + k / tail;
    return 1.0 / tail;
}

} // namespace

double log_norm_sf(double x) {
    if (std::isnan(x)) return x;
    if (x == std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
    if (x < -5.0) return std::log1p(-0.5 * std::erfc(-x / std::sqrt(2.0)));
    if (x < 20.0) return std::log(0.5 * std::erfc(x / std::sqrt(2.0)));
    return -0.5 * x * x - kLogSqrt2Pi + std::log(mills_ratio(x));
}

double log_norm_cdf(double x) { return log_norm_sf(-x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Acklam's rational approximation refined by one Halley step.
double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double low = 0.02425;
    double x;
    if (p < low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double truncated_normal_cdf(double x, double theta, double sigma2, double u, double v) {
    auto fail = [&](const char* why) {
        std::ostringstream os;
        os << "truncated normal: " << why << " (u = " << u << ", v = " << v << ", theta = " << theta
           << ", sigma = " << std::sqrt(sigma2) << ")";
        throw EmptyTruncation(os.str());
    };
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail("variance must be positive");
    if (!(u < v)) fail("empty truncation interval");
    if (x <= u) return 0.0;
    if (x >= v) return 1.0;

    const double sigma = std::sqrt(sigma2);
    const double a = (u - theta) / sigma;
    const double b = (v - theta) / sigma;
    const double t = (x - theta) / sigma;

    // Interval mostly above the mean: upper tails, F = {S(a) - S(t)} / {S(a) - S(b)}.
    // Otherwise lower tails, F = {P(t) - P(a)} / {P(b) - P(a)}.
    double num_log, den_log;
    if (a > -b) {
        const double sa = log_norm_sf(a);
        const double st = log_norm_sf(t);
        const double sb = log_norm_sf(b);
        num_log = sa + std::log(-std::expm1(st - sa));
        den_log = sa + std::log(-std::expm1(sb - sa));
        if (!(den_log > std::log(1e-300) + sa) || !std::isfinite(den_log)) fail("no representable mass");
        return std::clamp(std::exp(num_log - den_log), 0.0, 1.0);
    }
    const double pa = log_norm_cdf(a);
    const double pt = log_norm_cdf(t);
    const double pb = log_norm_cdf(b);
    num_log = pt + std::log(-std::expm1(pa - pt));
    den_log = pb + std::log(-std::expm1(pa - pb));
    if (!(den_log > std::log(1e-300) + pb) || !std::isfinite(den_log)) fail("no representable mass");
    return std::clamp(std::exp(num_log - den_log), 0.0, 1.0);
}

} // namespace icsel

#pragma once

namespace icsel {

// log Phi(x) and log(1 - Phi(x)), accurate far into both tails.
double log_norm_cdf(double x);
double log_norm_sf(double x);

double norm_cdf(double x);

// Standard normal quantile.
double norm_quantile(double p);

// CDF at x of N(theta, sigma2) truncated to [u, v]. x is clamped into
// [u, v]. Evaluated as a ratio of tail masses in log space, using whichever
// tail keeps the smaller masses. Throws EmptyTruncation when the interval
// carries no representable mass.
double truncated_normal_cdf(double x, double theta, double sigma2, double u, double v);

} // namespace icsel

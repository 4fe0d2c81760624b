#pragma once

#include <vector>

namespace icsel {

// sup_t |F_n(t) - t| for a sample on [0, 1].
double ks_statistic_uniform(std::vector<double> sample);

// Asymptotic Kolmogorov tail probability with Stephens' small-sample
// correction, P(D_n > d).
double ks_pvalue(double statistic, std::size_t n);

// Plotting positions (i - 0.5) / n.
std::vector<double> uniform_quantiles(std::size_t n);

double mean(const std::vector<double>& values);

} // namespace icsel

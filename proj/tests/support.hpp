#pragma once

#include "icsel/info.hpp"
#include "icsel/lasso.hpp"
#include "icsel/likelihood.hpp"
#include "icsel/npmle.hpp"
#include "icsel/simulation.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace testing {

using icsel::IntervalDataset;
using icsel::Matrix;
using icsel::Vector;

// Brackets drawn from the inspection grid {0, 1, ..., grid}, optionally
// right-censored, with N(0, 1) covariates.
IntervalDataset random_dataset(std::size_t n, Eigen::Index p, std::uint64_t seed, int grid = 4,
                               double censor_prob = 0.25);

// Weibull-Cox data from the simulation generator with beta_star of length p
// (first half ones, rest zero).
IntervalDataset generated_dataset(std::size_t n, Eigen::Index p, std::uint64_t seed,
                                  icsel::InspectionScheme scheme = icsel::InspectionScheme::Strong);

// Innermost intervals by exhaustive search over endpoint pairs.
std::vector<icsel::MaximalIntersection> brute_maximal_intersections(const IntervalDataset& data);

// Residual form: regress each beta-score column on the nuisance scores by a
// rank-revealing QR solve and return sum_i r_i r_i'.
Matrix residual_ls_information(const Matrix& beta_scores, const Matrix& nuisance_scores);

// Random hazard on the data's maximal intersections, jumps in [0.2, 1.2].
icsel::StepCumHazard random_hazard(const IntervalDataset& data, std::mt19937_64& rng);

double rel_err(double a, double b);
double max_rel_err(const Matrix& a, const Matrix& b);

} // namespace testing

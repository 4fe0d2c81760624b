#pragma once

#include "icsel/likelihood.hpp"

#include <optional>
#include <vector>

namespace icsel {

// Turnbull innermost interval (left, right].
struct MaximalIntersection {
    double left;
    double right;

    bool operator==(const MaximalIntersection&) const = default;
};

// Innermost intervals of the observed brackets, sorted and disjoint.
// Throws NoFiniteIntervals when every observation is right-censored.
std::vector<MaximalIntersection> maximal_intersections(const IntervalDataset& data);

// Right endpoints of the maximal intersections: the support of every
// estimated baseline hazard.
std::vector<double> npmle_support(const IntervalDataset& data);

enum class NpmleMethod {
    ProjectedNewton,  // active-set Newton on the concave jump problem
    Em,               // self-consistency (Poisson augmentation) iterations
};

struct NpmleOptions {
    NpmleMethod method = NpmleMethod::ProjectedNewton;
    // Required bound on the projected mean-scale gradient at return. EM
    // iterates approach zero jumps only sublinearly, so it is measured there
    // by the gradient mapping |x - clamp(x + g)| instead.
    double gradient_tol = 1e-8;
    // Newton keeps iterating past gradient_tol down to this level or until
    // no further ascent is possible.
    double polish_tol = 1e-13;
    int max_iter = 5000;
    double jump_cap = 1e8;
};

struct NpmleResult {
    StepCumHazard hazard;
    double loglik = 0.0;         // n * P_n l(beta, hazard)
    double gradient_norm = 0.0;  // projected, mean scale
    int iterations = 0;
    bool capped = false;  // some jump hit jump_cap (mass escaping to infinity)
    std::vector<double> trace;  // mean-scale objective after each iteration
};

// Profile NPMLE of the baseline hazard for fixed beta. init is used as the
// starting point when its support matches the data's maximal intersections.
// Throws NonConvergence if the stationarity conditions are not met within
// max_iter iterations.
NpmleResult profile_npmle(const IntervalDataset& data, const Vector& beta,
                          const std::optional<StepCumHazard>& init = std::nullopt,
                          const NpmleOptions& options = {});

// Projected gradient of the jump problem: entries for jumps held at a bound
// with the gradient pointing outward are zeroed.
Vector projected_jump_gradient(const Vector& jumps, const Vector& gradient, double cap);

} // namespace icsel

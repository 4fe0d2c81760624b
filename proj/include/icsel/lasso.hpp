#pragma once

#include "icsel/likelihood.hpp"
#include "icsel/npmle.hpp"

#include <optional>
#include <vector>

namespace icsel {

enum class PenaltyRule { Fixed, CSqrtN, AicGrid };

// The penalty enters the mean-scale objective as (lambda / n) * ||beta||_1.
struct PenaltyConfig {
    PenaltyRule rule = PenaltyRule::Fixed;
    double lambda = 0.0;        // concrete value once resolved
    double c = 0.0;             // CSqrtN constant
    std::vector<double> grid;   // AicGrid candidates
    bool resolved = true;

    static PenaltyConfig fixed(double lambda);
    static PenaltyConfig c_sqrt_n(double c, std::size_t n);
    static PenaltyConfig aic_grid(std::vector<double> grid);
};

struct LassoOptions {
    double tol_kkt = 1e-6;         // mean scale
    double objective_tol = 1e-10;  // mean-scale change between iterations
    int max_iter = 5000;
    NpmleOptions npmle;
};

struct LassoFit {
    Vector beta;
    StepCumHazard lambda0;
    PenaltyConfig penalty;
    double loglik = 0.0;     // n * P_n l at the fit
    double objective = 0.0;  // P_n l - (lambda / n) ||beta||_1
    Vector score;            // P_n l_beta at (beta, lambda0)
    double kkt_active_residual = 0.0;
    double kkt_inactive_slack = 0.0;
    int iterations = 0;
    bool converged = false;
    bool capped = false;
    std::vector<double> trace;  // objective after each outer iteration

    std::size_t n = 0;
};

struct SelectionEvent {
    std::vector<Eigen::Index> model;  // strictly increasing, 0-based
    std::vector<int> signs;           // +1 / -1 per model entry

    bool empty() const { return model.empty(); }
    std::size_t size() const { return model.size(); }
};

// Penalized NPMLE by proximal Newton on the profile log likelihood: the
// baseline hazard is always the exact profile maximizer for the current
// beta, and beta moves along a soft-thresholded quadratic model so zeros are
// exact. Requires a resolved penalty.
LassoFit lasso_fit(const IntervalDataset& data, const PenaltyConfig& penalty,
                   const std::optional<CoxParams>& init = std::nullopt,
                   const LassoOptions& options = {});

// Sign pattern of the fit, re-verified against the KKT decomposition.
// Throws KktViolation on failure.
SelectionEvent extract_selection(const LassoFit& fit, double tol_kkt = 1e-6);

struct AicPoint {
    double lambda;
    double aic;
    std::size_t model_size;
};

struct AicSelection {
    double lambda;
    std::vector<AicPoint> path;
};

// argmin over the grid of -2 * loglik + 2 * |M|; ties go to the larger lambda.
AicSelection select_lambda_aic(const IntervalDataset& data, const std::vector<double>& grid,
                               const LassoOptions& options = {});

// Resolves AicGrid penalties by running select_lambda_aic.
PenaltyConfig resolve_penalty(const IntervalDataset& data, const PenaltyConfig& penalty,
                              const LassoOptions& options = {});

// Mean-scale KKT measures for a given score: max deviation on the active set
// and min slack lambda/n - |score_j| on the inactive set.
std::pair<double, double> kkt_measures(const Vector& beta, const Vector& mean_score,
                                       double lambda_over_n);

} // namespace icsel

#pragma once

#include "icsel/info.hpp"
#include "icsel/lasso.hpp"

#include <string>
#include <utility>
#include <vector>

namespace icsel {

// Law of gamma'y for y ~ N(mu, Sigma) restricted to {A y <= b}:
// truncated Gaussian on [vminus, vplus] with variance sigma2.
struct PivotSpec {
    Matrix A;
    Vector b;
    Vector gamma;
    Vector c;
    Vector z;
    double vminus = -kInf;
    double vplus = kInf;
    double sigma2 = 0.0;
};

// beta_hat_M + lambda [(I_n)_MM]^{-1} s_M. Throws NotPositiveDefinite.
Vector one_step_estimator(const LassoFit& fit, const SelectionEvent& sel, const InfoEstimate& info);

// Limits of {t : A (z + c t) <= b}. Throws EmptyTruncation when the set is
// empty.
std::pair<double, double> truncation_limits(const Matrix& A, const Vector& b, const Vector& c,
                                            const Vector& z);

// Generic polyhedral pivot for y with covariance Sigma: c = Sigma gamma /
// (gamma' Sigma gamma), z = (I - c gamma') y.
PivotSpec polyhedral_pivot(const Matrix& A, const Vector& b, const Vector& gamma,
                           const Matrix& sigma, const Vector& y);

// Pivot for theta_bar = sqrt(n) beta_bar on the selected block, with
// A = -diag(s), b = -(lambda / sqrt(n)) diag(s) I_MM^{-1} s and
// I_MM = (info)_MM / n standing in for the covariance inverse.
PivotSpec build_pivot(const Vector& theta_bar, const SelectionEvent& sel, const InfoEstimate& info,
                      double lambda, std::size_t n, const Vector& gamma);

// Observed statistic gamma' y. Throws EmptyTruncation if it lies outside
// [vminus, vplus] by more than rounding.
double pivot_statistic(const PivotSpec& spec, const Vector& y);

double pivot_cdf(const PivotSpec& spec, const Vector& y, double theta);

// 2 min(F, 1 - F) with F the pivot evaluated at null_value.
double selective_pvalue(const PivotSpec& spec, const Vector& y, double null_value = 0.0);

// Equal-tailed (1 - alpha) interval for gamma' mu. Endpoints may be
// infinite when the truncation leaves a tail unbounded.
std::pair<double, double> selective_ci(const PivotSpec& spec, const Vector& y, double alpha);

struct CoordinateInference {
    Eigen::Index index = 0;  // 0-based covariate index
    int sign = 0;
    double lasso = 0.0;
    double one_step = 0.0;
    double theta_bar = 0.0;
    double vminus = -kInf;
    double vplus = kInf;
    double sigma2 = 0.0;
    double p_value = std::numeric_limits<double>::quiet_NaN();
    double ci_low = std::numeric_limits<double>::quiet_NaN();   // beta scale
    double ci_high = std::numeric_limits<double>::quiet_NaN();  // beta scale
    std::string failure;  // error class name, empty on success
    std::string message;

    bool ok() const { return failure.empty(); }
};

struct InferenceReport {
    std::vector<CoordinateInference> coordinates;
    double alpha = 0.05;
    InfoMethod method_onestep = InfoMethod::SPRES;
    InfoMethod method_pivot = InfoMethod::SPRES;
    double min_eig_onestep = std::numeric_limits<double>::quiet_NaN();
    double min_eig_pivot = std::numeric_limits<double>::quiet_NaN();
    std::string status;

    bool all_ok() const;
};

// One-step estimate with info_onestep, then for every selected j the pivot
// with gamma = e_j built from info_pivot. Per-coordinate failures are
// recorded without stopping the others. Throws NotPositiveDefinite if
// either information block is not positive definite.
InferenceReport infer_all(const LassoFit& fit, const SelectionEvent& sel,
                          const InfoEstimate& info_onestep, const InfoEstimate& info_pivot,
                          double alpha);

// Name of the library error class of e ("NonConvergence", ...).
std::string error_tag(const std::exception& e);

} // namespace icsel

#pragma once

#include "icsel/lasso.hpp"

#include <functional>
#include <optional>
#include <string>

namespace icsel {

enum class InfoMethod { LS, SPRES, PRES, PL };

std::string to_string(InfoMethod method);
InfoMethod parse_info_method(const std::string& name);

// Estimate of n times the efficient information for beta.
struct InfoEstimate {
    Matrix matrix;
    InfoMethod method = InfoMethod::LS;
    double epsilon = 0.0;  // increment, numerical methods only
    bool symmetrized = false;
    double min_eig_mm = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double kDefaultEpsilon = 1e-5;

// n (A11 - A12 A22^- A21) from per-subject beta scores (n x p) and
// per-subject nuisance scores along the support indicators (n x m).
// Throws SingularGram if the pseudo-inverse of A22 cannot be formed.
Matrix ls_information(const Matrix& beta_scores, const Matrix& nuisance_scores);

InfoEstimate info_ls(const IntervalDataset& data, const LassoFit& fit);

// S(beta) = n P_n l_beta(beta, Lambda_hat_beta), the profile score.
Vector profile_score(const IntervalDataset& data, const Vector& beta,
                     const std::optional<StepCumHazard>& warm = std::nullopt,
                     const NpmleOptions& options = {});

// Same quantity computed as dQ/dbeta of the Poisson-augmentation expected
// complete-data log likelihood at (beta, Lambda_hat_beta).
Vector augmented_profile_score(const IntervalDataset& data, const Vector& beta,
                               const std::optional<StepCumHazard>& warm = std::nullopt,
                               const NpmleOptions& options = {});

// Five-point central differences: row i holds
// {S(x - 2h e_i) - 8 S(x - h e_i) + 8 S(x + h e_i) - S(x + 2h e_i)} / (12 h),
// the derivative of S with respect to x_i (exact for quartics).
Matrix richardson_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& at,
                           double h);

InfoEstimate info_spres(const IntervalDataset& data, const LassoFit& fit,
                        double epsilon = kDefaultEpsilon);
InfoEstimate info_pres(const IntervalDataset& data, const LassoFit& fit,
                       double epsilon = kDefaultEpsilon);
// Second differences of the profile log likelihood. Slow: p(p+1)/2 + p + 1
// profile solves.
InfoEstimate info_pl(const IntervalDataset& data, const LassoFit& fit,
                     double epsilon = kDefaultEpsilon);

// Second-difference Hessian estimate -{f(x+h e_i+h e_j) - f(x+h e_i) - f(x+h e_j) + f(x)}/h^2.
Matrix second_difference_information(const std::function<double(const Vector&)>& fn,
                                     const Vector& at, double h);

InfoEstimate estimate_information(InfoMethod method, const IntervalDataset& data,
                                  const LassoFit& fit, double epsilon = kDefaultEpsilon);

Matrix symmetrize(const Matrix& a);

// Sub-block (rows and columns in model).
Matrix model_block(const Matrix& a, const std::vector<Eigen::Index>& model);

// Smallest eigenvalue of the (M, M) block of info.matrix / n.
double min_eigen_block(const InfoEstimate& info, const std::vector<Eigen::Index>& model,
                       std::size_t n);

} // namespace icsel
